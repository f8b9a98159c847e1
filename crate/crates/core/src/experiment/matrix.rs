use serde::{Deserialize, Serialize};

use super::{DatasetRecord, ExperimentError};
use crate::nist::{dataset_verdict, SuiteConfig, TestKind, TestResult, Verdict};

/// All test results for one dataset, in report row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetColumn {
    pub record: DatasetRecord,
    pub suite_digest: String,
    pub results: Vec<TestResult>,
}

/// One matrix cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Cell {
    Run { result: TestResult },
    NotRun { test: TestKind },
}

impl Cell {
    pub fn result(&self) -> Option<&TestResult> {
        match self {
            Cell::Run { result } => Some(result),
            Cell::NotRun { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixColumn {
    pub dataset: DatasetRecord,
    /// One cell per row of [`ExperimentMatrix::tests`].
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset_id: String,
    pub verdict: Verdict,
    pub failed: Vec<TestKind>,
    pub not_applicable: Vec<TestKind>,
    pub not_run: Vec<TestKind>,
}

/// Tests by datasets, with the suite configuration that produced every cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMatrix {
    pub suite: SuiteConfig,
    pub suite_digest: String,
    pub tests: Vec<TestKind>,
    pub columns: Vec<MatrixColumn>,
    pub summaries: Vec<DatasetSummary>,
}

/// Assembles columns into a matrix. Every column must come from `suite`.
pub fn aggregate(suite: &SuiteConfig, columns: Vec<DatasetColumn>) -> Result<ExperimentMatrix, ExperimentError> {
    let digest = suite.digest();
    let mut out = Vec::with_capacity(columns.len());
    for col in columns {
        if col.suite_digest != digest {
            return Err(ExperimentError::ConfigMismatch(format!(
                "dataset {:?} was run with suite config {}, expected {digest}",
                col.record.dataset_id, col.suite_digest
            )));
        }
        if out.iter().any(|c: &MatrixColumn| c.dataset.dataset_id == col.record.dataset_id) {
            return Err(ExperimentError::InvalidPlan(format!("duplicate dataset_id {:?}", col.record.dataset_id)));
        }
        let cells = TestKind::ALL
            .iter()
            .map(|&k| match col.results.iter().find(|r| r.name == k) {
                Some(r) => Cell::Run { result: r.clone() },
                None => Cell::NotRun { test: k },
            })
            .collect();
        out.push(MatrixColumn {
            dataset: col.record,
            cells,
        });
    }
    let mut m = ExperimentMatrix {
        suite: suite.clone(),
        suite_digest: digest,
        tests: TestKind::ALL.to_vec(),
        columns: out,
        summaries: Vec::new(),
    };
    m.summaries = m.columns.iter().map(|c| summarize(&m.tests, c)).collect();
    Ok(m)
}

fn summarize(tests: &[TestKind], col: &MatrixColumn) -> DatasetSummary {
    let mut s = DatasetSummary {
        dataset_id: col.dataset.dataset_id.clone(),
        verdict: Verdict::NotApplicable,
        failed: Vec::new(),
        not_applicable: Vec::new(),
        not_run: Vec::new(),
    };
    let mut run = Vec::new();
    for (&k, cell) in tests.iter().zip(&col.cells) {
        match cell.result() {
            None => s.not_run.push(k),
            Some(r) => {
                match r.verdict {
                    Verdict::NonRandom => s.failed.push(k),
                    Verdict::NotApplicable => s.not_applicable.push(k),
                    Verdict::Random => {}
                }
                run.push(r.clone());
            }
        }
    }
    s.verdict = dataset_verdict(&run);
    s
}

impl ExperimentMatrix {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("matrix serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let m: Self = serde_json::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Parse(m.to_string()));
        if self.suite.digest() != self.suite_digest {
            return bad("suite digest does not match the embedded suite config");
        }
        if self.summaries.len() != self.columns.len() {
            return bad("one summary per column required");
        }
        for col in &self.columns {
            if col.cells.len() != self.tests.len() {
                return bad("every column needs one cell per test");
            }
            for (&k, cell) in self.tests.iter().zip(&col.cells) {
                let ok = match cell {
                    Cell::Run { result } => result.name == k && result.is_consistent(self.suite.alpha),
                    Cell::NotRun { test } => *test == k,
                };
                if !ok {
                    return bad(&format!("cell for {k} in {:?} is inconsistent", col.dataset.dataset_id));
                }
            }
        }
        Ok(())
    }

    pub fn cell(&self, dataset_id: &str, test: TestKind) -> Option<&Cell> {
        let row = self.tests.iter().position(|&t| t == test)?;
        let col = self.columns.iter().find(|c| c.dataset.dataset_id == dataset_id)?;
        col.cells.get(row)
    }

    pub fn summary(&self, dataset_id: &str) -> Option<&DatasetSummary> {
        self.summaries.iter().find(|s| s.dataset_id == dataset_id)
    }

    /// Rows are tests, columns are datasets and each cell holds the test's
    /// p-values joined by `;` at full precision. Cells read `not_applicable`
    /// or `not_run` when there is nothing to print.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["test".to_string()];
        header.extend(self.columns.iter().map(|c| c.dataset.dataset_id.clone()));
        w.write_record(&header).expect("in-memory write");
        for (row, k) in self.tests.iter().enumerate() {
            let mut rec = vec![k.name().to_string()];
            for col in &self.columns {
                rec.push(match &col.cells[row] {
                    Cell::NotRun { .. } => "not_run".into(),
                    Cell::Run { result } if !result.applicable => "not_applicable".into(),
                    Cell::Run { result } => result
                        .p_values
                        .iter()
                        .map(|p| p.value.value().to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                });
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealer::ReferenceKind;
    use crate::experiment::{run_dataset, DatasetSource};

    fn column(id: &str, kind: ReferenceKind, n: u64, cfg: &SuiteConfig) -> DatasetColumn {
        let rec = DatasetRecord {
            dataset_id: id.into(),
            annealing_time_us: 10,
            postprocess_sampling: true,
            bit_count: n,
            source: DatasetSource::Reference { generator: kind, seed: 9 },
        };
        run_dataset(&rec, cfg, None).unwrap()
    }

    fn cfg() -> SuiteConfig {
        SuiteConfig {
            serial_m: 8,
            approximate_entropy_m: 6,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn empty_matrix() {
        let m = aggregate(&cfg(), vec![]).unwrap();
        assert!(m.columns.is_empty() && m.summaries.is_empty());
        assert_eq!(m.tests.len(), 15);
        assert_eq!(ExperimentMatrix::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(m.to_csv().lines().count(), 16);
    }

    #[test]
    fn summaries_list_failures() {
        let c = cfg();
        let m = aggregate(
            &c,
            vec![
                column("good", ReferenceKind::CryptoQuality, 60_000, &c),
                column("zero", ReferenceKind::ConstantZero, 60_000, &c),
            ],
        )
        .unwrap();
        let zero = m.summary("zero").unwrap();
        assert_eq!(zero.verdict, Verdict::NonRandom);
        assert!(zero.failed.contains(&TestKind::Monobit));
        assert!(zero.not_run.is_empty());
        let good = m.summary("good").unwrap();
        assert!(good.failed.is_empty(), "{good:?}");
        assert!(matches!(m.cell("zero", TestKind::Monobit), Some(Cell::Run { .. })));
    }

    #[test]
    fn missing_tests_are_not_run() {
        let c = cfg();
        let mut col = column("a", ReferenceKind::CryptoQuality, 20_000, &c);
        col.results.retain(|r| r.name != TestKind::Serial);
        let m = aggregate(&c, vec![col]).unwrap();
        assert_eq!(m.summary("a").unwrap().not_run, vec![TestKind::Serial]);
        assert!(m.to_csv().contains("serial,not_run"));
        assert_eq!(ExperimentMatrix::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn config_mismatch() {
        let c = cfg();
        let col = column("a", ReferenceKind::CryptoQuality, 20_000, &c);
        let other = SuiteConfig { alpha: 0.02, ..c.clone() };
        assert!(matches!(aggregate(&other, vec![col.clone()]), Err(ExperimentError::ConfigMismatch(_))));
        assert!(aggregate(&c, vec![col.clone(), col]).is_err());
    }

    #[test]
    fn json_and_csv_round_trip() {
        let c = cfg();
        let m = aggregate(
            &c,
            vec![
                column("x", ReferenceKind::CryptoQuality, 70_000, &c),
                column("y", ReferenceKind::WeakLcg, 70_000, &c),
            ],
        )
        .unwrap();
        let text = m.to_json();
        let back = ExperimentMatrix::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);

        let csv_text = m.to_csv();
        let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), vec!["test", "x", "y"]);
        for (row, rec) in rd.records().enumerate() {
            let rec = rec.unwrap();
            assert_eq!(&rec[0], m.tests[row].name());
            for (j, col) in m.columns.iter().enumerate() {
                let r = col.cells[row].result().unwrap();
                if r.applicable {
                    let parsed: Vec<f64> = rec[j + 1].split(';').map(|v| v.parse().unwrap()).collect();
                    let want: Vec<f64> = r.p_values.iter().map(|p| p.value.value()).collect();
                    assert_eq!(parsed, want);
                } else {
                    assert_eq!(&rec[j + 1], "not_applicable");
                }
            }
        }
    }

    #[test]
    fn tampered_matrix_is_rejected() {
        let c = cfg();
        let m = aggregate(&c, vec![column("x", ReferenceKind::CryptoQuality, 20_000, &c)]).unwrap();
        let mut bad = m.clone();
        bad.suite.alpha = 0.2;
        assert!(ExperimentMatrix::from_json(&bad.to_json()).is_err());
        let mut bad = m.clone();
        bad.columns[0].cells.swap(0, 1);
        assert!(ExperimentMatrix::from_json(&bad.to_json()).is_err());
        assert!(ExperimentMatrix::from_json("[]").is_err());
    }
}
