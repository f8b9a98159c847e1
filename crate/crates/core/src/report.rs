//! Markdown, CSV and plain-text rendering of result matrices.
//!
//! Rows follow the published table: one row per test, except that the two
//! random-excursion tests get one row per state. Serial and cumulative sums
//! keep both p-values in a single cell. Values print with five decimals and
//! a trailing `*` marks every p-value below the threshold.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::experiment::{Cell, ExperimentMatrix};
use crate::nist::{dataset_verdict, TestKind, TestResult, Verdict};

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("unknown report format {0:?} (expected markdown, csv or plain)")]
    UnknownFormat(String),
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Plain,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, ReportError> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "plain" | "text" => Ok(ReportFormat::Plain),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Markdown => "markdown",
            ReportFormat::Csv => "csv",
            ReportFormat::Plain => "plain",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetOutcome {
    pub dataset_id: String,
    pub verdict: Verdict,
    pub failed: Vec<TestKind>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub format: ReportFormat,
    /// The table; for markdown and plain output the summary follows it.
    pub body: String,
    pub outcomes: Vec<DatasetOutcome>,
    /// Per-dataset lines followed by the overall line.
    pub summary: String,
}

/// Five-decimal display of a p-value, flagged when below `alpha`.
pub fn format_p(p: f64, alpha: f64) -> String {
    if p < alpha {
        format!("{p:.5}*")
    } else {
        format!("{p:.5}")
    }
}

struct Table<'a> {
    ids: Vec<String>,
    /// `columns[j][i]`: result of test `TestKind::ALL[i]` on dataset `j`.
    columns: Vec<Vec<Option<&'a TestResult>>>,
}

struct Row {
    test: TestKind,
    label: String,
    /// The p-value label this row shows, or `None` for all of them.
    which: Option<String>,
}

fn rows() -> Vec<Row> {
    let mut out = Vec::new();
    for k in TestKind::ALL {
        match k {
            TestKind::RandomExcursions | TestKind::RandomExcursionsVariant => {
                for l in k.p_value_labels() {
                    out.push(Row {
                        test: k,
                        label: format!("{} {l}", k.title()),
                        which: Some(l),
                    });
                }
            }
            _ => out.push(Row {
                test: k,
                label: k.title().to_string(),
                which: None,
            }),
        }
    }
    out
}

fn row_values(r: &TestResult, which: &Option<String>) -> Vec<f64> {
    r.p_values
        .iter()
        .filter(|p| which.as_ref().is_none_or(|w| &p.label == w))
        .map(|p| p.value.value())
        .collect()
}

fn cell_text(cell: Option<&TestResult>, row: &Row, alpha: f64, csv: bool) -> String {
    let Some(r) = cell else {
        return "not run".into();
    };
    if !r.applicable {
        return "n/a".into();
    }
    let vals: Vec<String> = row_values(r, &row.which).iter().map(|&p| format_p(p, alpha)).collect();
    match (vals.len(), csv) {
        (1, _) => vals[0].clone(),
        (_, true) => vals.join(";"),
        (_, false) => format!("({})", vals.join(", ")),
    }
}

fn outcomes(t: &Table, alpha: f64) -> Vec<DatasetOutcome> {
    t.ids
        .iter()
        .zip(&t.columns)
        .map(|(id, col)| {
            let mut run: Vec<TestResult> = Vec::new();
            let mut failed = Vec::new();
            for r in col.iter().flatten() {
                let mut r = (*r).clone();
                r.verdict = r.verdict_at(alpha);
                if r.verdict == Verdict::NonRandom {
                    failed.push(r.name);
                }
                run.push(r);
            }
            DatasetOutcome {
                dataset_id: id.clone(),
                verdict: dataset_verdict(&run),
                failed,
            }
        })
        .collect()
}

fn summary_text(outcomes: &[DatasetOutcome]) -> String {
    if outcomes.is_empty() {
        return "no datasets\n".into();
    }
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&format!("{}: {}", o.dataset_id, o.verdict));
        if !o.failed.is_empty() {
            let names: Vec<&str> = o.failed.iter().map(|k| k.name()).collect();
            s.push_str(&format!(" (failed: {})", names.join(", ")));
        }
        s.push('\n');
    }
    let passing = outcomes.iter().filter(|o| o.verdict == Verdict::Random).count();
    s.push_str(&format!(
        "overall: {passing} of {} datasets pass every applicable test\n",
        outcomes.len()
    ));
    s
}

fn render_table(t: &Table, format: ReportFormat, alpha: f64) -> Result<RenderedReport, ReportError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ReportError::BadAlpha(alpha));
    }
    let rows = rows();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            let i = TestKind::ALL.iter().position(|&k| k == row.test).expect("known test");
            t.columns
                .iter()
                .map(|col| cell_text(col[i], row, alpha, format == ReportFormat::Csv))
                .collect()
        })
        .collect();
    let outcomes = outcomes(t, alpha);
    let summary = summary_text(&outcomes);
    let body = match format {
        ReportFormat::Markdown => {
            let mut s = format!("# Randomness test results\n\nalpha = {alpha}; `*` marks p < alpha.\n\n| Test |");
            for id in &t.ids {
                s.push_str(&format!(" {id} |"));
            }
            s.push_str("\n|---|");
            s.push_str(&"---:|".repeat(t.ids.len()));
            s.push('\n');
            for (row, vals) in rows.iter().zip(&cells) {
                s.push_str(&format!("| {} |", row.label));
                for v in vals {
                    s.push_str(&format!(" {v} |"));
                }
                s.push('\n');
            }
            s.push_str("\n## Summary\n\n");
            for line in summary.lines() {
                s.push_str(&format!("- {line}\n"));
            }
            s
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["test".to_string()];
            header.extend(t.ids.iter().cloned());
            w.write_record(&header).expect("in-memory write");
            for (row, vals) in rows.iter().zip(&cells) {
                let mut rec = vec![row.label.clone()];
                rec.extend(vals.iter().cloned());
                w.write_record(&rec).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
        ReportFormat::Plain => {
            let label_w = rows.iter().map(|r| r.label.len()).max().unwrap_or(4).max(4);
            let widths: Vec<usize> = (0..t.ids.len())
                .map(|j| cells.iter().map(|c| c[j].len()).chain([t.ids[j].len()]).max().unwrap_or(0))
                .collect();
            let mut s = format!("{:label_w$}", "Test");
            for (id, w) in t.ids.iter().zip(&widths) {
                s.push_str(&format!("  {id:>w$}"));
            }
            s.push('\n');
            for (row, vals) in rows.iter().zip(&cells) {
                s.push_str(&format!("{:label_w$}", row.label));
                for (v, w) in vals.iter().zip(&widths) {
                    s.push_str(&format!("  {v:>w$}"));
                }
                s.push('\n');
            }
            s.push_str(&format!("\n* p < {alpha}\n\n"));
            s.push_str(&summary);
            s
        }
    };
    Ok(RenderedReport {
        format,
        body,
        outcomes,
        summary,
    })
}

/// Renders a result matrix. `alpha` decides flags and verdicts and may
/// differ from the threshold the matrix was run with.
pub fn render(matrix: &ExperimentMatrix, format: ReportFormat, alpha: f64) -> Result<RenderedReport, ReportError> {
    let table = Table {
        ids: matrix.columns.iter().map(|c| c.dataset.dataset_id.clone()).collect(),
        columns: matrix
            .columns
            .iter()
            .map(|c| {
                TestKind::ALL
                    .iter()
                    .map(|&k| {
                        matrix
                            .tests
                            .iter()
                            .position(|&t| t == k)
                            .and_then(|i| match &c.cells[i] {
                                Cell::Run { result } => Some(result),
                                Cell::NotRun { .. } => None,
                            })
                    })
                    .collect()
            })
            .collect(),
    };
    render_table(&table, format, alpha)
}

/// Renders the results of a single dataset as a one-column table.
pub fn render_results(
    dataset_id: &str,
    results: &[TestResult],
    format: ReportFormat,
    alpha: f64,
) -> Result<RenderedReport, ReportError> {
    let table = Table {
        ids: vec![dataset_id.to_string()],
        columns: vec![TestKind::ALL.iter().map(|&k| results.iter().find(|r| r.name == k)).collect()],
    };
    render_table(&table, format, alpha)
}
