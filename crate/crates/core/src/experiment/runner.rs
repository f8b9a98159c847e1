use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{aggregate, DatasetColumn, DatasetRecord, ExperimentError, ExperimentMatrix, ExperimentPlan};
use crate::bitstream::BitSequence;
use crate::fsutil::atomic_write_bytes;
use crate::nist::{SuiteConfig, TestKind, TestResult};

/// On-disk form of one finished test: `<dir>/<dataset_id>/<test>.result`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub suite_digest: String,
    pub dataset_digest: String,
    pub result: TestResult,
}

pub fn checkpoint_path(dir: &Path, dataset_id: &str, test: TestKind) -> PathBuf {
    dir.join(dataset_id).join(format!("{}.result", test.name()))
}

fn read_checkpoint(path: &Path, suite_digest: &str, dataset_digest: &str, alpha: f64) -> Result<Option<TestResult>, ExperimentError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let cp: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| ExperimentError::Checkpoint(format!("{}: {e}", path.display())))?;
    if cp.suite_digest != suite_digest || cp.dataset_digest != dataset_digest {
        return Err(ExperimentError::Checkpoint(format!(
            "{} was written for a different suite config or dataset; refusing to mix",
            path.display()
        )));
    }
    if !cp.result.is_consistent(alpha) {
        return Err(ExperimentError::Checkpoint(format!("{} holds an inconsistent result", path.display())));
    }
    Ok(Some(cp.result))
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let text = serde_json::to_string_pretty(cp).expect("checkpoint serializes");
    atomic_write_bytes(path, text.as_bytes())?;
    Ok(())
}

/// Outcome of a run that may stop early.
#[derive(Debug, Clone, PartialEq)]
pub enum Progress<T> {
    Complete(T),
    /// The new-work budget ran out; finished tests are checkpointed.
    Interrupted { computed: usize },
}

/// Runs every test on one dataset. With a checkpoint directory, finished
/// tests are read back instead of recomputed and new results are written as
/// they complete.
pub fn run_dataset(
    record: &DatasetRecord,
    cfg: &SuiteConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<DatasetColumn, ExperimentError> {
    match run_dataset_limited(record, cfg, checkpoint_dir, None)? {
        (Progress::Complete(c), _) => Ok(c),
        (Progress::Interrupted { .. }, _) => unreachable!("unlimited run stopped early"),
    }
}

/// Like [`run_dataset`], but computes at most `budget` tests that are not
/// already checkpointed, in report row order. Returns the number computed.
pub fn run_dataset_limited(
    record: &DatasetRecord,
    cfg: &SuiteConfig,
    checkpoint_dir: Option<&Path>,
    budget: Option<usize>,
) -> Result<(Progress<DatasetColumn>, usize), ExperimentError> {
    cfg.validate()?;
    record.validate()?;
    let suite_digest = cfg.digest();
    let dataset_digest = record.digest();
    let mut slots: Vec<Option<TestResult>> = vec![None; TestKind::ALL.len()];
    if let Some(dir) = checkpoint_dir {
        for (slot, kind) in slots.iter_mut().zip(TestKind::ALL) {
            *slot = read_checkpoint(&checkpoint_path(dir, &record.dataset_id, kind), &suite_digest, &dataset_digest, cfg.alpha)?;
        }
    }
    let missing: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_none()).collect();
    let todo = &missing[..budget.map_or(missing.len(), |b| b.min(missing.len()))];
    let mut seq: Option<BitSequence> = None;
    if !todo.is_empty() {
        seq = Some(record.load()?);
    }
    let fresh: Vec<Result<(usize, TestResult), ExperimentError>> = todo
        .par_iter()
        .map(|&i| {
            let result = TestKind::ALL[i].run(seq.as_ref().expect("loaded"), cfg);
            if let Some(dir) = checkpoint_dir {
                let cp = Checkpoint {
                    suite_digest: suite_digest.clone(),
                    dataset_digest: dataset_digest.clone(),
                    result,
                };
                write_checkpoint(&checkpoint_path(dir, &record.dataset_id, TestKind::ALL[i]), &cp)?;
                return Ok((i, cp.result));
            }
            Ok((i, result))
        })
        .collect();
    for item in fresh {
        let (i, result) = item?;
        slots[i] = Some(result);
    }
    let computed = todo.len();
    if todo.len() < missing.len() {
        return Ok((Progress::Interrupted { computed }, computed));
    }
    let bit_count = match (&seq, record.bit_count) {
        (Some(s), _) => s.len() as u64,
        (None, n) if n > 0 => n,
        (None, _) => slots
            .iter()
            .flatten()
            .next()
            .and_then(|r| r.params.get("n"))
            .map_or(0, |&n| n as u64),
    };
    let mut record = record.clone();
    record.bit_count = bit_count;
    Ok((
        Progress::Complete(DatasetColumn {
            record,
            suite_digest,
            results: slots.into_iter().map(|s| s.expect("filled")).collect(),
        }),
        computed,
    ))
}

/// Runs a whole plan. Datasets run one after another and the tests within
/// a dataset run concurrently. `stop_after` caps the number of newly
/// computed tests across the plan.
pub fn run_plan(
    plan: &ExperimentPlan,
    checkpoint_dir: Option<&Path>,
    stop_after: Option<usize>,
) -> Result<Progress<ExperimentMatrix>, ExperimentError> {
    plan.validate()?;
    let mut budget = stop_after;
    let mut total = 0;
    let mut columns = Vec::with_capacity(plan.datasets.len());
    for record in &plan.datasets {
        let (progress, computed) = run_dataset_limited(record, &plan.suite, checkpoint_dir, budget)?;
        total += computed;
        if let Some(b) = budget.as_mut() {
            *b -= computed;
        }
        match progress {
            Progress::Complete(c) => columns.push(c),
            Progress::Interrupted { .. } => return Ok(Progress::Interrupted { computed: total }),
        }
    }
    Ok(Progress::Complete(aggregate(&plan.suite, columns)?))
}
