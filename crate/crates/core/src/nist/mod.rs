//! The fifteen NIST SP 800-22 tests over a packed [`BitSequence`].
//!
//! Every test except the spectral one keeps only counters and small tables,
//! so memory does not grow with the input. A sequence shorter than a test's
//! minimum yields a `not_applicable` result that records the minimum.

mod complexity;
mod config;
mod frequency;
mod rank;
mod scan;
mod serial;
mod spectral;
mod templates;
mod universal;
mod walk;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstream::BitSequence;
use crate::stats::PValue;

pub use complexity::linear_complexity;
pub use config::{ConfigError, SuiteConfig, DEFAULT_ALPHA, DEFAULT_SPECTRAL_CAP_BITS};
pub use frequency::{block_frequency, longest_run_in_block, monobit, runs};
pub use rank::binary_matrix_rank;
pub use serial::{approximate_entropy, serial};
pub use spectral::spectral_dft;
pub use templates::{aperiodic_templates, non_overlapping_template, overlapping_template};
pub use universal::maurers_universal;
pub use walk::{cumulative_sums, random_excursions, random_excursions_variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Monobit,
    BlockFrequency,
    Runs,
    LongestRunInBlock,
    BinaryMatrixRank,
    SpectralDft,
    NonOverlappingTemplate,
    OverlappingTemplate,
    MaurersUniversal,
    LinearComplexity,
    Serial,
    ApproximateEntropy,
    CumulativeSums,
    RandomExcursions,
    RandomExcursionsVariant,
}

impl TestKind {
    /// All tests in report row order.
    pub const ALL: [TestKind; 15] = [
        TestKind::Monobit,
        TestKind::BlockFrequency,
        TestKind::Runs,
        TestKind::LongestRunInBlock,
        TestKind::BinaryMatrixRank,
        TestKind::SpectralDft,
        TestKind::NonOverlappingTemplate,
        TestKind::OverlappingTemplate,
        TestKind::MaurersUniversal,
        TestKind::LinearComplexity,
        TestKind::Serial,
        TestKind::ApproximateEntropy,
        TestKind::CumulativeSums,
        TestKind::RandomExcursions,
        TestKind::RandomExcursionsVariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Monobit => "monobit",
            TestKind::BlockFrequency => "block_frequency",
            TestKind::Runs => "runs",
            TestKind::LongestRunInBlock => "longest_run_in_block",
            TestKind::BinaryMatrixRank => "binary_matrix_rank",
            TestKind::SpectralDft => "spectral_dft",
            TestKind::NonOverlappingTemplate => "non_overlapping_template",
            TestKind::OverlappingTemplate => "overlapping_template",
            TestKind::MaurersUniversal => "maurers_universal",
            TestKind::LinearComplexity => "linear_complexity",
            TestKind::Serial => "serial",
            TestKind::ApproximateEntropy => "approximate_entropy",
            TestKind::CumulativeSums => "cumulative_sums",
            TestKind::RandomExcursions => "random_excursions",
            TestKind::RandomExcursionsVariant => "random_excursions_variant",
        }
    }

    /// Human-readable row title.
    pub fn title(self) -> &'static str {
        match self {
            TestKind::Monobit => "Monobit",
            TestKind::BlockFrequency => "Frequency within block",
            TestKind::Runs => "Runs",
            TestKind::LongestRunInBlock => "Longest runs in a block",
            TestKind::BinaryMatrixRank => "Binary matrix rank",
            TestKind::SpectralDft => "Spectral (DFT)",
            TestKind::NonOverlappingTemplate => "Non-overlapping template matching",
            TestKind::OverlappingTemplate => "Overlapping template matching",
            TestKind::MaurersUniversal => "Maurer's universal",
            TestKind::LinearComplexity => "Linear complexity",
            TestKind::Serial => "Serial",
            TestKind::ApproximateEntropy => "Approximate entropy",
            TestKind::CumulativeSums => "Cumulative sums",
            TestKind::RandomExcursions => "Random excursion",
            TestKind::RandomExcursionsVariant => "Random excursion variant",
        }
    }

    /// Labels of the p-values the test reports when applicable.
    pub fn p_value_labels(self) -> Vec<String> {
        match self {
            TestKind::Serial => vec!["p1".into(), "p2".into()],
            TestKind::CumulativeSums => vec!["forward".into(), "backward".into()],
            TestKind::RandomExcursions => walk::EXCURSION_STATES.iter().map(|x| format!("x={x}")).collect(),
            TestKind::RandomExcursionsVariant => walk::VARIANT_STATES.iter().map(|x| format!("x={x}")).collect(),
            _ => vec!["p".into()],
        }
    }

    pub fn run(self, seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
        match self {
            TestKind::Monobit => monobit(seq, cfg),
            TestKind::BlockFrequency => block_frequency(seq, cfg),
            TestKind::Runs => runs(seq, cfg),
            TestKind::LongestRunInBlock => longest_run_in_block(seq, cfg),
            TestKind::BinaryMatrixRank => binary_matrix_rank(seq, cfg),
            TestKind::SpectralDft => spectral_dft(seq, cfg),
            TestKind::NonOverlappingTemplate => non_overlapping_template(seq, cfg),
            TestKind::OverlappingTemplate => overlapping_template(seq, cfg),
            TestKind::MaurersUniversal => maurers_universal(seq, cfg),
            TestKind::LinearComplexity => linear_complexity(seq, cfg),
            TestKind::Serial => serial(seq, cfg),
            TestKind::ApproximateEntropy => approximate_entropy(seq, cfg),
            TestKind::CumulativeSums => cumulative_sums(seq, cfg),
            TestKind::RandomExcursions => random_excursions(seq, cfg),
            TestKind::RandomExcursionsVariant => random_excursions_variant(seq, cfg),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown test {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Random,
    NonRandom,
    NotApplicable,
}

impl Verdict {
    /// Random iff every p-value is at least `alpha`; an empty list means the
    /// test did not apply.
    pub fn from_p_values<I: IntoIterator<Item = f64>>(p_values: I, alpha: f64) -> Verdict {
        let mut any = false;
        for p in p_values {
            any = true;
            if !(p >= alpha) {
                return Verdict::NonRandom;
            }
        }
        if any {
            Verdict::Random
        } else {
            Verdict::NotApplicable
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Random => "random",
            Verdict::NonRandom => "non_random",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPValue {
    pub label: String,
    pub value: PValue,
}

/// Outcome of one test on one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: TestKind,
    pub params: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, f64>,
    /// The p-values the verdict is decided on.
    pub p_values: Vec<LabeledPValue>,
    /// Supporting p-values that do not enter the verdict, such as the
    /// per-template table of the non-overlapping template test.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<LabeledPValue>,
    pub applicable: bool,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TestResult {
    /// Verdict re-derived at another threshold.
    pub fn verdict_at(&self, alpha: f64) -> Verdict {
        if !self.applicable {
            return Verdict::NotApplicable;
        }
        Verdict::from_p_values(self.p_values.iter().map(|p| p.value.value()), alpha)
    }

    pub fn p(&self, label: &str) -> Option<f64> {
        self.p_values.iter().find(|p| p.label == label).map(|p| p.value.value())
    }

    /// The single p-value of a one-value test, or the first one otherwise.
    pub fn first_p(&self) -> Option<f64> {
        self.p_values.first().map(|p| p.value.value())
    }

    /// Structural checks for results loaded from disk.
    pub fn is_consistent(&self, alpha: f64) -> bool {
        let labels_ok = if self.applicable {
            self.p_values.iter().map(|p| p.label.clone()).eq(self.name.p_value_labels())
        } else {
            self.p_values.is_empty()
        };
        let finite = self.params.values().chain(self.statistics.values()).all(|v| v.is_finite());
        labels_ok && finite && self.verdict == self.verdict_at(alpha)
    }
}

/// Accumulates parameters and statistics while a test runs.
#[derive(Debug)]
pub(crate) struct ResultBuilder {
    kind: TestKind,
    alpha: f64,
    params: BTreeMap<String, f64>,
    statistics: BTreeMap<String, f64>,
    detail: Vec<LabeledPValue>,
    note: Option<String>,
}

impl ResultBuilder {
    pub(crate) fn new(kind: TestKind, cfg: &SuiteConfig, n: usize) -> Self {
        let mut params = BTreeMap::new();
        params.insert("n".to_string(), n as f64);
        Self {
            kind,
            alpha: cfg.alpha,
            params,
            statistics: BTreeMap::new(),
            detail: Vec::new(),
            note: None,
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl Into<f64>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub(crate) fn stat(&mut self, key: &str, value: impl Into<f64>) -> &mut Self {
        let v = value.into();
        debug_assert!(v.is_finite(), "{key} = {v}");
        if v.is_finite() {
            self.statistics.insert(key.to_string(), v);
        }
        self
    }

    pub(crate) fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.note = Some(note.into());
        self
    }

    pub(crate) fn detail(&mut self, label: String, p: f64) -> &mut Self {
        self.detail.push(LabeledPValue {
            label,
            value: PValue::saturating(p),
        });
        self
    }

    /// Applicable result with p-values in label order.
    pub(crate) fn finish(self, p_values: &[f64]) -> TestResult {
        let labels = self.kind.p_value_labels();
        debug_assert_eq!(labels.len(), p_values.len());
        let p_values: Vec<LabeledPValue> = labels
            .into_iter()
            .zip(p_values)
            .map(|(label, &p)| LabeledPValue {
                label,
                value: PValue::saturating(p),
            })
            .collect();
        let verdict = Verdict::from_p_values(p_values.iter().map(|p| p.value.value()), self.alpha);
        TestResult {
            name: self.kind,
            params: self.params,
            statistics: self.statistics,
            p_values,
            detail: self.detail,
            applicable: true,
            verdict,
            note: self.note,
        }
    }

    /// Not applicable, recording the shortest acceptable input.
    pub(crate) fn too_short(mut self, min_bits: u64) -> TestResult {
        let n = self.params["n"];
        self.param("min_bits", min_bits as f64);
        self.not_applicable(format!("needs at least {min_bits} bits, got {n}"))
    }

    pub(crate) fn not_applicable(mut self, reason: impl Into<String>) -> TestResult {
        self.note = Some(reason.into());
        TestResult {
            name: self.kind,
            params: self.params,
            statistics: self.statistics,
            p_values: Vec::new(),
            detail: self.detail,
            applicable: false,
            verdict: Verdict::NotApplicable,
            note: self.note,
        }
    }
}

/// Runs all fifteen tests, returning results in report row order. Tests
/// run concurrently on the rayon pool; the output does not depend on
/// scheduling.
pub fn run_all(seq: &BitSequence, cfg: &SuiteConfig) -> Vec<TestResult> {
    TestKind::ALL.par_iter().map(|kind| kind.run(seq, cfg)).collect()
}

/// Flattens results into `(row label, p-value)` pairs in report order.
pub fn labeled_p_values(results: &[TestResult]) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for r in results {
        let multi = r.name.p_value_labels().len() > 1;
        for p in &r.p_values {
            let label = if multi {
                format!("{} {}", r.name.name(), p.label)
            } else {
                r.name.name().to_string()
            };
            out.push((label, p.value.value()));
        }
    }
    out
}

/// Dataset-level verdict from applicable tests only: non-random if any
/// applicable test fails, not applicable if none applied.
pub fn dataset_verdict(results: &[TestResult]) -> Verdict {
    if results.iter().any(|r| r.verdict == Verdict::NonRandom) {
        Verdict::NonRandom
    } else if results.iter().any(|r| r.applicable) {
        Verdict::Random
    } else {
        Verdict::NotApplicable
    }
}
