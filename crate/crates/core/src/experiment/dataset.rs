use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::annealer::{
    config_digest, generate_stream, reference_generator, AnnealerConfig, GraphSpec, NoiseModel, QubitBias,
    ReferenceKind,
};
use crate::bitstream::{meta_path, read_packed, BitSequence};
use crate::nist::SuiteConfig;

/// Bit counts of the eight hardware datasets, in dataset order.
pub const CANONICAL_BIT_COUNTS: [u64; 8] = [
    2_563_745_952,
    2_573_540_192,
    2_540_168_656,
    2_553_250_672,
    2_610_469_760,
    2_580_696_896,
    2_574_846_768,
    2_580_371_776,
];

/// Anneal time and post-processing flag of each canonical dataset.
pub const CANONICAL_SETTINGS: [(u32, bool); 8] = [
    (1, true),
    (2000, true),
    (10, true),
    (100, true),
    (1, false),
    (2000, false),
    (10, false),
    (100, false),
];

/// Uniform qubit bias of the canonical simulator model.
pub const CANONICAL_BIAS: f64 = 5e-4;

/// Where a dataset's bits come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// A `.bits` file. Relative paths are resolved against the plan file.
    File { path: PathBuf },
    /// The annealer simulator, configured from the record's anneal time and
    /// post-processing flag.
    Simulator {
        #[serde(default)]
        graph: GraphSpec,
        #[serde(default)]
        noise: NoiseModel,
    },
    /// A reference generator.
    Reference { generator: ReferenceKind, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub dataset_id: String,
    pub annealing_time_us: u32,
    pub postprocess_sampling: bool,
    /// Bits to analyze. For file sources `0` means the whole file.
    #[serde(default)]
    pub bit_count: u64,
    pub source: DatasetSource,
}

impl DatasetRecord {
    pub fn annealer_config(&self) -> AnnealerConfig {
        AnnealerConfig::new(self.annealing_time_us, self.postprocess_sampling)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::InvalidPlan(format!("dataset {:?}: {m}", self.dataset_id)));
        if self.dataset_id.is_empty()
            || !self.dataset_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            || self.dataset_id.starts_with('.')
        {
            return bad("dataset_id must be a nonempty name of letters, digits, '.', '_' or '-'".into());
        }
        match &self.source {
            DatasetSource::File { .. } => Ok(()),
            DatasetSource::Simulator { graph, noise } => {
                if self.bit_count == 0 {
                    return bad("simulator sources need bit_count > 0".into());
                }
                let g = graph.build()?;
                let cfg = self.annealer_config();
                cfg.validate()?;
                noise.validate(g.active_count())?;
                Ok(())
            }
            DatasetSource::Reference { .. } if self.bit_count == 0 => bad("reference sources need bit_count > 0".into()),
            DatasetSource::Reference { .. } => Ok(()),
        }
    }

    /// Short description of the source: a path, a simulator config digest
    /// or a generator name.
    pub fn source_descriptor(&self) -> String {
        match &self.source {
            DatasetSource::File { path } => path.display().to_string(),
            DatasetSource::Simulator { graph, noise } => match graph.build() {
                Ok(g) => format!("simulator:{}", config_digest(&g, &self.annealer_config(), noise)),
                Err(_) => "simulator:invalid".into(),
            },
            DatasetSource::Reference { generator, seed } => format!("reference:{generator}:{seed}"),
        }
    }

    /// SHA-256 of the record's canonical JSON; checkpoints are keyed on it.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("record serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Produces the dataset's bits.
    pub fn load(&self) -> Result<BitSequence, ExperimentError> {
        self.validate()?;
        let n = self.bit_count;
        match &self.source {
            DatasetSource::File { path } => load_file(path, n),
            DatasetSource::Simulator { graph, noise } => {
                let g = graph.build()?;
                let active = g.active_count() as u64;
                let (seq, _) = generate_stream(&g, &self.annealer_config(), noise, n.div_ceil(active))?;
                Ok(if seq.len() as u64 == n { seq } else { seq.prefix(n as usize) })
            }
            DatasetSource::Reference { generator, seed } => {
                let n = usize::try_from(n).map_err(|_| ExperimentError::InvalidPlan("bit_count too large".into()))?;
                Ok(reference_generator(*generator, *seed, n))
            }
        }
    }
}

fn load_file(path: &Path, n: u64) -> Result<BitSequence, ExperimentError> {
    let io_err = |e: std::io::Error| ExperimentError::Source(format!("{}: {e}", path.display()));
    let seq = if meta_path(path).exists() {
        read_packed(path, None)?
    } else {
        if n == 0 {
            return Err(ExperimentError::Source(format!(
                "{} has no metadata sidecar; set bit_count",
                path.display()
            )));
        }
        let bytes = std::fs::read(path).map_err(io_err)?;
        let len = bytes.len() * 8;
        BitSequence::from_packed(bytes, len)?
    };
    if n == 0 {
        return Ok(seq);
    }
    if (seq.len() as u64) < n {
        return Err(ExperimentError::Source(format!(
            "{} holds {} bits, fewer than the {n} requested",
            path.display(),
            seq.len()
        )));
    }
    Ok(if seq.len() as u64 == n { seq } else { seq.prefix(n as usize) })
}

/// Simulator noise used by the canonical datasets.
pub fn canonical_noise(seed: u64) -> NoiseModel {
    NoiseModel {
        qubit_bias: QubitBias::Uniform(CANONICAL_BIAS),
        ..NoiseModel::ideal(seed)
    }
}

/// The eight datasets `test1..test8` at their hardware bit counts, each
/// backed by the simulator on the device graph with [`canonical_noise`].
pub fn canonical_experiments() -> Vec<DatasetRecord> {
    CANONICAL_SETTINGS
        .iter()
        .zip(CANONICAL_BIT_COUNTS)
        .enumerate()
        .map(|(i, (&(time, pp), bits))| DatasetRecord {
            dataset_id: format!("test{}", i + 1),
            annealing_time_us: time,
            postprocess_sampling: pp,
            bit_count: bits,
            source: DatasetSource::Simulator {
                graph: GraphSpec::default(),
                noise: canonical_noise(i as u64 + 1),
            },
        })
        .collect()
}

/// A suite configuration plus the datasets to run it on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub suite: SuiteConfig,
    #[serde(default)]
    pub datasets: Vec<DatasetRecord>,
}

impl ExperimentPlan {
    /// The canonical datasets, optionally shortened to `bit_count` bits each.
    pub fn canonical(bit_count: Option<u64>) -> Self {
        let mut datasets = canonical_experiments();
        if let Some(n) = bit_count {
            datasets.iter_mut().for_each(|d| d.bit_count = n);
        }
        Self {
            suite: SuiteConfig::default(),
            datasets,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let plan: Self = toml::from_str(text).map_err(|e| ExperimentError::InvalidPlan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    /// Reads a plan file, resolving relative dataset paths against its
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::Source(format!("{}: {e}", path.display())))?;
        let mut plan = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut plan.datasets {
            if let DatasetSource::File { path } = &mut d.source {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        Ok(plan)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.suite.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for d in &self.datasets {
            d.validate()?;
            if !seen.insert(d.dataset_id.as_str()) {
                return Err(ExperimentError::InvalidPlan(format!("duplicate dataset_id {:?}", d.dataset_id)));
            }
        }
        Ok(())
    }
}
