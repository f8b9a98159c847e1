use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{generate_stream, ChimeraGraph, SimError, DEVICE_GRID_SIZE, DEVICE_INACTIVE_QUBITS, DEVICE_SHORE_SIZE};
use crate::bitstream::{BitSequence, StreamMetadata};

/// Attenuation applied by the default post-processing stand-in.
pub const DEFAULT_POSTPROCESS_ATTENUATION: f64 = 0.01;

/// Anneal times used by the canonical experiments, in microseconds.
pub const CANONICAL_ANNEAL_TIMES_US: [u32; 4] = [1, 10, 100, 2000];

/// Job parameters for one single-anneal submission of the all-zero Ising
/// problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealerConfig {
    pub annealing_time_us: u32,
    pub postprocess_sampling: bool,
    pub programming_thermalization_us: u32,
    pub readout_thermalization_us: u32,
    /// Linear Ising coefficients; must be identically zero.
    pub linear_coeffs: Vec<f64>,
    /// Coupler Ising coefficients; must be identically zero.
    pub quadratic_coeffs: Vec<f64>,
    /// Scale applied to bias and coupler noise when post-processing is on.
    pub postprocess_attenuation: f64,
    /// Optional multiplier on bias and drift keyed by anneal time in
    /// microseconds (as a string key). Absent entries mean no effect.
    pub anneal_time_noise_scale: BTreeMap<String, f64>,
}

impl Default for AnnealerConfig {
    fn default() -> Self {
        Self {
            annealing_time_us: 1,
            postprocess_sampling: false,
            programming_thermalization_us: 0,
            readout_thermalization_us: 0,
            linear_coeffs: Vec::new(),
            quadratic_coeffs: Vec::new(),
            postprocess_attenuation: DEFAULT_POSTPROCESS_ATTENUATION,
            anneal_time_noise_scale: BTreeMap::new(),
        }
    }
}

impl AnnealerConfig {
    pub fn new(annealing_time_us: u32, postprocess_sampling: bool) -> Self {
        Self {
            annealing_time_us,
            postprocess_sampling,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(1..=2000).contains(&self.annealing_time_us) {
            return bad(format!("annealing_time_us {} outside [1, 2000]", self.annealing_time_us));
        }
        if self.programming_thermalization_us != 0 || self.readout_thermalization_us != 0 {
            return bad("thermalization times must be 0".into());
        }
        if self.linear_coeffs.iter().chain(&self.quadratic_coeffs).any(|&c| c != 0.0) {
            return bad("Ising coefficients must all be zero".into());
        }
        if !(0.0..=1.0).contains(&self.postprocess_attenuation) {
            return bad(format!("postprocess_attenuation {} outside [0, 1]", self.postprocess_attenuation));
        }
        for (key, &scale) in &self.anneal_time_noise_scale {
            if key.parse::<u32>().is_err() {
                return bad(format!("anneal_time_noise_scale key {key:?} is not an integer"));
            }
            if !(scale.is_finite() && scale >= 0.0) {
                return bad(format!("anneal_time_noise_scale[{key}] must be a non-negative number"));
            }
        }
        Ok(())
    }

    fn noise_scale(&self) -> f64 {
        self.anneal_time_noise_scale
            .get(&self.annealing_time_us.to_string())
            .copied()
            .unwrap_or(1.0)
    }
}

/// Static offset of each qubit's probability of reading `1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitBias {
    Uniform(f64),
    PerQubit(Vec<f64>),
}

impl Default for QubitBias {
    fn default() -> Self {
        QubitBias::Uniform(0.0)
    }
}

impl QubitBias {
    fn scaled(&self, factor: f64) -> Self {
        match self {
            QubitBias::Uniform(b) => QubitBias::Uniform(b * factor),
            QubitBias::PerQubit(v) => QubitBias::PerQubit(v.iter().map(|b| b * factor).collect()),
        }
    }

    fn max_abs(&self) -> f64 {
        match self {
            QubitBias::Uniform(b) => b.abs(),
            QubitBias::PerQubit(v) => v.iter().fold(0.0, |m, b| m.max(b.abs())),
        }
    }
}

/// Phenomenological noise knobs, one per noise source, each independently
/// switchable.
///
/// - `qubit_bias`: added to P(bit = 1) per qubit; `bias_jitter` adds a fixed
///   per-qubit offset drawn uniformly from `[-jitter, jitter]` by the seed.
/// - `temporal_rho`: chance a qubit repeats its value from the previous anneal.
/// - `coupler_rho`: chance, per coupler per anneal, that the lower-indexed
///   endpoint's value overwrites the higher-indexed endpoint.
/// - `drift_amplitude`, `drift_period_anneals`: sinusoidal bias drift
///   `A sin(2 pi t / P)` over anneal ordinal `t`; a zero period disables it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    #[serde(rename = "bias")]
    pub qubit_bias: QubitBias,
    pub bias_jitter: f64,
    pub temporal_rho: f64,
    pub coupler_rho: f64,
    pub drift_amplitude: f64,
    pub drift_period_anneals: f64,
    #[serde(rename = "seed")]
    pub rng_seed: u64,
}

impl NoiseModel {
    /// Ideal source: every qubit an independent fair coin.
    pub fn ideal(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn with_uniform_bias(seed: u64, bias: f64) -> Self {
        Self {
            qubit_bias: QubitBias::Uniform(bias),
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self, active_count: usize) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        let finite = [
            self.bias_jitter,
            self.temporal_rho,
            self.coupler_rho,
            self.drift_amplitude,
            self.drift_period_anneals,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("noise parameters must be finite".into());
        }
        if let QubitBias::PerQubit(v) = &self.qubit_bias {
            if v.len() != active_count {
                return bad(format!("per-qubit bias has {} entries for {active_count} active qubits", v.len()));
            }
        }
        let bias_ok = match &self.qubit_bias {
            QubitBias::Uniform(b) => b.is_finite(),
            QubitBias::PerQubit(v) => v.iter().all(|b| b.is_finite()),
        };
        if !bias_ok {
            return bad("bias must be finite".into());
        }
        for (name, p) in [("temporal_rho", self.temporal_rho), ("coupler_rho", self.coupler_rho)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} outside [0, 1]"));
            }
        }
        if self.bias_jitter < 0.0 || self.drift_period_anneals < 0.0 {
            return bad("bias_jitter and drift_period_anneals must be non-negative".into());
        }
        let worst = self.qubit_bias.max_abs() + self.bias_jitter + self.drift_amplitude.abs();
        if worst >= 0.5 {
            return bad(format!("bias + jitter + drift reaches {worst}; P(1) must stay inside (0, 1)"));
        }
        Ok(())
    }

    /// Per-qubit static bias including jitter, for `active_count` qubits.
    pub(crate) fn resolved_bias(&self, active_count: usize) -> Vec<f64> {
        let mut bias = match &self.qubit_bias {
            QubitBias::Uniform(b) => vec![*b; active_count],
            QubitBias::PerQubit(v) => v.clone(),
        };
        if self.bias_jitter > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
            rng.set_stream(u64::MAX);
            for b in &mut bias {
                let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                *b += self.bias_jitter * (2.0 * u - 1.0);
            }
        }
        bias
    }

    /// Drift offset at anneal ordinal `t`.
    pub fn drift_at(&self, t: u64) -> f64 {
        if self.drift_amplitude == 0.0 || self.drift_period_anneals == 0.0 {
            return 0.0;
        }
        self.drift_amplitude * (std::f64::consts::TAU * t as f64 / self.drift_period_anneals).sin()
    }
}

/// Stand-in for server-side post-processing: scales static bias (including
/// jitter) and coupler cross-talk by `attenuation`. It is a phenomenological
/// knob, not a reconstruction of the vendor algorithm.
pub fn apply_postprocess_model(noise: &NoiseModel, attenuation: f64) -> NoiseModel {
    NoiseModel {
        qubit_bias: noise.qubit_bias.scaled(attenuation),
        bias_jitter: noise.bias_jitter * attenuation,
        coupler_rho: noise.coupler_rho * attenuation,
        ..noise.clone()
    }
}

/// The noise actually applied for `config`: post-processing attenuation
/// when enabled, then the optional anneal-time scale on bias and drift.
pub fn effective_noise(config: &AnnealerConfig, noise: &NoiseModel) -> NoiseModel {
    let mut eff = if config.postprocess_sampling {
        apply_postprocess_model(noise, config.postprocess_attenuation)
    } else {
        noise.clone()
    };
    let scale = config.noise_scale();
    if scale != 1.0 {
        eff.qubit_bias = eff.qubit_bias.scaled(scale);
        eff.bias_jitter *= scale;
        eff.drift_amplitude *= scale;
    }
    eff
}

/// Which qubits are inactive in a configured graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InactiveQubits {
    /// `"device"` for the bundled fixture or `"none"` for a full lattice.
    Named(String),
    List(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSpec {
    pub grid_size: u32,
    pub shore_size: u32,
    pub inactive_qubits: InactiveQubits,
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            grid_size: DEVICE_GRID_SIZE,
            shore_size: DEVICE_SHORE_SIZE,
            inactive_qubits: InactiveQubits::Named("device".into()),
        }
    }
}

impl GraphSpec {
    pub fn build(&self) -> Result<ChimeraGraph, SimError> {
        if self.grid_size == 0 || self.grid_size > 64 || self.shore_size == 0 || self.shore_size > 64 {
            return Err(SimError::InvalidConfig("grid_size and shore_size must be in 1..=64".into()));
        }
        match &self.inactive_qubits {
            InactiveQubits::Named(name) if name == "device" => {
                ChimeraGraph::with_inactive(self.grid_size, self.shore_size, &DEVICE_INACTIVE_QUBITS)
            }
            InactiveQubits::Named(name) if name == "none" => {
                ChimeraGraph::all_active(self.grid_size, self.shore_size)
            }
            InactiveQubits::Named(other) => Err(SimError::InvalidConfig(format!(
                "inactive_qubits must be \"device\", \"none\" or a list, got {other:?}"
            ))),
            InactiveQubits::List(list) => ChimeraGraph::with_inactive(self.grid_size, self.shore_size, list),
        }
    }
}

/// A complete simulator description: the `[graph]`, `[config]` and `[noise]`
/// sections of a simulator config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimulatorSpec {
    pub graph: GraphSpec,
    pub config: AnnealerConfig,
    pub noise: NoiseModel,
}

impl SimulatorSpec {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let spec: Self = toml::from_str(text).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("simulator spec serializes")
    }

    /// Builds and validates the graph, config and noise together.
    pub fn resolve(&self) -> Result<ChimeraGraph, SimError> {
        let graph = self.graph.build()?;
        self.config.validate()?;
        self.noise.validate(graph.active_count())?;
        effective_noise(&self.config, &self.noise).validate(graph.active_count())?;
        Ok(graph)
    }

    /// Resolves the spec and generates `n_anneals` anneals.
    pub fn generate(&self, n_anneals: u64) -> Result<(BitSequence, StreamMetadata), SimError> {
        let graph = self.resolve()?;
        generate_stream(&graph, &self.config, &self.noise, n_anneals)
    }
}

/// SHA-256 over the canonical JSON of everything that determines a stream.
pub fn config_digest(graph: &ChimeraGraph, config: &AnnealerConfig, noise: &NoiseModel) -> String {
    let doc = serde_json::json!({
        "graph": {
            "grid_size": graph.grid_size(),
            "shore_size": graph.shore_size(),
            "inactive_qubits": graph.inactive_qubits(),
        },
        "config": config,
        "noise": noise,
    });
    let json = serde_json::to_vec(&doc).expect("digest document serializes");
    hex::encode(Sha256::digest(&json))
}
