use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_SPECTRAL_CAP_BITS: u64 = 1 << 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid suite config: {0}")]
    Invalid(String),
    #[error("cannot parse suite config: {0}")]
    Parse(String),
}

/// Parameters for the battery. Values the standard leaves to the user are
/// fixed here and recorded in every result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    /// Pass threshold; a p-value equal to alpha passes.
    pub alpha: f64,
    /// Longest prefix, in bits, analyzed by the spectral test.
    pub spectral_cap_bits: u64,
    /// Workspace budget for the spectral test on long inputs, in bytes.
    pub spectral_workspace_bytes: u64,
    /// Block length; unset means 131072 above 10^8 bits and
    /// `max(20, ceil(0.02 n))` capped at 131072 otherwise.
    pub block_frequency_m: Option<u64>,
    pub non_overlapping_m: u32,
    pub non_overlapping_blocks: u64,
    pub overlapping_m: u32,
    pub overlapping_block: u64,
    /// Block length; unset means the standard's table by input length.
    pub universal_l: Option<u32>,
    pub linear_complexity_m: u64,
    pub serial_m: u32,
    pub approximate_entropy_m: u32,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            spectral_cap_bits: DEFAULT_SPECTRAL_CAP_BITS,
            spectral_workspace_bytes: 768 << 20,
            block_frequency_m: None,
            non_overlapping_m: 9,
            non_overlapping_blocks: 8,
            overlapping_m: 9,
            overlapping_block: 1032,
            universal_l: None,
            linear_complexity_m: 500,
            serial_m: 16,
            approximate_entropy_m: 10,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha {} outside (0, 1)", self.alpha));
        }
        if !self.spectral_cap_bits.is_power_of_two() || self.spectral_cap_bits < 1 << 10 {
            return bad(format!("spectral_cap_bits {} must be a power of two >= 1024", self.spectral_cap_bits));
        }
        if self.spectral_workspace_bytes < 16 << 20 {
            return bad("spectral_workspace_bytes must be at least 16 MiB".into());
        }
        if self.block_frequency_m == Some(0) {
            return bad("block_frequency_m must be positive".into());
        }
        if !(2..=16).contains(&self.non_overlapping_m) {
            return bad(format!("non_overlapping_m {} outside [2, 16]", self.non_overlapping_m));
        }
        if self.non_overlapping_blocks == 0 {
            return bad("non_overlapping_blocks must be positive".into());
        }
        if !(2..=16).contains(&self.overlapping_m) || self.overlapping_block <= self.overlapping_m as u64 {
            return bad("overlapping_m must be in [2, 16] and shorter than overlapping_block".into());
        }
        if let Some(l) = self.universal_l {
            if !(6..=16).contains(&l) {
                return bad(format!("universal_l {l} outside [6, 16]"));
            }
        }
        if !(2..=100_000).contains(&self.linear_complexity_m) {
            return bad(format!("linear_complexity_m {} outside [2, 100000]", self.linear_complexity_m));
        }
        if !(2..=20).contains(&self.serial_m) {
            return bad(format!("serial_m {} outside [2, 20]", self.serial_m));
        }
        if !(1..=19).contains(&self.approximate_entropy_m) {
            return bad(format!("approximate_entropy_m {} outside [1, 19]", self.approximate_entropy_m));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("suite config serializes")
    }

    /// SHA-256 over the canonical JSON encoding; checkpoints and matrices use
    /// it to refuse mixing configurations.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("suite config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
