//! Numeric and algebraic kernels shared by the test battery.

mod gamma;
mod gf2;
mod lfsr;
mod spectrum;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gamma::{igamc, igamc_checked};
pub use gf2::gf2_rank;
pub(crate) use gf2::rank_32;
pub use lfsr::berlekamp_massey;
pub(crate) use lfsr::LfsrSynth;
pub use spectrum::dft_moduli;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("empty block")]
    EmptyBlock,
    #[error("p-value {0} outside [0, 1]")]
    InvalidPValue(f64),
}

/// A probability in `[0, 1]`; NaN is unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PValue(f64);

impl PValue {
    pub fn new(value: f64) -> Result<Self, StatsError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(StatsError::InvalidPValue(value))
        }
    }

    /// Clamps rounding overshoot into `[0, 1]`. NaN is a bug in the caller.
    pub(crate) fn saturating(value: f64) -> Self {
        assert!(!value.is_nan(), "NaN p-value");
        Self(value.clamp(0.0, 1.0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Pass rule: `p >= alpha`.
    #[inline]
    pub fn passes(self, alpha: f64) -> bool {
        self.0 >= alpha
    }
}

impl TryFrom<f64> for PValue {
    type Error = StatsError;
    fn try_from(value: f64) -> Result<Self, StatsError> {
        Self::new(value)
    }
}

impl From<PValue> for f64 {
    fn from(p: PValue) -> f64 {
        p.0
    }
}

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal cumulative distribution function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}
