use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::bitstream::BitSequence;

/// Calibration sources with known behavior under the test battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// ChaCha20 keystream.
    CryptoQuality,
    /// Low byte of the 16-bit LCG `x <- 25173 x + 13849`; period 2048 bits.
    WeakLcg,
    ConstantZero,
    /// `0101...`
    Alternating,
}

impl ReferenceKind {
    pub const ALL: [ReferenceKind; 4] = [
        ReferenceKind::CryptoQuality,
        ReferenceKind::WeakLcg,
        ReferenceKind::ConstantZero,
        ReferenceKind::Alternating,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::CryptoQuality => "crypto_quality",
            ReferenceKind::WeakLcg => "weak_lcg",
            ReferenceKind::ConstantZero => "constant_zero",
            ReferenceKind::Alternating => "alternating",
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReferenceKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::UnknownKind(s.to_string()))
    }
}

pub fn reference_generator(kind: ReferenceKind, seed: u64, n_bits: usize) -> BitSequence {
    let n_bytes = n_bits.div_ceil(8);
    let mut bytes = vec![0u8; n_bytes];
    match kind {
        ReferenceKind::CryptoQuality => ChaCha20Rng::seed_from_u64(seed).fill_bytes(&mut bytes),
        ReferenceKind::WeakLcg => {
            let mut x = seed as u16;
            for b in &mut bytes {
                x = x.wrapping_mul(25173).wrapping_add(13849);
                *b = x as u8;
            }
        }
        ReferenceKind::ConstantZero => {}
        ReferenceKind::Alternating => bytes.fill(0x55),
    }
    if n_bits % 8 != 0 {
        if let Some(last) = bytes.last_mut() {
            *last &= 0xFFu8 << (8 - n_bits % 8);
        }
    }
    BitSequence::from_packed(bytes, n_bits).expect("length and padding are consistent")
}

/// Reference stream by name; used by the CLI.
pub fn reference_by_name(kind: &str, seed: u64, n_bits: usize) -> Result<BitSequence, SimError> {
    Ok(reference_generator(kind.parse()?, seed, n_bits))
}
