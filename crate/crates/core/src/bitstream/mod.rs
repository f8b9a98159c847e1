//! Packed bit sequences and the conversions that produce them: anneal
//! samples to bits, `.bits` files with their metadata sidecar, and spin CSV
//! ingestion.
//!
//! Spin `+1` maps to bit `1` and spin `-1` to bit `0`. Bits are packed
//! most-significant-bit first and the tail of the last byte is zero.

mod packed_file;
mod sequence;
mod spin_csv;

use thiserror::Error;

pub use packed_file::{meta_path, read_packed, read_packed_exact, write_packed, write_packed_with_meta, StreamMetadata, StreamOrigin};
pub use sequence::{BitSequence, BitSequenceBuilder, Bits};
pub use spin_csv::{convert_spin_csv, ingest_spin_csv, SpinCsvReader};

pub(crate) use sequence::{count_ones_range, read_bits};

#[derive(Debug, Error)]
pub enum BitstreamError {
    #[error("malformed anneal sample: {0}")]
    MalformedSample(String),
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
    #[error("no metadata sidecar at {0}; an explicit bit count is required")]
    ExplicitLengthRequired(String),
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: u64,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One anneal-readout cycle: a spin per active qubit in ascending logical
/// qubit order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnealSample {
    pub spins: Vec<i8>,
    pub anneal_index: u64,
    /// Set on the first sample after a gap in acquisition.
    pub epoch_tag: Option<u32>,
}

impl AnnealSample {
    pub fn new(spins: Vec<i8>, anneal_index: u64) -> Self {
        Self {
            spins,
            anneal_index,
            epoch_tag: None,
        }
    }

    pub fn count_up(&self) -> usize {
        self.spins.iter().filter(|&&s| s == 1).count()
    }
}

/// Converts one sample to bits, `+1 -> 1` and `-1 -> 0`, preserving order.
pub fn spins_to_bits(sample: &AnnealSample) -> Result<BitSequence, BitstreamError> {
    let mut builder = BitSequenceBuilder::with_capacity(sample.spins.len());
    for (i, &spin) in sample.spins.iter().enumerate() {
        match spin {
            1 => builder.push(true),
            -1 => builder.push(false),
            other => {
                return Err(BitstreamError::MalformedSample(format!(
                    "spin {other} at position {i} of anneal {}",
                    sample.anneal_index
                )))
            }
        }
    }
    Ok(builder.finish())
}

/// In-order concatenation of `parts`.
pub fn concat<'a, I>(parts: I) -> BitSequence
where
    I: IntoIterator<Item = &'a BitSequence>,
{
    let mut builder = BitSequenceBuilder::new();
    for part in parts {
        builder.extend_from(part);
    }
    builder.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_seq() -> impl Strategy<Value = BitSequence> {
        proptest::collection::vec(any::<bool>(), 0..100).prop_map(BitSequence::from_bits)
    }

    #[test]
    fn spins_map_to_fixed_bits() {
        let s = spins_to_bits(&AnnealSample::new(vec![-1, 1, -1], 0)).unwrap();
        assert_eq!(s.to_string(), "010");
        let ones = spins_to_bits(&AnnealSample::new(vec![1; 2032], 0)).unwrap();
        assert_eq!(ones.len(), 2032);
        assert_eq!(ones.count_ones(), 2032);
    }

    #[test]
    fn popcount_of_recorded_sample() {
        // 2032 spins with +1 at every index where (7i + 3) mod 4 != 0, trimmed
        // to exactly 1017 up-spins.
        let mut spins: Vec<i8> = (0..2032).map(|i| if (7 * i + 3) % 4 != 0 { 1 } else { -1 }).collect();
        let mut ups = spins.iter().filter(|&&s| s == 1).count();
        for s in spins.iter_mut().rev() {
            if ups == 1017 {
                break;
            }
            if *s == 1 {
                *s = -1;
                ups -= 1;
            }
        }
        let brute = spins.iter().filter(|&&s| s == 1).count();
        assert_eq!(brute, 1017);
        let bits = spins_to_bits(&AnnealSample::new(spins, 9)).unwrap();
        assert_eq!(bits.count_ones(), 1017);
    }

    #[test]
    fn rejects_non_spin_values() {
        let err = spins_to_bits(&AnnealSample::new(vec![1, 0, -1], 4)).unwrap_err();
        assert!(matches!(err, BitstreamError::MalformedSample(_)));
    }

    #[test]
    fn concat_examples() {
        let one: BitSequence = "1".parse().unwrap();
        let zero: BitSequence = "0".parse().unwrap();
        assert_eq!(concat([&one, &zero]).to_string(), "10");
        let empty = BitSequence::new();
        let s: BitSequence = "110100111".parse().unwrap();
        assert_eq!(concat([&empty, &s]), s);

        let parts: Vec<BitSequence> = ["10011", "011100101", "11"]
            .iter()
            .map(|p| p.parse().unwrap())
            .collect();
        let mut naive = Vec::new();
        for p in &parts {
            for i in 0..p.len() {
                naive.push(p.bit(i));
            }
        }
        let joined = concat(&parts);
        assert_eq!(joined.len(), 16);
        assert_eq!(joined, BitSequence::from_bits(naive));
    }

    proptest! {
        #[test]
        fn concat_is_associative(a in arb_seq(), b in arb_seq(), c in arb_seq()) {
            let left = concat([&concat([&a, &b]), &c]);
            let right = concat([&a, &concat([&b, &c])]);
            prop_assert_eq!(left.len(), a.len() + b.len() + c.len());
            prop_assert_eq!(left, right);
        }

        #[test]
        fn spin_bits_are_pointwise(spins in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 0..300)) {
            let bits = spins_to_bits(&AnnealSample::new(spins.clone(), 0)).unwrap();
            prop_assert_eq!(bits.len(), spins.len());
            for (i, &s) in spins.iter().enumerate() {
                prop_assert_eq!(bits.bit(i), s == 1);
            }
            prop_assert_eq!(bits.count_ones() as usize, spins.iter().filter(|&&s| s == 1).count());
        }
    }
}
