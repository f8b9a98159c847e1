use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::{read_bits, BitSequence};
use crate::stats::{igamc, rank_32};

const MATRIX_BITS: usize = 32 * 32;
const MIN_MATRICES: usize = 38;
/// Probabilities of full rank, rank 31 and rank at most 30.
const PI: [f64; 3] = [0.2888, 0.5776, 0.1336];

pub fn binary_matrix_rank(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let mut r = ResultBuilder::new(TestKind::BinaryMatrixRank, cfg, n);
    r.param("rows", 32).param("cols", 32);
    let matrices = n / MATRIX_BITS;
    if matrices < MIN_MATRICES {
        return r.too_short((MIN_MATRICES * MATRIX_BITS) as u64);
    }
    let bytes = seq.as_bytes();
    let mut counts = [0u64; 3];
    for k in 0..matrices {
        let base = k * MATRIX_BITS;
        let rows: [u32; 32] = std::array::from_fn(|i| read_bits(bytes, base + 32 * i, 32) as u32);
        let class = match rank_32(rows) {
            32 => 0,
            31 => 1,
            _ => 2,
        };
        counts[class] += 1;
    }
    let nf = matrices as f64;
    let chi2: f64 = counts
        .iter()
        .zip(PI)
        .map(|(&c, p)| (c as f64 - p * nf).powi(2) / (p * nf))
        .sum();
    let p = igamc(1.0, chi2 / 2.0);
    r.param("matrices", nf)
        .stat("full_rank", counts[0] as f64)
        .stat("rank_31", counts[1] as f64)
        .stat("lower_rank", counts[2] as f64)
        .stat("chi2", chi2);
    r.finish(&[p])
}
