use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::{read_bits, BitSequence};
use crate::stats::erfc;

/// Smallest input length for each block length `L = 6..=16`.
const L_THRESHOLDS: [u64; 11] = [
    387_840,
    904_960,
    2_068_480,
    4_654_080,
    10_342_400,
    22_753_280,
    49_643_520,
    107_560_960,
    231_669_760,
    496_435_200,
    1_059_061_760,
];

/// Expected value and variance of the statistic for `L = 6..=16`.
const EXPECTED: [f64; 11] = [
    5.2177052, 6.1962507, 7.1836656, 8.1764248, 9.1723243, 10.170032, 11.168765, 12.168070, 13.167693, 14.167488,
    15.167379,
];
const VARIANCE: [f64; 11] = [2.954, 3.125, 3.238, 3.311, 3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421];

fn block_length_for(n: u64) -> Option<u32> {
    L_THRESHOLDS.iter().rposition(|&t| n >= t).map(|i| i as u32 + 6)
}

pub fn maurers_universal(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let mut r = ResultBuilder::new(TestKind::MaurersUniversal, cfg, n);
    let l = match cfg.universal_l.or_else(|| block_length_for(n as u64)) {
        Some(l) => l,
        None => return r.too_short(L_THRESHOLDS[0]),
    };
    let q = 10usize << l;
    let total_blocks = n / l as usize;
    r.param("l", l).param("q", q as f64);
    if total_blocks <= q {
        return r.too_short((q as u64 + 1) * l as u64);
    }
    let k = total_blocks - q;
    let bytes = seq.as_bytes();
    // Last position (1-based) at which each L-bit value was seen.
    let mut last = vec![0u32; 1 << l];
    let lu = l as usize;
    for i in 1..=q {
        last[read_bits(bytes, (i - 1) * lu, l) as usize] = i as u32;
    }
    let mut sum = 0.0;
    for i in q + 1..=q + k {
        let v = read_bits(bytes, (i - 1) * lu, l) as usize;
        sum += ((i as u32 - last[v]) as f64).log2();
        last[v] = i as u32;
    }
    let kf = k as f64;
    let fn_stat = sum / kf;
    let idx = (l - 6) as usize;
    let lf = l as f64;
    let c = 0.7 - 0.8 / lf + (4.0 + 32.0 / lf) * kf.powf(-3.0 / lf) / 15.0;
    let sigma = c * (VARIANCE[idx] / kf).sqrt();
    let p = erfc((fn_stat - EXPECTED[idx]).abs() / (std::f64::consts::SQRT_2 * sigma));
    r.param("k", kf)
        .stat("fn", fn_stat)
        .stat("expected", EXPECTED[idx])
        .stat("sigma", sigma);
    r.finish(&[p])
}
