use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::{count_ones_range, BitSequence};
use crate::stats::{erfc, igamc};

pub fn monobit(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let mut r = ResultBuilder::new(TestKind::Monobit, cfg, n);
    if n == 0 {
        return r.too_short(1);
    }
    let ones = seq.count_ones() as i64;
    let s = 2 * ones - n as i64;
    let s_obs = (s.unsigned_abs() as f64) / (n as f64).sqrt();
    let p = erfc(s_obs / std::f64::consts::SQRT_2);
    r.stat("sum", s as f64).stat("s_obs", s_obs);
    r.finish(&[p])
}

/// Block length used when the config leaves it unset.
pub(crate) fn default_block_frequency_m(n: usize) -> u64 {
    const CAP: u64 = 131_072;
    if n > 100_000_000 {
        CAP
    } else {
        (((n as u64) * 2).div_ceil(100)).max(20).min(CAP)
    }
}

pub fn block_frequency(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let m = cfg.block_frequency_m.unwrap_or_else(|| default_block_frequency_m(n));
    let mut r = ResultBuilder::new(TestKind::BlockFrequency, cfg, n);
    r.param("m", m as f64);
    let blocks = n as u64 / m;
    if blocks == 0 {
        return r.too_short(m);
    }
    let m_us = m as usize;
    let half = m as f64 / 2.0;
    // 4M * sum (pi - 1/2)^2 written as (4/M) * sum (ones - M/2)^2.
    let mut acc = 0.0;
    for b in 0..blocks as usize {
        let ones = count_ones_range(seq.as_bytes(), b * m_us, (b + 1) * m_us) as f64;
        acc += (ones - half) * (ones - half);
    }
    let chi2 = 4.0 * acc / m as f64;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    r.param("blocks", blocks as f64).stat("chi2", chi2);
    r.finish(&[p])
}

pub fn runs(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let mut r = ResultBuilder::new(TestKind::Runs, cfg, n);
    if n == 0 {
        return r.too_short(1);
    }
    let nf = n as f64;
    let pi = seq.count_ones() as f64 / nf;
    let tau = 2.0 / nf.sqrt();
    r.stat("pi", pi).param("tau", tau);
    if (pi - 0.5).abs() >= tau {
        return r.not_applicable(format!("frequency prerequisite failed: |pi - 1/2| = {} >= {tau}", (pi - 0.5).abs()));
    }
    let v = 1 + transitions(seq);
    let q = pi * (1.0 - pi);
    let p = erfc((v as f64 - 2.0 * nf * q).abs() / (2.0 * (2.0 * nf).sqrt() * q));
    r.stat("runs", v as f64);
    r.finish(&[p])
}

/// Number of positions `k` with `bit(k) != bit(k + 1)`.
fn transitions(seq: &BitSequence) -> u64 {
    let bytes = seq.as_bytes();
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mut total = 0u64;
    let mut pos = 0usize;
    // Each step compares 63 adjacent pairs from a 64-bit window.
    while pos + 1 < n {
        let width = (n - pos).min(64) as u32;
        let w = crate::bitstream::read_bits(bytes, pos, width) << (64 - width);
        let pairs = width - 1;
        let diff = (w ^ (w << 1)) >> (64 - pairs);
        total += diff.count_ones() as u64;
        pos += pairs as usize;
    }
    total
}

struct LongestRunTable {
    m: usize,
    /// Longest-run value of the lowest and highest category.
    lo: u32,
    hi: u32,
    pi: &'static [f64],
}

const LONGEST_RUN_8: LongestRunTable = LongestRunTable {
    m: 8,
    lo: 1,
    hi: 4,
    pi: &[0.2148, 0.3672, 0.2305, 0.1875],
};
const LONGEST_RUN_128: LongestRunTable = LongestRunTable {
    m: 128,
    lo: 4,
    hi: 9,
    pi: &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124],
};
const LONGEST_RUN_10K: LongestRunTable = LongestRunTable {
    m: 10_000,
    lo: 10,
    hi: 16,
    pi: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

/// Per-byte run structure: leading ones, trailing ones, longest run inside.
const fn byte_runs() -> [(u8, u8, u8); 256] {
    let mut t = [(0u8, 0u8, 0u8); 256];
    let mut b = 0;
    while b < 256 {
        let v = b as u8;
        let lead = v.leading_ones() as u8;
        let trail = v.trailing_ones() as u8;
        let mut best = 0u8;
        let mut cur = 0u8;
        let mut i = 0;
        while i < 8 {
            if v & (0x80 >> i) != 0 {
                cur += 1;
                if cur > best {
                    best = cur;
                }
            } else {
                cur = 0;
            }
            i += 1;
        }
        t[b] = (lead, trail, best);
        b += 1;
    }
    t
}

static BYTE_RUNS: [(u8, u8, u8); 256] = byte_runs();

/// Longest run of ones in a byte-aligned block.
fn longest_run_bytes(block: &[u8]) -> u32 {
    let mut best = 0u32;
    let mut cur = 0u32;
    for &b in block {
        if b == 0xFF {
            cur += 8;
            continue;
        }
        let (lead, trail, inner) = BYTE_RUNS[b as usize];
        best = best.max(cur + lead as u32).max(inner as u32);
        cur = trail as u32;
    }
    best.max(cur)
}

pub fn longest_run_in_block(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let mut r = ResultBuilder::new(TestKind::LongestRunInBlock, cfg, n);
    let table = match n {
        0..128 => return r.too_short(128),
        128..6272 => &LONGEST_RUN_8,
        6272..750_000 => &LONGEST_RUN_128,
        _ => &LONGEST_RUN_10K,
    };
    let blocks = n / table.m;
    let k = table.pi.len() - 1;
    let mut nu = vec![0u64; table.pi.len()];
    // Every block length is a whole number of bytes.
    let block_bytes = table.m / 8;
    for block in seq.as_bytes()[..blocks * block_bytes].chunks_exact(block_bytes) {
        let v = longest_run_bytes(block).clamp(table.lo, table.hi);
        nu[(v - table.lo) as usize] += 1;
    }
    let nf = blocks as f64;
    let chi2: f64 = nu
        .iter()
        .zip(table.pi)
        .map(|(&o, &p)| (o as f64 - nf * p).powi(2) / (nf * p))
        .sum();
    let p = igamc(k as f64 / 2.0, chi2 / 2.0);
    r.param("m", table.m as f64).param("k", k as f64).param("blocks", nf);
    for (i, &c) in nu.iter().enumerate() {
        r.stat(&format!("nu{i}"), c as f64);
    }
    r.stat("chi2", chi2);
    r.finish(&[p])
}
