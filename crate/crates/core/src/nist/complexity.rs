use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::{igamc, LfsrSynth};

const PI: [f64; 7] = [0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833];
pub const MIN_BLOCKS: u64 = 200;

/// Category of the centered complexity `T`; upper bounds are inclusive.
fn category(t: f64) -> usize {
    const BOUNDS: [f64; 6] = [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5];
    BOUNDS.iter().position(|&b| t <= b).unwrap_or(6)
}

pub fn linear_complexity(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let m = cfg.linear_complexity_m as usize;
    let mut r = ResultBuilder::new(TestKind::LinearComplexity, cfg, n);
    r.param("m", m as f64).param("k", 6);
    let blocks = n / m;
    if (blocks as u64) < MIN_BLOCKS {
        return r.too_short(MIN_BLOCKS * m as u64);
    }
    let mf = m as f64;
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mu = mf / 2.0 + (9.0 - sign) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powi(m as i32);
    let mut nu = [0u64; 7];
    let mut synth = LfsrSynth::default();
    for b in 0..blocks {
        synth.load_block(seq, b * m, m);
        let l = synth.run() as f64;
        nu[category(sign * (l - mu) + 2.0 / 9.0)] += 1;
    }
    let nf = blocks as f64;
    let chi2: f64 = nu.iter().zip(PI).map(|(&v, p)| (v as f64 - nf * p).powi(2) / (nf * p)).sum();
    let p = igamc(3.0, chi2 / 2.0);
    r.param("blocks", nf).stat("mu", mu);
    for (i, &c) in nu.iter().enumerate() {
        r.stat(&format!("nu{i}"), c as f64);
    }
    r.stat("chi2", chi2);
    r.finish(&[p])
}
