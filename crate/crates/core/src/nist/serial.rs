use super::scan::{cyclic_histogram, marginalize};
use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::igamc;

/// `n * psi^2_m = 2^m * sum(count^2) - n^2`, exact.
fn n_psi2(hist: &[u64], n: u64) -> i128 {
    if hist.len() <= 1 {
        return 0;
    }
    let sq: i128 = hist.iter().map(|&c| (c as i128) * (c as i128)).sum();
    hist.len() as i128 * sq - (n as i128) * (n as i128)
}

pub fn serial(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let m = cfg.serial_m;
    let mut r = ResultBuilder::new(TestKind::Serial, cfg, n);
    r.param("m", m);
    let min_bits = 1u64 << m;
    if (n as u64) < min_bits {
        return r.too_short(min_bits);
    }
    let h_m = cyclic_histogram(seq, m);
    let h_m1 = marginalize(&h_m);
    let h_m2 = marginalize(&h_m1);
    let nn = n as u64;
    let (a, b, c) = (n_psi2(&h_m, nn), n_psi2(&h_m1, nn), if m >= 2 { n_psi2(&h_m2, nn) } else { 0 });
    let nf = n as f64;
    let del1 = (a - b) as f64 / nf;
    let del2 = ((a - 2 * b + c) as f64 / nf).max(0.0);
    let p1 = igamc(2f64.powi(m as i32 - 2), del1 / 2.0);
    let p2 = igamc(2f64.powi(m as i32 - 3), del2 / 2.0);
    r.stat("psi2_m", a as f64 / nf)
        .stat("psi2_m1", b as f64 / nf)
        .stat("psi2_m2", c as f64 / nf)
        .stat("del1", del1)
        .stat("del2", del2);
    r.finish(&[p1, p2])
}

pub fn approximate_entropy(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let m = cfg.approximate_entropy_m;
    let mut r = ResultBuilder::new(TestKind::ApproximateEntropy, cfg, n);
    r.param("m", m);
    let min_bits = 1u64 << m;
    if (n as u64) < min_bits {
        return r.too_short(min_bits);
    }
    let upper = cyclic_histogram(seq, m + 1);
    // chi^2 = 2n(ln 2 - ApEn) summed per prefix as
    // 2 * sum_x sum_b C_xb ln(2 C_xb / C_x), which avoids cancelling two
    // quantities of order n ln n.
    let mut chi2 = 0.0;
    for pair in upper.chunks_exact(2) {
        let cx = (pair[0] + pair[1]) as f64;
        for &c in pair {
            if c > 0 {
                chi2 += 2.0 * c as f64 * (2.0 * c as f64 / cx).ln();
            }
        }
    }
    let chi2 = chi2.max(0.0);
    let nf = n as f64;
    let apen = std::f64::consts::LN_2 - chi2 / (2.0 * nf);
    let p = igamc(2f64.powi(m as i32 - 1), chi2 / 2.0);
    r.stat("apen", apen).stat("chi2", chi2);
    r.finish(&[p])
}
