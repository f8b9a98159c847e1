use super::scan::for_each_window;
use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::{read_bits, BitSequence};
use crate::stats::igamc;

/// All `m`-bit templates with no proper border (no prefix that is also a
/// suffix), ascending. These are the templates that cannot overlap
/// themselves; there are 148 of them for `m = 9`.
pub fn aperiodic_templates(m: u32) -> Vec<u32> {
    (0..1u32 << m)
        .filter(|&t| (1..m).all(|len| (t >> (m - len)) != t & ((1 << len) - 1)))
        .collect()
}

fn template_string(t: u32, m: u32) -> String {
    (0..m).rev().map(|i| if (t >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Scans each of `N` blocks for every aperiodic template at once.
///
/// Because an aperiodic template cannot overlap itself, its non-overlapping
/// scan count equals its number of occurrences, so a single histogram of
/// `m`-bit windows per block serves all templates.
///
/// The headline p-value is the smallest template p-value after a Sidak
/// adjustment for the number of templates, `1 - (1 - p_min)^T`; the raw
/// minimum and every template's p-value are reported alongside.
pub fn non_overlapping_template(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let m = cfg.non_overlapping_m;
    let blocks = cfg.non_overlapping_blocks as usize;
    let mut r = ResultBuilder::new(TestKind::NonOverlappingTemplate, cfg, n);
    r.param("m", m).param("blocks", blocks as f64);
    // Each block must expect at least one occurrence of a template, or the
    // chi-square approximation collapses.
    let min_block = (1usize << m) + m as usize - 1;
    let block_len = n / blocks;
    if block_len < min_block {
        return r.too_short((blocks * min_block) as u64);
    }
    r.param("block_len", block_len as f64);
    let templates = aperiodic_templates(m);
    let mf = block_len as f64;
    let two_m = (1u64 << m) as f64;
    let mu = (mf - m as f64 + 1.0) / two_m;
    let var = mf * (1.0 / two_m - (2.0 * m as f64 - 1.0) / (two_m * two_m));
    let mut hists = vec![vec![0u64; 1 << m]; blocks];
    for (j, hist) in hists.iter_mut().enumerate() {
        for_each_window(seq, j * block_len, (j + 1) * block_len, m, |w| hist[w as usize] += 1);
    }
    let mut p_min = 1.0f64;
    let mut chi2_at_min = 0.0;
    for &t in &templates {
        let chi2: f64 = hists.iter().map(|h| (h[t as usize] as f64 - mu).powi(2) / var).sum();
        let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
        if p < p_min {
            p_min = p;
            chi2_at_min = chi2;
        }
        r.detail(template_string(t, m), p);
    }
    let count = templates.len() as f64;
    let adjusted = -(count * (-p_min).ln_1p()).exp_m1();
    r.param("templates", count)
        .stat("mu", mu)
        .stat("sigma2", var)
        .stat("p_min", p_min)
        .stat("chi2_at_min", chi2_at_min);
    r.finish(&[adjusted])
}

/// Category probabilities for `K = 5` with the standard's constants at
/// `m = 9, M = 1032` and the series approximation elsewhere.
fn overlapping_pi(m: u32, block: u64) -> [f64; 6] {
    if m == 9 && block == 1032 {
        return [0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865];
    }
    let lambda = (block - m as u64 + 1) as f64 / (1u64 << m) as f64;
    let eta = lambda / 2.0;
    let lg = libm::lgamma;
    let pr = |u: u32| -> f64 {
        if u == 0 {
            return (-eta).exp();
        }
        let uf = u as f64;
        (1..=u)
            .map(|l| {
                let lf = l as f64;
                (-eta - uf * std::f64::consts::LN_2 + lf * eta.ln() - lg(lf + 1.0) + lg(uf) - lg(lf) - lg(uf - lf + 1.0))
                    .exp()
            })
            .sum()
    };
    let mut pi = [0.0; 6];
    for (u, slot) in pi.iter_mut().enumerate().take(5) {
        *slot = pr(u as u32);
    }
    pi[5] = 1.0 - pi[..5].iter().sum::<f64>();
    pi
}

pub const OVERLAPPING_MIN_BITS: u64 = 1_000_000;

pub fn overlapping_template(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let m = cfg.overlapping_m;
    let block = cfg.overlapping_block;
    let mut r = ResultBuilder::new(TestKind::OverlappingTemplate, cfg, n);
    r.param("m", m).param("block_len", block as f64).param("k", 5);
    let min_bits = OVERLAPPING_MIN_BITS.max(block);
    if (n as u64) < min_bits {
        return r.too_short(min_bits);
    }
    let blocks = n / block as usize;
    let bytes = seq.as_bytes();
    let mut nu = [0u64; 6];
    for j in 0..blocks {
        let start = j * block as usize;
        let end = start + block as usize;
        let mut run = 0u32;
        let mut hits = 0u32;
        let mut pos = start;
        while pos < end {
            let take = (end - pos).min(64);
            let chunk = read_bits(bytes, pos, take as u32);
            for k in (0..take).rev() {
                if (chunk >> k) & 1 == 1 {
                    run += 1;
                    if run >= m {
                        hits += 1;
                    }
                } else {
                    run = 0;
                }
            }
            pos += take;
        }
        nu[hits.min(5) as usize] += 1;
    }
    let pi = overlapping_pi(m, block);
    let nf = blocks as f64;
    let chi2: f64 = nu.iter().zip(pi).map(|(&v, p)| (v as f64 - nf * p).powi(2) / (nf * p)).sum();
    let p = igamc(2.5, chi2 / 2.0);
    r.param("blocks", nf);
    for (i, &c) in nu.iter().enumerate() {
        r.stat(&format!("nu{i}"), c as f64);
    }
    r.stat("chi2", chi2);
    r.finish(&[p])
}
