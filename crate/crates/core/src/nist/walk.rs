use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::BitSequence;
use crate::stats::{erfc, igamc, normal_cdf};

pub const EXCURSION_STATES: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];
pub const VARIANT_STATES: [i64; 18] = [-9, -8, -7, -6, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 8, 9];
pub const MIN_CYCLES: u64 = 500;

const NEAR: i64 = 9;

/// Per-byte step summary: net displacement and the extremes of the eight
/// prefix sums.
#[derive(Clone, Copy)]
struct ByteStep {
    delta: i8,
    lo: i8,
    hi: i8,
}

const BYTE_STEPS: [ByteStep; 256] = {
    let mut t = [ByteStep { delta: 0, lo: 0, hi: 0 }; 256];
    let mut b = 0;
    while b < 256 {
        let mut s: i8 = 0;
        let mut lo = i8::MAX;
        let mut hi = i8::MIN;
        let mut k = 0;
        while k < 8 {
            s += if (b >> (7 - k)) & 1 == 1 { 1 } else { -1 };
            if s < lo {
                lo = s;
            }
            if s > hi {
                hi = s;
            }
            k += 1;
        }
        t[b] = ByteStep { delta: s, lo, hi };
        b += 1;
    }
    t
};

/// Everything the three walk tests need, from a single pass over the
/// partial sums `S_0 = 0, S_1, ..., S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct WalkSummary {
    n: usize,
    last: i64,
    min: i64,
    max: i64,
    cycles: u64,
    /// `visits[i][k]`: cycles visiting `EXCURSION_STATES[i]` exactly `k`
    /// times, with `k = 5` meaning five or more.
    visits: [[u64; 6]; 8],
    /// Total visits to `VARIANT_STATES[i]`.
    totals: [u64; 18],
}

struct Walker {
    s: i64,
    min: i64,
    max: i64,
    cycles: u64,
    in_cycle: [u32; 8],
    visits: [[u64; 6]; 8],
    near: [u64; 2 * NEAR as usize + 1],
}

impl Walker {
    fn new() -> Self {
        Walker {
            s: 0,
            min: 0,
            max: 0,
            cycles: 0,
            in_cycle: [0; 8],
            visits: [[0; 6]; 8],
            near: [0; 2 * NEAR as usize + 1],
        }
    }

    fn close_cycle(&mut self) {
        self.cycles += 1;
        for (row, c) in self.visits.iter_mut().zip(self.in_cycle.iter_mut()) {
            row[(*c).min(5) as usize] += 1;
            *c = 0;
        }
    }

    #[inline]
    fn step(&mut self, one: bool) {
        self.s += if one { 1 } else { -1 };
        let s = self.s;
        self.min = self.min.min(s);
        self.max = self.max.max(s);
        if s == 0 {
            self.close_cycle();
        } else if s.abs() <= NEAR {
            self.near[(s + NEAR) as usize] += 1;
            if s.abs() <= 4 {
                let i = if s < 0 { s + 4 } else { s + 3 };
                self.in_cycle[i as usize] += 1;
            }
        }
    }

    fn run(seq: &BitSequence) -> WalkSummary {
        let mut w = Walker::new();
        let n = seq.len();
        let bytes = seq.as_bytes();
        for &byte in &bytes[..n / 8] {
            let st = BYTE_STEPS[byte as usize];
            let (lo, hi) = (w.s + st.lo as i64, w.s + st.hi as i64);
            if lo > NEAR || hi < -NEAR {
                w.min = w.min.min(lo);
                w.max = w.max.max(hi);
                w.s += st.delta as i64;
            } else {
                for k in (0..8).rev() {
                    w.step((byte >> k) & 1 == 1);
                }
            }
        }
        for i in n / 8 * 8..n {
            w.step(seq.bit(i));
        }
        if w.s != 0 {
            w.close_cycle();
        }
        let mut totals = [0u64; 18];
        for (t, &x) in totals.iter_mut().zip(VARIANT_STATES.iter()) {
            *t = w.near[(x + NEAR) as usize];
        }
        WalkSummary {
            n,
            last: w.s,
            min: w.min,
            max: w.max,
            cycles: w.cycles,
            visits: w.visits,
            totals,
        }
    }
}

/// The standard's two-sided series for the maximal excursion `z` of an
/// `n`-step walk.
fn cusum_p(n: usize, z: u64) -> f64 {
    let n = n as i64;
    let z = z as i64;
    let sq = (n as f64).sqrt();
    let zf = z as f64;
    // Terms beyond this many multiples of sqrt(n)/z are zero in f64.
    let reach = (10.0 * sq / zf) as i64 + 2;
    let clamp = |a: i64, b: i64| (a.max(-reach), b.min(reach));
    let term = |k: i64, a: i64, b: i64| normal_cdf((4 * k + a) as f64 * zf / sq) - normal_cdf((4 * k + b) as f64 * zf / sq);
    let (a0, a1) = clamp((-n / z + 1) / 4, (n / z - 1) / 4);
    let (b0, b1) = clamp((-n / z - 3) / 4, (n / z - 1) / 4);
    let s1: f64 = (a0..=a1).map(|k| term(k, 1, -1)).sum();
    let s2: f64 = (b0..=b1).map(|k| term(k, 3, 1)).sum();
    1.0 - s1 + s2
}

pub fn cumulative_sums(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let n = seq.len();
    let mut r = ResultBuilder::new(TestKind::CumulativeSums, cfg, n);
    if n == 0 {
        return r.too_short(1);
    }
    let w = Walker::run(seq);
    let z_fwd = w.max.max(-w.min) as u64;
    let z_bwd = (w.last - w.min).max(w.max - w.last) as u64;
    r.stat("z_forward", z_fwd as f64).stat("z_backward", z_bwd as f64);
    r.finish(&[cusum_p(n, z_fwd), cusum_p(n, z_bwd)])
}

/// Visit-count category probabilities for state `x`, `k = 0..=5`.
fn excursion_pi(x: i64) -> [f64; 6] {
    let ax = x.unsigned_abs() as f64;
    let q = 1.0 - 1.0 / (2.0 * ax);
    let mut pi = [0.0; 6];
    pi[0] = q;
    for (k, slot) in pi.iter_mut().enumerate().take(5).skip(1) {
        *slot = q.powi(k as i32 - 1) / (4.0 * ax * ax);
    }
    pi[5] = q.powi(4) / (2.0 * ax);
    pi
}

fn check_cycles(r: &mut ResultBuilder, w: &WalkSummary) -> bool {
    r.stat("cycles", w.cycles as f64);
    w.cycles >= MIN_CYCLES
}

pub fn random_excursions(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let mut r = ResultBuilder::new(TestKind::RandomExcursions, cfg, seq.len());
    let w = Walker::run(seq);
    if !check_cycles(&mut r, &w) {
        return r.not_applicable(format!("{} cycles, at least {MIN_CYCLES} required", w.cycles));
    }
    let j = w.cycles as f64;
    let mut ps = Vec::with_capacity(8);
    for (&x, nu) in EXCURSION_STATES.iter().zip(w.visits.iter()) {
        let chi2: f64 = nu
            .iter()
            .zip(excursion_pi(x))
            .map(|(&v, p)| (v as f64 - j * p).powi(2) / (j * p))
            .sum();
        r.stat(&format!("chi2[x={x}]"), chi2);
        ps.push(igamc(2.5, chi2 / 2.0));
    }
    r.finish(&ps)
}

pub fn random_excursions_variant(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let mut r = ResultBuilder::new(TestKind::RandomExcursionsVariant, cfg, seq.len());
    let w = Walker::run(seq);
    if !check_cycles(&mut r, &w) {
        return r.not_applicable(format!("{} cycles, at least {MIN_CYCLES} required", w.cycles));
    }
    let j = w.cycles as f64;
    let mut ps = Vec::with_capacity(18);
    for (&x, &xi) in VARIANT_STATES.iter().zip(w.totals.iter()) {
        r.stat(&format!("visits[x={x}]"), xi as f64);
        let denom = (2.0 * j * (4.0 * x.unsigned_abs() as f64 - 2.0)).sqrt();
        ps.push(erfc((xi as f64 - j).abs() / denom));
    }
    r.finish(&ps)
}
