use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{ResultBuilder, SuiteConfig, TestKind, TestResult};
use crate::bitstream::{read_bits, BitSequence};
use crate::stats::erfc;

pub const MIN_BITS: usize = 10;
/// Longest input transformed in one piece; longer prefixes use the
/// four-step decomposition.
const IN_MEMORY_MAX: usize = 1 << 24;
const MIN_SPLIT: usize = 1024;

type C64 = Complex<f64>;

/// `T^2 = n ln 20`.
fn threshold_sq(n: usize) -> f64 {
    n as f64 * 20f64.ln()
}

/// `exp(-2 pi i m / n)`.
#[inline]
fn root(m: u64, n: usize) -> C64 {
    let ang = -2.0 * std::f64::consts::PI * ((m % n as u64) as f64 / n as f64);
    let (s, c) = ang.sin_cos();
    C64::new(c, s)
}

#[inline]
fn sign(w: u64, width: usize, i: usize) -> f64 {
    if (w >> (width - 1 - i)) & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `N_1` for the first `n` bits with a single transform of length `n/2`
/// over even/odd pairs.
fn count_in_memory(seq: &BitSequence, n: usize) -> u64 {
    let h = n / 2;
    let bytes = seq.as_bytes();
    let mut z: Vec<C64> = Vec::with_capacity(h);
    let mut pos = 0;
    while pos < n {
        let take = (n - pos).min(64);
        let w = read_bits(bytes, pos, take as u32);
        for i in (0..take).step_by(2) {
            z.push(C64::new(sign(w, take, i), sign(w, take, i + 1)));
        }
        pos += take;
    }
    FftPlanner::new().plan_fft_forward(h).process(&mut z);
    let t2 = threshold_sq(n);
    let half_i = C64::new(0.0, -0.5);
    (0..h)
        .filter(|&k| {
            let zk = z[k];
            let zm = z[(h - k) % h].conj();
            let even = (zk + zm) * 0.5;
            let odd = (zk - zm) * half_i;
            (even + root(k as u64, n) * odd).norm_sqr() < t2
        })
        .count() as u64
}

/// Largest divisor of `n` in `[min, sqrt(n)]`. When there is none, `n` is
/// shortened to a multiple of `2 * min`, which always has one.
fn choose_split(n: usize, min: usize) -> (usize, usize) {
    let root = (n as f64).sqrt() as usize;
    if let Some(d) = (min..=root).rev().find(|d| n % d == 0) {
        return (n, d);
    }
    let m = n - n % (2 * min);
    let root = (m as f64).sqrt() as usize;
    let d = (min..=root).rev().find(|d| m % d == 0).unwrap_or(min);
    (m, d)
}

/// `N_1` for the first `n = n1 * n2` bits without holding the whole
/// spectrum.
///
/// With `j = n2 a + b` and `k = c + n1 d` the transform factors into
/// length-`n1` transforms down each column `b`, a twiddle by
/// `w_n^(bc)`, and length-`n2` transforms along each row `c`. Only rows
/// `c <= n1/2` are formed: the others are mirror images by conjugate
/// symmetry. Rows are produced in batches that fit `budget` bytes, and the
/// column transforms are recomputed for every batch.
fn count_four_step(seq: &BitSequence, n: usize, n1: usize, budget: u64) -> u64 {
    const GROUP: usize = 64;
    let n2 = n / n1;
    debug_assert_eq!(n1 * n2, n);
    let bytes = seq.as_bytes();
    let mut planner = FftPlanner::<f64>::new();
    let col_fft = planner.plan_fft_forward(n1);
    let row_fft = planner.plan_fft_forward(n2);
    let zero = C64::new(0.0, 0.0);
    let mut cols = vec![zero; GROUP / 2 * n1];
    let mut col_scratch = vec![zero; col_fft.get_inplace_scratch_len()];
    let mut row_scratch = vec![zero; row_fft.get_inplace_scratch_len()];

    let rows = n1 / 2 + 1;
    let fixed = ((cols.len() + col_scratch.len() + row_scratch.len()) * 16) as u64;
    let per_batch = ((budget.saturating_sub(fixed) / (n2 as u64 * 16)) as usize).clamp(1, rows);
    let mut grid = vec![zero; per_batch * n2];

    let t2 = threshold_sq(n);
    let half = (n / 2) as u64;
    let half_i = C64::new(0.0, -0.5);
    let mut count = 0u64;
    let mut c0 = 0;
    while c0 < rows {
        let c1 = (c0 + per_batch).min(rows);
        for b0 in (0..n2).step_by(GROUP) {
            let g = (n2 - b0).min(GROUP);
            let pairs = g.div_ceil(2);
            for a in 0..n1 {
                let w = read_bits(bytes, n2 * a + b0, g as u32);
                for p in 0..pairs {
                    let im = if 2 * p + 1 < g { sign(w, g, 2 * p + 1) } else { 0.0 };
                    cols[p * n1 + a] = C64::new(sign(w, g, 2 * p), im);
                }
            }
            col_fft.process_with_scratch(&mut cols[..pairs * n1], &mut col_scratch);
            for p in 0..pairs {
                let z = &cols[p * n1..(p + 1) * n1];
                for (lane, b) in (b0 + 2 * p..(b0 + 2 * p + 2).min(b0 + g)).enumerate() {
                    let step = root(b as u64, n);
                    let mut tw = root((b * c0) as u64, n);
                    for c in c0..c1 {
                        if (c - c0) % 64 == 0 {
                            tw = root((b * c) as u64, n);
                        }
                        let zc = z[c];
                        let zm = z[(n1 - c) % n1].conj();
                        let y = if lane == 0 { (zc + zm) * 0.5 } else { (zc - zm) * half_i };
                        grid[(c - c0) * n2 + b] = y * tw;
                        tw *= step;
                    }
                }
            }
        }
        for c in c0..c1 {
            let row = &mut grid[(c - c0) * n2..(c - c0 + 1) * n2];
            row_fft.process_with_scratch(row, &mut row_scratch);
            let self_mirror = c == 0 || 2 * c == n1;
            for (d, x) in row.iter().enumerate() {
                let k = (c + n1 * d) as u64;
                if self_mirror && (k == 0 || k >= half) {
                    continue;
                }
                if x.norm_sqr() < t2 {
                    count += 1;
                }
            }
        }
        c0 = c1;
    }
    let x0 = 2.0 * seq.count_ones_range(0, n) as f64 - n as f64;
    count + u64::from(x0 * x0 < t2)
}

pub fn spectral_dft(seq: &BitSequence, cfg: &SuiteConfig) -> TestResult {
    let mut r = ResultBuilder::new(TestKind::SpectralDft, cfg, seq.len());
    let mut n = seq.len().min(cfg.spectral_cap_bits as usize) & !1;
    if n < MIN_BITS {
        return r.too_short(MIN_BITS as u64);
    }
    let below = if n <= IN_MEMORY_MAX {
        count_in_memory(seq, n)
    } else {
        let (m, n1) = choose_split(n, MIN_SPLIT);
        n = m;
        r.param("fft_split", n1 as f64);
        count_four_step(seq, n, n1, cfg.spectral_workspace_bytes)
    };
    if n < seq.len() {
        r.note(format!("analyzed the first {n} of {} bits", seq.len()));
    }
    let nf = n as f64;
    let expected = 0.95 * nf / 2.0;
    let d = (below as f64 - expected) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    let p = erfc(d.abs() / std::f64::consts::SQRT_2);
    r.param("analyzed_bits", nf)
        .stat("threshold", threshold_sq(n).sqrt())
        .stat("n0", expected)
        .stat("n1", below as f64)
        .stat("d", d);
    r.finish(&[p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealer::{reference_generator, ReferenceKind};

    /// O(n^2) direct summation over the +-1 sequence.
    fn direct_count(bits: &[u8]) -> u64 {
        let n = bits.len();
        let t = (n as f64 * 20f64.ln()).sqrt();
        (0..n / 2)
            .filter(|&k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, &b) in bits.iter().enumerate() {
                    let x = if b == 1 { 1.0 } else { -1.0 };
                    let ang = -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
                    re += x * ang.cos();
                    im += x * ang.sin();
                }
                (re * re + im * im).sqrt() < t
            })
            .count() as u64
    }

    fn seq(s: &str) -> BitSequence {
        s.parse().unwrap()
    }

    #[test]
    fn worked_example() {
        // Direct summation gives moduli (0, 2, 4.47, 2, 4.47) against
        // T = 5.47, so all five first-half bins fall below the threshold.
        let r = spectral_dft(&seq("1001010011"), &SuiteConfig::default());
        assert_eq!(r.statistics["n1"], 5.0);
        assert!((r.first_p().unwrap() - 0.468159909854428).abs() < 1e-12);
        let zeros = BitSequence::from_bit_values(&[0; 10]);
        let r = spectral_dft(&zeros, &SuiteConfig::default());
        assert_eq!(r.statistics["n1"], direct_count(&[0; 10]) as f64);
        assert_eq!(r.statistics["n1"], 4.0);
        assert!((r.first_p().unwrap() - 0.0295232159499379).abs() < 1e-12);
    }

    #[test]
    fn in_memory_matches_direct() {
        for (seed, n) in [(1, 10), (2, 64), (3, 998), (4, 1024), (5, 1030)] {
            let s = reference_generator(ReferenceKind::CryptoQuality, seed, n);
            assert_eq!(count_in_memory(&s, n), direct_count(&s.to_bit_values()), "n={n}");
        }
    }

    #[test]
    fn odd_length_is_truncated() {
        let s = reference_generator(ReferenceKind::CryptoQuality, 9, 2001);
        let r = spectral_dft(&s, &SuiteConfig::default());
        assert_eq!(r.params["analyzed_bits"], 2000.0);
        assert!(!spectral_dft(&seq("100101001"), &SuiteConfig::default()).applicable);
    }

    #[test]
    fn periodic_input_fails() {
        let bits: Vec<u8> = (0..1024).map(|i| u8::from(i % 4 < 2)).collect();
        let r = spectral_dft(&BitSequence::from_bit_values(&bits), &SuiteConfig::default());
        assert!(r.first_p().unwrap() < 0.01);
    }

    #[test]
    fn cap_limits_prefix() {
        let s = reference_generator(ReferenceKind::CryptoQuality, 2, 5000);
        let cfg = SuiteConfig {
            spectral_cap_bits: 1024,
            ..SuiteConfig::default()
        };
        let r = spectral_dft(&s, &cfg);
        assert_eq!(r.params["analyzed_bits"], 1024.0);
        assert_eq!(r.statistics["n1"], count_in_memory(&s.prefix(1024), 1024) as f64);
    }

    #[test]
    fn split_choice() {
        assert_eq!(choose_split(1 << 30, 1024), (1 << 30, 1 << 15));
        let (n, d) = choose_split(1_000_000_000, 1024);
        assert_eq!(n, 1_000_000_000);
        assert!(n % d == 0 && d * d <= n && d >= 1024);
        // 2 * a large prime has no usable divisor.
        let (n, d) = choose_split(2 * 16_777_259, 1024);
        assert!(n < 2 * 16_777_259 && n % 2048 == 0);
        assert!(n % d == 0 && d * d <= n && d >= 1024);
        let (n, d) = choose_split(60_750, 8);
        assert_eq!((n, d), (60_750, 243));
    }

    #[test]
    fn four_step_matches_in_memory() {
        let s = reference_generator(ReferenceKind::CryptoQuality, 17, 65_536);
        for (n, n1) in [(65_536, 256), (65_536, 64), (60_000, 240), (60_750, 250), (60_750, 243), (1_000, 10)] {
            let want = count_in_memory(&s, n);
            for budget in [1, 1 << 30] {
                assert_eq!(count_four_step(&s, n, n1, budget), want, "n={n} n1={n1} budget={budget}");
            }
        }
    }

    #[test]
    fn four_step_on_structured_input() {
        let bits: Vec<u8> = (0..40_000).map(|i| u8::from(i % 7 < 3 || i % 64 == 0)).collect();
        let s = BitSequence::from_bit_values(&bits);
        assert_eq!(count_four_step(&s, 40_000, 200, 1 << 20), count_in_memory(&s, 40_000));
        let zeros = BitSequence::from_bit_values(&vec![0; 4096]);
        assert_eq!(count_four_step(&zeros, 4096, 64, 1), count_in_memory(&zeros, 4096));
    }
}
