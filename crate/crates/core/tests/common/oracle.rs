//! Direct-definition implementations of the fifteen tests at the default
//! suite parameters. They work on one byte per bit, scan naively and take
//! their special functions from statrs, so they share no code with the
//! library beyond the test enumeration.

use std::collections::HashMap;

use qrng_audit::TestKind;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn chi2(observed: &[u64], pi: &[f64], total: f64) -> f64 {
    observed
        .iter()
        .zip(pi)
        .map(|(&o, &p)| (o as f64 - total * p).powi(2) / (total * p))
        .sum()
}

/// P-values of `kind` on `bits`, or `None` when the test does not apply.
pub fn p_values(kind: TestKind, bits: &[u8]) -> Option<Vec<f64>> {
    match kind {
        TestKind::Monobit => monobit(bits),
        TestKind::BlockFrequency => block_frequency(bits),
        TestKind::Runs => runs(bits),
        TestKind::LongestRunInBlock => longest_run(bits),
        TestKind::BinaryMatrixRank => rank(bits),
        TestKind::SpectralDft => spectral(bits),
        TestKind::NonOverlappingTemplate => non_overlapping(bits),
        TestKind::OverlappingTemplate => overlapping(bits),
        TestKind::MaurersUniversal => universal(bits),
        TestKind::LinearComplexity => linear_complexity(bits),
        TestKind::Serial => serial(bits, 16),
        TestKind::ApproximateEntropy => approximate_entropy(bits, 10),
        TestKind::CumulativeSums => cusum(bits),
        TestKind::RandomExcursions => excursions(bits),
        TestKind::RandomExcursionsVariant => excursions_variant(bits),
    }
}

fn ones(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count()
}

fn monobit(bits: &[u8]) -> Option<Vec<f64>> {
    let n = bits.len();
    if n == 0 {
        return None;
    }
    let s: i64 = bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).sum();
    Some(vec![erfc(s.abs() as f64 / (n as f64).sqrt() / std::f64::consts::SQRT_2)])
}

fn block_frequency(bits: &[u8]) -> Option<Vec<f64>> {
    let n = bits.len();
    let m = if n > 100_000_000 { 131_072 } else { ((n as f64 * 0.02).ceil() as usize).clamp(20, 131_072) };
    let blocks = n / m;
    if blocks == 0 {
        return None;
    }
    let stat: f64 = bits
        .chunks_exact(m)
        .take(blocks)
        .map(|b| {
            let pi = ones(b) as f64 / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    Some(vec![igamc(blocks as f64 / 2.0, stat / 2.0)])
}

fn runs(bits: &[u8]) -> Option<Vec<f64>> {
    let n = bits.len() as f64;
    if bits.is_empty() {
        return None;
    }
    let pi = ones(bits) as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return None;
    }
    let v = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    let den = 2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi);
    Some(vec![erfc(num / den)])
}

fn longest_run(bits: &[u8]) -> Option<Vec<f64>> {
    let n = bits.len();
    let (m, lo, pi): (usize, usize, &[f64]) = if n < 128 {
        return None;
    } else if n < 6272 {
        (8, 1, &[0.2148, 0.3672, 0.2305, 0.1875])
    } else if n < 750_000 {
        (128, 4, &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124])
    } else {
        (10_000, 10, &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727])
    };
    let k = pi.len() - 1;
    let mut nu = vec![0u64; k + 1];
    let blocks = n / m;
    for block in bits.chunks_exact(m).take(blocks) {
        let mut best = 0usize;
        let mut cur = 0usize;
        for &b in block {
            cur = if b == 1 { cur + 1 } else { 0 };
            best = best.max(cur);
        }
        nu[best.saturating_sub(lo).min(k)] += 1;
    }
    Some(vec![igamc(k as f64 / 2.0, chi2(&nu, pi, blocks as f64) / 2.0)])
}

fn gf2_rank(mut rows: Vec<Vec<u8>>) -> usize {
    let cols = rows[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] == 1 {
                for j in 0..cols {
                    rows[r][j] ^= rows[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

fn rank(bits: &[u8]) -> Option<Vec<f64>> {
    let matrices = bits.len() / 1024;
    if matrices < 38 {
        return None;
    }
    let mut nu = [0u64; 3];
    for mat in bits.chunks_exact(1024).take(matrices) {
        let rows = mat.chunks_exact(32).map(|r| r.to_vec()).collect();
        match gf2_rank(rows) {
            32 => nu[0] += 1,
            31 => nu[1] += 1,
            _ => nu[2] += 1,
        }
    }
    let stat = chi2(&nu, &[0.2888, 0.5776, 0.1336], matrices as f64);
    Some(vec![(-stat / 2.0).exp()])
}

fn spectral(bits: &[u8]) -> Option<Vec<f64>> {
    let n = bits.len().min(1 << 30) & !1;
    if n < 10 {
        return None;
    }
    let mut x: Vec<Complex<f64>> = bits[..n]
        .iter()
        .map(|&b| Complex::new(if b == 1 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut x);
    let t = (n as f64 * (1.0f64 / 0.05).ln()).sqrt();
    let n1 = x[..n / 2].iter().filter(|c| c.norm() < t).count() as f64;
    let n0 = 0.95 * n as f64 / 2.0;
    let d = (n1 - n0) / (n as f64 * 0.95 * 0.05 / 4.0).sqrt();
    Some(vec![erfc(d.abs() / std::f64::consts::SQRT_2)])
}

/// Templates of length `m` that cannot overlap a shifted copy of themselves.
pub fn aperiodic(m: usize) -> Vec<Vec<u8>> {
    (0..1u32 << m)
        .map(|v| (0..m).map(|i| ((v >> (m - 1 - i)) & 1) as u8).collect::<Vec<u8>>())
        .filter(|t| (1..m).all(|s| t[s..] != t[..m - s]))
        .collect()
}

fn non_overlapping(bits: &[u8]) -> Option<Vec<f64>> {
    let (m, blocks) = (9usize, 8usize);
    let big_m = bits.len() / blocks;
    if big_m < (1 << m) + m - 1 {
        return None;
    }
    let two_m = (1u64 << m) as f64;
    let mu = (big_m - m + 1) as f64 / two_m;
    let var = big_m as f64 * (1.0 / two_m - (2 * m - 1) as f64 / (two_m * two_m));
    let templates = aperiodic(m);
    let mut p_min = 1.0f64;
    for t in &templates {
        let mut stat = 0.0;
        for block in bits.chunks_exact(big_m).take(blocks) {
            let mut w = 0u64;
            let mut i = 0;
            while i + m <= big_m {
                if block[i..i + m] == t[..] {
                    w += 1;
                    i += m;
                } else {
                    i += 1;
                }
            }
            stat += (w as f64 - mu).powi(2) / var;
        }
        p_min = p_min.min(igamc(blocks as f64 / 2.0, stat / 2.0));
    }
    Some(vec![1.0 - (1.0 - p_min).powi(templates.len() as i32)])
}

fn overlapping(bits: &[u8]) -> Option<Vec<f64>> {
    let (m, big_m) = (9usize, 1032usize);
    if bits.len() < 1_000_000 {
        return None;
    }
    let blocks = bits.len() / big_m;
    let mut nu = [0u64; 6];
    for block in bits.chunks_exact(big_m).take(blocks) {
        let hits = (0..=big_m - m).filter(|&i| block[i..i + m].iter().all(|&b| b == 1)).count();
        nu[hits.min(5)] += 1;
    }
    let pi = [0.364091, 0.185659, 0.139381, 0.100571, 0.070432, 0.139865];
    Some(vec![igamc(2.5, chi2(&nu, &pi, blocks as f64) / 2.0)])
}

fn universal(bits: &[u8]) -> Option<Vec<f64>> {
    let n = bits.len();
    let table: [(usize, usize, f64, f64); 11] = [
        (387_840, 6, 5.2177052, 2.954),
        (904_960, 7, 6.1962507, 3.125),
        (2_068_480, 8, 7.1836656, 3.238),
        (4_654_080, 9, 8.1764248, 3.311),
        (10_342_400, 10, 9.1723243, 3.356),
        (22_753_280, 11, 10.170032, 3.384),
        (49_643_520, 12, 11.168765, 3.401),
        (107_560_960, 13, 12.168070, 3.410),
        (231_669_760, 14, 13.167693, 3.416),
        (496_435_200, 15, 14.167488, 3.419),
        (1_059_061_760, 16, 15.167379, 3.421),
    ];
    let &(_, l, expected, variance) = table.iter().rev().find(|row| n >= row.0)?;
    let q = 10 * (1usize << l);
    let total = n / l;
    let k = total - q;
    let word = |i: usize| bits[i * l..(i + 1) * l].iter().fold(0u32, |a, &b| (a << 1) | b as u32);
    let mut last: HashMap<u32, usize> = HashMap::new();
    for i in 0..q {
        last.insert(word(i), i + 1);
    }
    let mut sum = 0.0;
    for i in q..q + k {
        let w = word(i);
        let prev = last.get(&w).copied().unwrap_or(0);
        sum += ((i + 1 - prev) as f64).log2();
        last.insert(w, i + 1);
    }
    let kf = k as f64;
    let lf = l as f64;
    let f = sum / kf;
    let c = 0.7 - 0.8 / lf + (4.0 + 32.0 / lf) * kf.powf(-3.0 / lf) / 15.0;
    let sigma = c * (variance / kf).sqrt();
    Some(vec![erfc((f - expected).abs() / (std::f64::consts::SQRT_2 * sigma))])
}

/// Shortest LFSR generating `s`.
pub fn berlekamp_massey(s: &[u8]) -> usize {
    let n = s.len();
    let mut c = vec![0u8; n + 1];
    let mut b = vec![0u8; n + 1];
    c[0] = 1;
    b[0] = 1;
    let (mut l, mut m) = (0usize, -1i64);
    for i in 0..n {
        let mut d = s[i];
        for j in 1..=l {
            d ^= c[j] & s[i - j];
        }
        if d == 1 {
            let t = c.clone();
            let shift = (i as i64 - m) as usize;
            for j in 0..=n - shift {
                c[j + shift] ^= b[j];
            }
            if 2 * l <= i {
                l = i + 1 - l;
                m = i as i64;
                b = t;
            }
        }
    }
    l
}

fn linear_complexity(bits: &[u8]) -> Option<Vec<f64>> {
    let m = 500usize;
    let blocks = bits.len() / m;
    if blocks < 200 {
        return None;
    }
    let mf = m as f64;
    let mu = mf / 2.0 + (9.0 + (-1.0f64).powi(m as i32 + 1)) / 36.0 - (mf / 3.0 + 2.0 / 9.0) / 2f64.powi(m as i32);
    let mut nu = [0u64; 7];
    for block in bits.chunks_exact(m).take(blocks) {
        let l = berlekamp_massey(block) as f64;
        let t = (-1.0f64).powi(m as i32) * (l - mu) + 2.0 / 9.0;
        let cat = if t <= -2.5 {
            0
        } else if t <= -1.5 {
            1
        } else if t <= -0.5 {
            2
        } else if t <= 0.5 {
            3
        } else if t <= 1.5 {
            4
        } else if t <= 2.5 {
            5
        } else {
            6
        };
        nu[cat] += 1;
    }
    let pi = [0.010417, 0.03125, 0.125, 0.5, 0.25, 0.0625, 0.020833];
    Some(vec![igamc(3.0, chi2(&nu, &pi, blocks as f64) / 2.0)])
}

/// Counts of every cyclic `m`-bit pattern.
fn cyclic_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let n = bits.len();
    let mut counts = vec![0u64; 1 << m];
    for i in 0..n {
        let v = (0..m).fold(0usize, |a, j| (a << 1) | bits[(i + j) % n] as usize);
        counts[v] += 1;
    }
    counts
}

fn psi2(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = cyclic_counts(bits, m).iter().map(|&c| (c * c) as f64).sum();
    (1u64 << m) as f64 / n * sum - n
}

fn serial(bits: &[u8], m: usize) -> Option<Vec<f64>> {
    if bits.len() < 1 << m {
        return None;
    }
    let (a, b, c) = (psi2(bits, m), psi2(bits, m - 1), psi2(bits, m - 2));
    let d1 = a - b;
    let d2 = (a - 2.0 * b + c).max(0.0);
    Some(vec![
        igamc((1u64 << (m - 2)) as f64, d1 / 2.0),
        igamc((1u64 << (m - 3)) as f64, d2 / 2.0),
    ])
}

fn approximate_entropy(bits: &[u8], m: usize) -> Option<Vec<f64>> {
    let n = bits.len();
    if n < 1 << m {
        return None;
    }
    let phi_m = |k: usize| -> f64 {
        cyclic_counts(bits, k)
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n as f64;
                p * p.ln()
            })
            .sum()
    };
    let apen = phi_m(m) - phi_m(m + 1);
    let stat = 2.0 * n as f64 * (2f64.ln() - apen);
    Some(vec![igamc((1u64 << (m - 1)) as f64, stat / 2.0)])
}

fn cusum_p(n: usize, z: i64) -> f64 {
    let nf = n as f64;
    let zf = z as f64;
    let sq = nf.sqrt();
    // Summation bounds use truncating integer division, as in the
    // standard's worked example.
    let (ni, zi) = (n as i64, z);
    let lo1 = (-ni / zi + 1) / 4;
    let hi1 = (ni / zi - 1) / 4;
    let lo2 = (-ni / zi - 3) / 4;
    let mut p = 1.0;
    for k in lo1..=hi1 {
        let kf = k as f64;
        p -= phi((4.0 * kf + 1.0) * zf / sq) - phi((4.0 * kf - 1.0) * zf / sq);
    }
    for k in lo2..=hi1 {
        let kf = k as f64;
        p += phi((4.0 * kf + 3.0) * zf / sq) - phi((4.0 * kf + 1.0) * zf / sq);
    }
    p
}

fn cusum(bits: &[u8]) -> Option<Vec<f64>> {
    if bits.is_empty() {
        return None;
    }
    let walk = |it: &mut dyn Iterator<Item = &u8>| -> i64 {
        let mut s = 0i64;
        let mut z = 0i64;
        for &b in it {
            s += if b == 1 { 1 } else { -1 };
            z = z.max(s.abs());
        }
        z
    };
    let forward = walk(&mut bits.iter());
    let backward = walk(&mut bits.iter().rev());
    Some(vec![cusum_p(bits.len(), forward), cusum_p(bits.len(), backward)])
}

fn partial_sums(bits: &[u8]) -> Vec<i64> {
    let mut s = 0i64;
    bits.iter()
        .map(|&b| {
            s += if b == 1 { 1 } else { -1 };
            s
        })
        .collect()
}

/// The walk cut into cycles; each cycle ends at a return to zero or at the
/// end of the sequence.
fn cycles(sums: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for &s in sums {
        cur.push(s);
        if s == 0 {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn excursions(bits: &[u8]) -> Option<Vec<f64>> {
    let sums = partial_sums(bits);
    let cyc = cycles(&sums);
    let j = cyc.len();
    if j < 500 {
        return None;
    }
    let mut ps = Vec::new();
    for x in [-4i64, -3, -2, -1, 1, 2, 3, 4] {
        let mut nu = [0u64; 6];
        for c in &cyc {
            nu[c.iter().filter(|&&s| s == x).count().min(5)] += 1;
        }
        let ax = x.abs() as f64;
        let mut pi = [0.0; 6];
        pi[0] = 1.0 - 1.0 / (2.0 * ax);
        for (k, p) in pi.iter_mut().enumerate().take(5).skip(1) {
            *p = 1.0 / (4.0 * ax * ax) * (1.0 - 1.0 / (2.0 * ax)).powi(k as i32 - 1);
        }
        pi[5] = 1.0 / (2.0 * ax) * (1.0 - 1.0 / (2.0 * ax)).powi(4);
        ps.push(igamc(2.5, chi2(&nu, &pi, j as f64) / 2.0));
    }
    Some(ps)
}

fn excursions_variant(bits: &[u8]) -> Option<Vec<f64>> {
    let sums = partial_sums(bits);
    let j = cycles(&sums).len() as f64;
    if j < 500.0 {
        return None;
    }
    let ps = (-9i64..=9)
        .filter(|&x| x != 0)
        .map(|x| {
            let xi = sums.iter().filter(|&&s| s == x).count() as f64;
            erfc((xi - j).abs() / (2.0 * j * (4.0 * x.abs() as f64 - 2.0)).sqrt())
        })
        .collect();
    Some(ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn aperiodic_count() {
        assert_eq!(aperiodic(9).len(), 148);
    }

    #[test]
    fn known_values() {
        let p = monobit(&bits("1011010101")).unwrap()[0];
        assert!((p - 0.527089).abs() < 1e-6);
        let p = runs(&bits("1001101011")).unwrap()[0];
        assert!((p - 0.147232).abs() < 1e-6);
        assert_eq!(berlekamp_massey(&bits("1101011110001")), 4);
        let p = cusum(&bits("1011010111")).unwrap()[0];
        assert!((p - 0.411658).abs() < 1e-6);
    }
}
