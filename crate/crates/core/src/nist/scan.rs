//! Sliding-window passes over packed bits.

use crate::bitstream::{read_bits, BitSequence};

/// Calls `f` with the `m`-bit value starting at every position `p` with
/// `start <= p` and `p + m <= end`, in order. `m` must be in `1..=32`.
#[inline]
pub(crate) fn for_each_window<F: FnMut(u32)>(seq: &BitSequence, start: usize, end: usize, m: u32, mut f: F) {
    debug_assert!((1..=32).contains(&m));
    if end < start + m as usize {
        return;
    }
    let bytes = seq.as_bytes();
    let mask = if m == 32 { u32::MAX as u64 } else { (1u64 << m) - 1 };
    let mut reg = read_bits(bytes, start, m - 1);
    let mut pos = start + m as usize - 1;
    while pos < end {
        let take = (end - pos).min(64);
        let chunk = read_bits(bytes, pos, take as u32);
        for k in (0..take).rev() {
            reg = (reg << 1) | ((chunk >> k) & 1);
            f((reg & mask) as u32);
        }
        pos += take;
    }
}

/// Histogram of all `n` cyclic `m`-bit patterns of `seq`, where windows
/// near the end wrap around to the start.
pub(crate) fn cyclic_histogram(seq: &BitSequence, m: u32) -> Vec<u64> {
    let n = seq.len();
    let mut hist = vec![0u64; 1 << m];
    let m = m as usize;
    let first_wrapped = if m <= n {
        for_each_window(seq, 0, n, m as u32, |w| hist[w as usize] += 1);
        n - m + 1
    } else {
        0
    };
    // The remaining windows run past the end and continue from bit 0.
    for p in first_wrapped..n {
        let v = (0..m).fold(0usize, |v, j| (v << 1) | seq.bit((p + j) % n) as usize);
        hist[v] += 1;
    }
    hist
}

/// Sums a histogram over its lowest bit: counts of `(m - 1)`-bit patterns
/// from counts of `m`-bit patterns. Exact for cyclic histograms.
pub(crate) fn marginalize(hist: &[u64]) -> Vec<u64> {
    hist.chunks_exact(2).map(|p| p[0] + p[1]).collect()
}
