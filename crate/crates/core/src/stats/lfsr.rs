use super::StatsError;
use crate::bitstream::{read_bits, BitSequence};

/// Length of the shortest linear feedback shift register that generates
/// `block` (bits given as `0`/`1` bytes).
pub fn berlekamp_massey(block: &[u8]) -> Result<usize, StatsError> {
    if block.is_empty() {
        return Err(StatsError::EmptyBlock);
    }
    let mut synth = LfsrSynth::default();
    synth.load_bits(block);
    Ok(synth.run())
}

/// Bit-packed Berlekamp-Massey with reusable buffers.
///
/// The block is held reversed in LSB-first words so the discrepancy at step
/// `N` is the parity of `C & window(rev, n - 1 - N)`.
#[derive(Debug, Default)]
pub(crate) struct LfsrSynth {
    rev: Vec<u64>,
    c: Vec<u64>,
    b: Vec<u64>,
    t: Vec<u64>,
    n: usize,
}

impl LfsrSynth {
    fn reset(&mut self, n: usize) {
        // One spare word keeps unaligned window reads in bounds.
        let words = n.div_ceil(64) + 2;
        self.n = n;
        for v in [&mut self.rev, &mut self.c, &mut self.b, &mut self.t] {
            v.clear();
            v.resize(words, 0);
        }
    }

    pub(crate) fn load_bits(&mut self, bits: &[u8]) {
        let n = bits.len();
        self.reset(n);
        for (j, &bit) in bits.iter().rev().enumerate() {
            if bit != 0 {
                self.rev[j / 64] |= 1 << (j % 64);
            }
        }
    }

    /// Loads bits `offset..offset + len` of `seq`.
    pub(crate) fn load_block(&mut self, seq: &BitSequence, offset: usize, len: usize) {
        self.reset(len);
        let bytes = seq.as_bytes();
        let mut w = 0;
        let mut end = len;
        while end > 0 {
            let width = end.min(64);
            // An MSB-first read ending at `end` lands the last bit in bit 0,
            // which is exactly the reversed LSB-first layout.
            self.rev[w] = read_bits(bytes, offset + end - width, width as u32);
            end -= width;
            w += 1;
        }
    }

    #[inline]
    fn window(&self, offset: usize) -> u64 {
        let q = offset / 64;
        let s = offset % 64;
        if s == 0 {
            self.rev[q]
        } else {
            (self.rev[q] >> s) | (self.rev[q + 1] << (64 - s))
        }
    }

    pub(crate) fn run(&mut self) -> usize {
        let n = self.n;
        let words = self.c.len();
        self.c[0] = 1;
        self.b[0] = 1;
        let mut l = 0usize;
        let mut m: isize = -1;
        for big_n in 0..n {
            let base = n - 1 - big_n;
            let mut acc = 0u64;
            let active = l / 64 + 1;
            for k in 0..active {
                let off = base + 64 * k;
                if off >= n {
                    break;
                }
                acc ^= self.c[k] & self.window(off);
            }
            if acc.count_ones() & 1 == 0 {
                continue;
            }
            let grow = 2 * l <= big_n;
            if grow {
                self.t[..words].copy_from_slice(&self.c[..words]);
            }
            let shift = (big_n as isize - m) as usize;
            let (ws, bs) = (shift / 64, shift % 64);
            // deg B never exceeds the current L.
            let b_words = (l / 64 + 1).min(words);
            for k in 0..b_words {
                let v = self.b[k];
                if v == 0 {
                    continue;
                }
                if k + ws < words {
                    self.c[k + ws] ^= v << bs;
                }
                if bs != 0 && k + ws + 1 < words {
                    self.c[k + ws + 1] ^= v >> (64 - bs);
                }
            }
            if grow {
                l = big_n + 1 - l;
                m = big_n as isize;
                std::mem::swap(&mut self.b, &mut self.t);
            }
        }
        l
    }
}
