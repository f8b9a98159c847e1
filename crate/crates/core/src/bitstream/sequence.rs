use std::fmt;
use std::str::FromStr;

use super::BitstreamError;

/// An immutable sequence of bits, packed most-significant-bit first.
///
/// Pad bits in the final byte are always zero, so two sequences are equal
/// exactly when their bit contents are equal.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitSequence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Wraps an already packed buffer. Fails unless the buffer holds exactly
    /// `ceil(bit_len / 8)` bytes with zero padding.
    pub fn from_packed(bytes: Vec<u8>, bit_len: usize) -> Result<Self, BitstreamError> {
        let expected = bit_len.div_ceil(8);
        if bytes.len() != expected {
            return Err(BitstreamError::CorruptStream(format!(
                "{} bytes cannot hold exactly {bit_len} bits (expected {expected} bytes)",
                bytes.len()
            )));
        }
        let pad = expected * 8 - bit_len;
        if pad > 0 {
            let last = bytes[expected - 1];
            if last & ((1u8 << pad) - 1) != 0 {
                return Err(BitstreamError::CorruptStream(
                    "non-zero pad bits in final byte".into(),
                ));
            }
        }
        Ok(Self { bytes, bit_len })
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut builder = BitSequenceBuilder::new();
        for bit in bits {
            builder.push(bit);
        }
        builder.finish()
    }

    /// Builds a sequence from a slice of `0`/`1` values; any non-zero byte is a one.
    pub fn from_bit_values(bits: &[u8]) -> Self {
        Self::from_bits(bits.iter().map(|&b| b != 0))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bit_len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    #[inline]
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Returns bit `index`. Panics when out of range.
    #[inline]
    pub fn bit(&self, index: usize) -> bool {
        assert!(index < self.bit_len, "bit index {index} out of range");
        self.bytes[index >> 3] & (0x80 >> (index & 7)) != 0
    }

    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.bit_len).then(|| self.bit(index))
    }

    pub fn iter(&self) -> Bits<'_> {
        Bits { seq: self, pos: 0 }
    }

    pub fn count_ones(&self) -> u64 {
        count_ones_bytes(&self.bytes)
    }

    /// Number of ones among bits `start..end`.
    pub fn count_ones_range(&self, start: usize, end: usize) -> u64 {
        assert!(start <= end && end <= self.bit_len, "bad range {start}..{end}");
        count_ones_range(&self.bytes, start, end)
    }

    /// Reads `width <= 64` bits starting at `offset` as an integer whose most
    /// significant bit is the first bit read.
    #[inline]
    pub fn read_bits(&self, offset: usize, width: u32) -> u64 {
        assert!(width <= 64 && offset + width as usize <= self.bit_len);
        read_bits(&self.bytes, offset, width)
    }

    /// The first `n` bits (or all of them when `n >= len`).
    pub fn prefix(&self, n: usize) -> BitSequence {
        let n = n.min(self.bit_len);
        let mut bytes = self.bytes[..n.div_ceil(8)].to_vec();
        let pad = bytes.len() * 8 - n;
        if pad > 0 {
            let last = bytes.len() - 1;
            bytes[last] &= !((1u8 << pad) - 1);
        }
        BitSequence { bytes, bit_len: n }
    }

    /// The sequence read back to front.
    pub fn reversed(&self) -> BitSequence {
        let mut builder = BitSequenceBuilder::with_capacity(self.bit_len);
        for i in (0..self.bit_len).rev() {
            builder.push(self.bit(i));
        }
        builder.finish()
    }

    /// Copies bits into `0`/`1` bytes; mainly useful for small sequences.
    pub fn to_bit_values(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bit_len <= 128 {
            write!(f, "BitSequence(\"{self}\")")
        } else {
            write!(f, "BitSequence({} bits)", self.bit_len)
        }
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitSequence {
    type Err = BitstreamError;

    /// Parses a string of `0` and `1` characters; ASCII whitespace is ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut builder = BitSequenceBuilder::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => builder.push(false),
                '1' => builder.push(true),
                c if c.is_ascii_whitespace() => {}
                other => {
                    return Err(BitstreamError::Parse {
                        row: 1,
                        column: i + 1,
                        message: format!("invalid bit character {other:?}"),
                    })
                }
            }
        }
        Ok(builder.finish())
    }
}

impl FromIterator<bool> for BitSequence {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self::from_bits(iter)
    }
}

pub struct Bits<'a> {
    seq: &'a BitSequence,
    pos: usize,
}

impl Iterator for Bits<'_> {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        if self.pos < self.seq.bit_len {
            let bit = self.seq.bytes[self.pos >> 3] & (0x80 >> (self.pos & 7)) != 0;
            self.pos += 1;
            Some(bit)
        } else {
            None
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.seq.bit_len - self.pos;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for Bits<'_> {}

/// Append-only builder; the only way to grow a [`BitSequence`].
#[derive(Debug, Default, Clone)]
pub struct BitSequenceBuilder {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitSequenceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            bytes: Vec::with_capacity(bits.div_ceil(8)),
            bit_len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let shift = self.bit_len & 7;
        if shift == 0 {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> shift;
        }
        self.bit_len += 1;
    }

    /// Appends bits given as `0`/`1` bytes.
    pub fn push_bit_values(&mut self, bits: &[u8]) {
        let mut rest = bits;
        while self.bit_len & 7 != 0 {
            match rest.split_first() {
                Some((&b, tail)) => {
                    self.push(b != 0);
                    rest = tail;
                }
                None => return,
            }
        }
        let mut chunks = rest.chunks_exact(8);
        for chunk in &mut chunks {
            let mut byte = 0u8;
            for &b in chunk {
                byte = (byte << 1) | u8::from(b != 0);
            }
            self.bytes.push(byte);
        }
        self.bit_len += (rest.len() / 8) * 8;
        for &b in chunks.remainder() {
            self.push(b != 0);
        }
    }

    /// Appends the contents of `seq`.
    pub fn extend_from(&mut self, seq: &BitSequence) {
        if seq.is_empty() {
            return;
        }
        let shift = self.bit_len & 7;
        if shift == 0 {
            self.bytes.extend_from_slice(&seq.bytes);
        } else {
            let last = self.bytes.len() - 1;
            let mut carry = self.bytes[last];
            self.bytes.truncate(last);
            self.bytes.reserve(seq.bytes.len() + 1);
            for &b in &seq.bytes {
                self.bytes.push(carry | (b >> shift));
                carry = b << (8 - shift);
            }
            self.bytes.push(carry);
        }
        self.bit_len += seq.bit_len;
        self.bytes.truncate(self.bit_len.div_ceil(8));
    }

    pub fn finish(self) -> BitSequence {
        BitSequence {
            bytes: self.bytes,
            bit_len: self.bit_len,
        }
    }
}

pub(crate) fn count_ones_bytes(bytes: &[u8]) -> u64 {
    let mut chunks = bytes.chunks_exact(8);
    let mut total: u64 = 0;
    for chunk in &mut chunks {
        total += u64::from_ne_bytes(chunk.try_into().unwrap()).count_ones() as u64;
    }
    total + chunks.remainder().iter().map(|b| b.count_ones() as u64).sum::<u64>()
}

pub(crate) fn count_ones_range(bytes: &[u8], start: usize, end: usize) -> u64 {
    if start >= end {
        return 0;
    }
    let first = start >> 3;
    let last = (end - 1) >> 3;
    let head_mask = 0xFFu8 >> (start & 7);
    let tail_mask = 0xFFu8 << (7 - ((end - 1) & 7));
    if first == last {
        return (bytes[first] & head_mask & tail_mask).count_ones() as u64;
    }
    (bytes[first] & head_mask).count_ones() as u64
        + count_ones_bytes(&bytes[first + 1..last])
        + (bytes[last] & tail_mask).count_ones() as u64
}

/// MSB-first read of `width` bits at `offset`; bits past the buffer read as zero.
#[inline]
pub(crate) fn read_bits(bytes: &[u8], offset: usize, width: u32) -> u64 {
    if width == 0 {
        return 0;
    }
    let byte = offset >> 3;
    let shift = (offset & 7) as u32;
    // Nine bytes cover any 64-bit window at any alignment.
    let mut buf = [0u8; 16];
    let avail = bytes.len().saturating_sub(byte).min(9);
    buf[..avail].copy_from_slice(&bytes[byte..byte + avail]);
    let hi = u64::from_be_bytes(buf[..8].try_into().unwrap());
    let window = if shift == 0 {
        hi
    } else {
        (hi << shift) | (buf[8] as u64 >> (8 - shift))
    };
    window >> (64 - width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_bits(s: &BitSequence) -> Vec<bool> {
        (0..s.len()).map(|i| s.bit(i)).collect()
    }

    #[test]
    fn packing_is_msb_first() {
        let s: BitSequence = "10110".parse().unwrap();
        assert_eq!(s.as_bytes(), &[0xB0]);
        assert_eq!(s.len(), 5);
        assert_eq!(s.to_string(), "10110");
    }

    #[test]
    fn from_packed_rejects_dirty_padding() {
        assert!(BitSequence::from_packed(vec![0xB1], 5).is_err());
        assert!(BitSequence::from_packed(vec![0xB0, 0x00], 5).is_err());
        assert!(BitSequence::from_packed(vec![0xB0], 5).is_ok());
        assert!(BitSequence::from_packed(vec![], 0).is_ok());
    }

    #[test]
    fn read_bits_matches_naive() {
        let s: BitSequence = "1100101011110000101".parse().unwrap();
        assert_eq!(s.read_bits(0, 4), 0b1100);
        assert_eq!(s.read_bits(3, 5), 0b01010);
        assert_eq!(s.read_bits(10, 9), 0b110000101);
    }

    #[test]
    fn reversed_and_prefix() {
        let s: BitSequence = "1101000".parse().unwrap();
        assert_eq!(s.reversed().to_string(), "0001011");
        assert_eq!(s.prefix(3).to_string(), "110");
        assert_eq!(s.prefix(3).as_bytes(), &[0xC0]);
        assert_eq!(s.prefix(100), s);
    }

    proptest! {
        #[test]
        fn extend_matches_bitwise_append(a in proptest::collection::vec(any::<bool>(), 0..80),
                                         b in proptest::collection::vec(any::<bool>(), 0..80)) {
            let sa = BitSequence::from_bits(a.iter().copied());
            let sb = BitSequence::from_bits(b.iter().copied());
            let mut builder = BitSequenceBuilder::new();
            builder.extend_from(&sa);
            builder.extend_from(&sb);
            let joined = builder.finish();
            let expected: Vec<bool> = a.iter().chain(b.iter()).copied().collect();
            prop_assert_eq!(naive_bits(&joined), expected.clone());
            prop_assert_eq!(joined, BitSequence::from_bits(expected));
        }

        #[test]
        fn range_popcount_matches_naive(bits in proptest::collection::vec(any::<bool>(), 1..200),
                                        a in 0usize..200, b in 0usize..200) {
            let s = BitSequence::from_bits(bits.iter().copied());
            let (lo, hi) = (a.min(b).min(bits.len()), a.max(b).min(bits.len()));
            let expected = bits[lo..hi].iter().filter(|&&x| x).count() as u64;
            prop_assert_eq!(s.count_ones_range(lo, hi), expected);
        }

        #[test]
        fn push_bit_values_matches_push(prefix in 0usize..9, bits in proptest::collection::vec(0u8..2, 0..100)) {
            let mut fast = BitSequenceBuilder::new();
            let mut slow = BitSequenceBuilder::new();
            for _ in 0..prefix { fast.push(true); slow.push(true); }
            fast.push_bit_values(&bits);
            for &b in &bits { slow.push(b == 1); }
            prop_assert_eq!(fast.finish(), slow.finish());
        }
    }
}
