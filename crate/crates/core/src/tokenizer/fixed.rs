//! Fixed-width grouping: each `k` binary digits become one integer token.

use super::TokenizerError;

pub const MAX_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedWidth {
    k: usize,
}

impl FixedWidth {
    pub fn new(k: usize) -> Self {
        assert!((1..=MAX_WIDTH).contains(&k), "group width must be in 1..={MAX_WIDTH}");
        Self { k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vocab_size(&self) -> usize {
        1 << self.k
    }

    pub fn tokens_for(&self, len: usize) -> usize {
        len.div_ceil(self.k)
    }

    /// Left-pads `bits` with zeros to a multiple of `k`, then reads each group
    /// as a big-endian integer.
    pub fn encode(&self, bits: &[u8]) -> Vec<u32> {
        let pad = self.tokens_for(bits.len()) * self.k - bits.len();
        let padded: Vec<u8> = std::iter::repeat_n(0, pad).chain(bits.iter().copied()).collect();
        padded
            .chunks(self.k)
            .map(|group| group.iter().fold(0u32, |acc, &b| acc << 1 | b as u32))
            .collect()
    }

    /// Inverse of [`FixedWidth::encode`] for an original length of `len` bits.
    pub fn decode(&self, tokens: &[u32], len: usize) -> Result<Vec<u8>, TokenizerError> {
        if tokens.len() != self.tokens_for(len) {
            return Err(TokenizerError::Length {
                expected: self.tokens_for(len),
                got: tokens.len(),
            });
        }
        let mut bits = Vec::with_capacity(tokens.len() * self.k);
        for &t in tokens {
            if t as usize >= self.vocab_size() {
                return Err(TokenizerError::UnknownToken(t));
            }
            bits.extend((0..self.k).rev().map(|i| (t >> i & 1) as u8));
        }
        let pad = bits.len() - len;
        if bits[..pad].iter().any(|&b| b != 0) {
            return Err(TokenizerError::RowStructure("nonzero padding".into()));
        }
        Ok(bits.split_off(pad))
    }
}
