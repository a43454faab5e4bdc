use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Ordered bit sequence used for raw, sifted, corrected and final keys.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self { bits: (0..len).map(|_| rng.gen::<bool>() as u8).collect() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.bits[i] = bit & 1;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    pub fn push(&mut self, bit: u8) {
        self.bits.push(bit & 1);
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    /// XOR of the bits at `positions`.
    pub fn parity_of(&self, positions: &[usize]) -> u8 {
        positions.iter().fold(0, |acc, &p| acc ^ self.bits[p])
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }

    /// Positions where the two strings differ.
    pub fn diff_positions(&self, other: &BitString) -> Vec<usize> {
        self.bits.iter().zip(&other.bits).enumerate().filter_map(|(i, (a, b))| (a != b).then_some(i)).collect()
    }

    /// Packs bits into little-endian `u64` words (bit `i` lands in word
    /// `i / 64` at position `i % 64`).
    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.bits.len().div_ceil(64)];
        for (i, &b) in self.bits.iter().enumerate() {
            words[i / 64] |= (b as u64) << (i % 64);
        }
        words
    }
}

impl From<Vec<u8>> for BitString {
    fn from(bits: Vec<u8>) -> Self {
        Self { bits: bits.into_iter().map(|b| b & 1).collect() }
    }
}

impl FromIterator<u8> for BitString {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self { bits: iter.into_iter().map(|b| b & 1).collect() }
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses `'0'`/`'1'` characters, ignoring whitespace.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self::from)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let b: BitString = "1101 0".parse().unwrap();
        assert_eq!(b.len(), 5);
        assert_eq!(b.to_string(), "11010");
        assert!("10x".parse::<BitString>().is_err());
    }

    #[test]
    fn parity_and_distance() {
        let a: BitString = "110111001".parse().unwrap();
        let b: BitString = "010001001".parse().unwrap();
        assert_eq!(a.hamming_distance(&b), 3);
        assert_eq!(a.diff_positions(&b), vec![0, 3, 4]);
        assert_eq!(a.parity_of(&[0, 1, 2]), 0);
        assert_eq!(a.parity_of(&[0, 1, 3]), 1);
    }

    #[test]
    fn word_packing() {
        let mut b = BitString::zeros(130);
        b.set(0, 1);
        b.set(65, 1);
        b.set(129, 1);
        assert_eq!(b.to_words(), vec![1, 2, 2]);
    }
}
