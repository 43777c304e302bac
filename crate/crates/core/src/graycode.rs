//! Fixed-width Gray-code conversions. Bit index 0 is the most significant position.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Widest string accepted by the integer conversions.
pub const MAX_WIDTH: usize = 63;

/// Ordered bit sequence, most significant bit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Domain("bit string width must be positive".into()));
        }
        Ok(Self { bits })
    }

    /// Plain binary representation of `value` on `width` bits.
    pub fn from_binary(value: u64, width: usize) -> Result<Self> {
        check_width(width)?;
        if value >> width != 0 {
            return Err(Error::Domain(format!("{value} does not fit in {width} bits")));
        }
        let bits = (0..width).map(|j| (value >> (width - 1 - j)) & 1 == 1).collect();
        Ok(Self { bits })
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Interprets the bits as a plain binary number.
    pub fn to_binary(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::Domain(format!("width must lie in 1..={MAX_WIDTH}, got {width}")));
    }
    Ok(())
}

/// Gray code of `m` as an integer (`G_k = B_k xor B_{k-1}`).
pub fn gray_value(m: u64) -> u64 {
    m ^ (m >> 1)
}

/// Inverse of [`gray_value`].
pub fn gray_inverse(mut g: u64) -> u64 {
    let mut m = 0;
    while g != 0 {
        m ^= g;
        g >>= 1;
    }
    m
}

/// Gray code of `m` on a register of `width` bits.
pub fn to_gray(m: u64, width: usize) -> Result<BitString> {
    check_width(width)?;
    if m >> width != 0 {
        return Err(Error::Domain(format!("{m} >= 2^{width}")));
    }
    BitString::from_binary(gray_value(m), width)
}

/// Integer whose Gray code is `g`.
pub fn from_gray(g: &BitString) -> u64 {
    let mut acc = false;
    let mut m = 0u64;
    for &b in g.bits() {
        acc ^= b;
        m = (m << 1) | acc as u64;
    }
    m
}

/// Index of the single bit in which the Gray codes of `n` and `n + 1` differ.
pub fn differing_position(n: u64, width: usize) -> Result<usize> {
    check_width(width)?;
    if n.checked_add(1).is_none_or(|next| next >> width != 0) {
        return Err(Error::Domain(format!("{n} + 1 >= 2^{width}")));
    }
    let diff = gray_value(n) ^ gray_value(n + 1);
    Ok(width - 1 - diff.trailing_zeros() as usize)
}

/// Number of qubits needed to store occupations `0..=capacity`.
pub fn qubits_for_capacity(capacity: u32) -> usize {
    let levels = capacity as u64 + 1;
    (u64::BITS - (levels - 1).leading_zeros()).max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        assert_eq!(to_gray(0, 2).unwrap().to_string(), "00");
        assert_eq!(to_gray(2, 2).unwrap().to_string(), "11");
        assert_eq!(to_gray(3, 2).unwrap().to_string(), "10");
        assert_eq!(from_gray(&"00".parse().unwrap()), 0);
        assert_eq!(from_gray(&"11".parse().unwrap()), 2);
        assert_eq!(from_gray(&"10".parse().unwrap()), 3);
        assert_eq!(differing_position(0, 2).unwrap(), 1);
        assert_eq!(differing_position(1, 2).unwrap(), 0);
        assert_eq!(differing_position(0, 1).unwrap(), 0);
    }

    #[test]
    fn domain_errors() {
        assert!(to_gray(4, 2).is_err());
        assert!(to_gray(0, 0).is_err());
        assert!(differing_position(3, 2).is_err());
        assert!(differing_position(1, 1).is_err());
        assert!("012".parse::<BitString>().is_err());
        assert!("".parse::<BitString>().is_err());
    }

    #[test]
    fn width_is_kept() {
        let g = to_gray(1, 5).unwrap();
        assert_eq!(g.to_string(), "00001");
        assert_eq!(g.width(), 5);
    }

    #[test]
    fn integer_helpers() {
        for m in 0..1024 {
            assert_eq!(gray_inverse(gray_value(m)), m);
        }
        assert_eq!(qubits_for_capacity(1), 1);
        assert_eq!(qubits_for_capacity(2), 2);
        assert_eq!(qubits_for_capacity(3), 2);
        assert_eq!(qubits_for_capacity(4), 3);
        assert_eq!(qubits_for_capacity(7), 3);
        assert_eq!(qubits_for_capacity(8), 4);
    }
}
