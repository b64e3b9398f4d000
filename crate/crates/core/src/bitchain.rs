//! Fixed-width bit chains labelling computational basis states.
//!
//! Bit 1 of a chain is the most significant one, so the chain `0101` of
//! width 4 has value 5 and labels the ket |0101⟩. The width is always
//! explicit: `0_N` (N zeroes) is distinct from `0_M` for N ≠ M.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported chain width.
pub const MAX_WIDTH: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitChain {
    width: u32,
    value: u64,
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl BitChain {
    pub fn new(width: u32, value: u64) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::InvalidChain(format!(
                "width {width} outside 1..={MAX_WIDTH}"
            )));
        }
        if value & !mask(width) != 0 {
            return Err(Error::InvalidChain(format!(
                "value {value} does not fit in {width} bits"
            )));
        }
        Ok(Self { width, value })
    }

    /// The all-zero chain `0_width`.
    pub fn zeros(width: u32) -> Result<Self> {
        Self::new(width, 0)
    }

    /// Builds a chain from bits given most-significant first.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        Self::new(bits.len() as u32, value)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Bits, most-significant first.
    pub fn to_bits(&self) -> Vec<bool> {
        (1..=self.width).map(|pos| self.bit(pos)).collect()
    }

    /// Bit at 1-based position `pos`, counted from the most-significant end.
    ///
    /// Panics if `pos` is outside `1..=width`.
    pub fn bit(&self, pos: u32) -> bool {
        assert!(
            (1..=self.width).contains(&pos),
            "bit position {pos} outside 1..={}",
            self.width
        );
        (self.value >> (self.width - pos)) & 1 == 1
    }

    /// Number of 1-bits.
    pub fn count_ones(&self) -> u32 {
        self.value.count_ones()
    }

    fn check_width(&self, other: &Self) -> Result<()> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                left: self.width,
                right: other.width,
            });
        }
        Ok(())
    }

    pub fn bitwise_and(&self, other: &Self) -> Result<Self> {
        self.check_width(other)?;
        Ok(Self {
            width: self.width,
            value: self.value & other.value,
        })
    }

    /// Per-position sum modulo 2.
    pub fn bitwise_xor(&self, other: &Self) -> Result<Self> {
        self.check_width(other)?;
        Ok(Self {
            width: self.width,
            value: self.value ^ other.value,
        })
    }

    /// 1 if the chain has an odd number of 1-bits, else 0.
    pub fn parity_of_ones(&self) -> u8 {
        (self.count_ones() & 1) as u8
    }

    /// Appends one bit on the least-significant end: `2k` or `2k + 1`.
    pub fn push_bit(&self, bit: bool) -> Result<Self> {
        Self::new(self.width + 1, (self.value << 1) | u64::from(bit))
    }

    /// Concatenation `self ‖ low`; `self` becomes the high-order part.
    pub fn concat(&self, low: &Self) -> Result<Self> {
        let width = self.width + low.width;
        if width > MAX_WIDTH {
            return Err(Error::InvalidChain(format!(
                "concatenated width {width} exceeds {MAX_WIDTH}"
            )));
        }
        Self::new(width, (self.value << low.width) | low.value)
    }

    /// Sub-chain of `len` bits starting at 1-based position `start`.
    pub fn slice(&self, start: u32, len: u32) -> Result<Self> {
        if start == 0 || len == 0 || start + len - 1 > self.width {
            return Err(Error::InvalidChain(format!(
                "slice {start}+{len} outside chain of width {}",
                self.width
            )));
        }
        let shift = self.width - (start + len - 1);
        Self::new(len, (self.value >> shift) & mask(len))
    }

    /// Every chain of the given width in ascending order.
    pub fn all(width: u32) -> impl Iterator<Item = BitChain> {
        assert!((1..=MAX_WIDTH).contains(&width));
        let count = if width == 64 { u64::MAX } else { 1u64 << width };
        (0..count).map(move |value| BitChain { width, value })
    }
}

/// Iverson delta: 1 when `i AND k` has an odd number of 1-bits.
///
/// The sign `(-1)^δ(i, k)` is the coefficient of |k⟩ in `H^{⊗n}|i⟩`
/// (up to the common factor `2^{-n/2}`).
pub fn iverson_delta(i: &BitChain, k: &BitChain) -> Result<u8> {
    Ok(i.bitwise_and(k)?.parity_of_ones())
}

/// `(-1)^δ(i, k)` as a float.
pub fn delta_sign(i: &BitChain, k: &BitChain) -> Result<f64> {
    Ok(if iverson_delta(i, k)? == 1 { -1.0 } else { 1.0 })
}

impl fmt::Display for BitChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.to_bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }
}

impl Serialize for BitChain {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitChain {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bc(s: &str) -> BitChain {
        s.parse().unwrap()
    }

    #[test]
    fn and_examples() {
        assert_eq!(bc("11").bitwise_and(&bc("11")).unwrap(), bc("11"));
        assert_eq!(bc("10").bitwise_and(&bc("11")).unwrap(), bc("10"));
        for k in BitChain::all(3) {
            assert_eq!(bc("000").bitwise_and(&k).unwrap(), bc("000"));
        }
    }

    #[test]
    fn xor_examples() {
        // j = 2, i = 3 gives 01
        let j = BitChain::new(2, 2).unwrap();
        let i = BitChain::new(2, 3).unwrap();
        let x = j.bitwise_xor(&i).unwrap();
        assert_eq!(x.value(), 1);
        assert_eq!(x.to_string(), "01");
        for k in BitChain::all(3) {
            assert_eq!(k.bitwise_xor(&k).unwrap(), bc("000"));
            assert_eq!(k.bitwise_xor(&bc("000")).unwrap(), k);
        }
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let err = bc("10").bitwise_and(&bc("100")).unwrap_err();
        assert_eq!(err, Error::WidthMismatch { left: 2, right: 3 });
        assert!(bc("10").bitwise_xor(&bc("1")).is_err());
        assert!(iverson_delta(&bc("10"), &bc("1")).is_err());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(bc("0000").parity_of_ones(), 0);
        assert_eq!(bc("11").parity_of_ones(), 0);
        assert_eq!(bc("10").parity_of_ones(), 1);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(iverson_delta(&bc("11"), &bc("01")).unwrap(), 1);
        assert_eq!(iverson_delta(&bc("11"), &bc("11")).unwrap(), 0);
        for k in BitChain::all(4) {
            assert_eq!(iverson_delta(&bc("0000"), &k).unwrap(), 0);
        }
    }

    #[test]
    fn text_form_is_msb_first() {
        let c = BitChain::new(4, 5).unwrap();
        assert_eq!(c.to_string(), "0101");
        assert_eq!(c.to_bits(), vec![false, true, false, true]);
        assert_eq!(bc("0101"), c);
        assert_eq!(BitChain::zeros(3).unwrap().to_string(), "000");
        assert!("01a".parse::<BitChain>().is_err());
        assert!("".parse::<BitChain>().is_err());
    }

    #[test]
    fn construction_limits() {
        assert!(BitChain::new(0, 0).is_err());
        assert!(BitChain::new(2, 4).is_err());
        assert!(BitChain::new(64, u64::MAX).is_ok());
        assert!(BitChain::new(65, 0).is_err());
    }

    #[test]
    fn slicing_and_concat() {
        let c = bc("110100");
        assert_eq!(c.slice(1, 3).unwrap(), bc("110"));
        assert_eq!(c.slice(4, 3).unwrap(), bc("100"));
        assert_eq!(c.slice(2, 1).unwrap(), bc("1"));
        assert!(c.slice(5, 3).is_err());
        assert_eq!(bc("110").concat(&bc("100")).unwrap(), c);
        assert_eq!(bc("10").push_bit(true).unwrap(), bc("101"));
        assert_eq!(bc("10").push_bit(false).unwrap(), bc("100"));
    }

    #[test]
    fn serde_uses_bit_strings() {
        let c = bc("0101");
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"0101\"");
        let back: BitChain = serde_json::from_str("\"0101\"").unwrap();
        assert_eq!(back, c);
    }

    fn chain_pair() -> impl Strategy<Value = (BitChain, BitChain, BitChain)> {
        (1u32..=16).prop_flat_map(|w| {
            let m = mask(w);
            (Just(w), any::<u64>(), any::<u64>(), any::<u64>()).prop_map(move |(w, a, b, c)| {
                (
                    BitChain::new(w, a & m).unwrap(),
                    BitChain::new(w, b & m).unwrap(),
                    BitChain::new(w, c & m).unwrap(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn bits_round_trip((a, _, _) in chain_pair()) {
            let bits = a.to_bits();
            prop_assert_eq!(bits.len() as u32, a.width());
            prop_assert_eq!(BitChain::from_bits(&bits).unwrap(), a);
            prop_assert_eq!(a.to_string().parse::<BitChain>().unwrap(), a);
        }

        #[test]
        fn delta_is_symmetric((i, k, _) in chain_pair()) {
            prop_assert_eq!(iverson_delta(&i, &k).unwrap(), iverson_delta(&k, &i).unwrap());
        }

        #[test]
        fn delta_is_linear_in_first_argument((i, j, k) in chain_pair()) {
            let lhs = iverson_delta(&i.bitwise_xor(&j).unwrap(), &k).unwrap();
            let rhs = iverson_delta(&i, &k).unwrap() ^ iverson_delta(&j, &k).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
