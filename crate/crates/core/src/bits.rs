use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A computational-register label such as `"011"`.
///
/// Character `k` is the state of computational qubit `k + 1`; the first
/// character is the most significant bit of [`BitString::value`], matching
/// the global basis ordering where the observer is the most significant bit
/// of the full Hilbert-space index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    /// Label of length `n` whose binary value is `value`.
    pub fn from_value(value: usize, n: usize) -> Self {
        BitString((0..n).map(|k| (value >> (n - 1 - k)) & 1 == 1).collect())
    }

    /// Every label of length `n`, in increasing binary order.
    pub fn all(n: usize) -> impl Iterator<Item = BitString> {
        (0..1usize << n).map(move |v| BitString::from_value(v, n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bit(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn value(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Fails with [`Error::LabelLength`] unless the label has `n` bits.
    pub fn expect_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LabelLength {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::Parse("empty bit string".into()));
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit `{other}` in `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
