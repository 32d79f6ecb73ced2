//! Spin vectors and the global basis-state convention.
//!
//! Basis index `m` encodes one spin per qubit: bit `k` of `m` (LSB first) is
//! qubit/antenna `k`, bit 0 is spin +1 and bit 1 is spin -1. When printed as
//! a bitstring qubit 0 is the leftmost character, so index 15 on six qubits
//! reads `"111100"` and decodes to `[-1, -1, -1, -1, 1, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SpinVector(Vec<i8>);

impl SpinVector {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::domain(format!("spin entries must be +1 or -1, got {bad}")));
        }
        Ok(Self(spins))
    }

    /// Spin configuration of basis index `index` on `n` qubits.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self(
            (0..n)
                .map(|k| if (index >> k) & 1 == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == -1)
            .fold(0u64, |acc, (k, _)| acc | (1u64 << k))
    }

    /// Parses a measurement bitstring, qubit 0 leftmost; `'1'` maps to -1.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(1),
                '1' => Ok(-1),
                other => Err(Error::domain(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(Self)
    }

    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&s| if s == 1 { '0' } else { '1' }).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| f64::from(s)).collect()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }
}

impl TryFrom<Vec<i8>> for SpinVector {
    type Error = Error;

    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SpinVector> for Vec<i8> {
    fn from(s: SpinVector) -> Self {
        s.0
    }
}

/// Bitstring of basis index `index` on `n` qubits, qubit 0 leftmost.
pub fn index_to_bitstring(index: u64, n: usize) -> String {
    (0..n)
        .map(|k| if (index >> k) & 1 == 0 { '0' } else { '1' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn six_antenna_readout_string() {
        let x = SpinVector::from_bitstring("111100").unwrap();
        assert_eq!(x.as_slice(), &[-1, -1, -1, -1, 1, 1]);
        assert_eq!(x.index(), 15);
        assert_eq!(index_to_bitstring(15, 6), "111100");
    }

    #[test]
    fn rejects_non_spins() {
        assert!(SpinVector::new(vec![1, 0]).is_err());
        assert!(SpinVector::from_bitstring("012").is_err());
        assert!(serde_json::from_str::<SpinVector>("[1,2]").is_err());
    }

    proptest! {
        #[test]
        fn index_and_bitstring_roundtrip(n in 1usize..=8, raw in any::<u64>()) {
            let m = raw % (1u64 << n);
            let x = SpinVector::from_index(m, n);
            prop_assert_eq!(x.index(), m);
            prop_assert_eq!(x.to_bitstring(), index_to_bitstring(m, n));
            prop_assert_eq!(SpinVector::from_bitstring(&x.to_bitstring()).unwrap(), x);
        }
    }
}
