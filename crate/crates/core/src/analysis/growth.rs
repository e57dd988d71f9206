use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::numeric::{Magnitude, DEFAULT_BITS};
use crate::scalar::{self, Scalar};
use crate::Error;

/// A fast-growing sequence `a_1 < a_2 < …`, indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthSequence {
    /// `a_i = 2^{i!}`: the binary exponents grow by the factor `i + 1`.
    Factorial2Exp,
    /// Explicit values; the sequence ends where the table does.
    UserTable {
        #[serde(with = "scalar::serde_text_vec")]
        values: Vec<Scalar>,
    },
}

pub(crate) fn factorial(i: u64) -> BigInt {
    (1..=i).fold(BigInt::one(), |acc, k| acc * k)
}

impl GrowthSequence {
    pub fn table(values: Vec<Scalar>) -> Result<Self, Error> {
        if values.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidInput("growth table values must be positive".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("growth table must be strictly increasing".into()));
        }
        Ok(GrowthSequence::UserTable { values })
    }

    /// Last available index, if finite.
    pub fn last_index(&self) -> Option<usize> {
        match self {
            GrowthSequence::Factorial2Exp => None,
            GrowthSequence::UserTable { values } => Some(values.len()),
        }
    }

    /// `a_i` for `i ≥ 1`.
    pub fn value(&self, i: u64) -> Result<Magnitude, Error> {
        if i == 0 {
            return Err(Error::InvalidInput("growth sequences start at index 1".into()));
        }
        match self {
            GrowthSequence::Factorial2Exp => Ok(Magnitude::pow2(factorial(i))),
            GrowthSequence::UserTable { values } => values
                .get(i as usize - 1)
                .map(Magnitude::from_scalar)
                .ok_or_else(|| Error::TableTooShort(format!("index {i} beyond a table of {}", values.len()))),
        }
    }

    /// `a_i` as a rational, when it has at most `max_bits` binary digits.
    pub fn value_scalar(&self, i: u64, max_bits: u64) -> Result<Scalar, Error> {
        self.value(i)?
            .to_scalar(max_bits)
            .ok_or_else(|| Error::ExponentNotRepresentable(format!("a_{i} exceeds {max_bits} bits")))
    }

    /// First index `N ≤ len` from which `2 a_i < a_{i+1}^α` holds for every
    /// `i` in `[N, len)`, compared conservatively.
    pub fn super_power_from(&self, alpha: &Scalar, len: u64) -> Result<Option<u64>, Error> {
        if !alpha.is_positive() {
            return Err(Error::InvalidInput("α must be positive".into()));
        }
        let mut from = None;
        for i in 1..len {
            let lhs = self.value(i)?.scale(&scalar::int(2));
            let rhs = self.value(i + 1)?.pow(alpha, DEFAULT_BITS).lo;
            if lhs < rhs {
                from.get_or_insert(i);
            } else {
                from = None;
            }
        }
        Ok(from)
    }
}
