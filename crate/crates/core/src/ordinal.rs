//! Ordinals below ω², written `ω·a + n`.
//!
//! Only comparison and the split into limit and finite parts are provided.
//! The derived `Ord` is lexicographic on `(omega_coeff, finite_part)`, which
//! is exactly ordinal order for this shape.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ordinal {
    pub omega_coeff: u64,
    pub finite_part: u64,
}

impl Ordinal {
    pub const ZERO: Ordinal = Ordinal::new(0, 0);
    pub const OMEGA: Ordinal = Ordinal::new(1, 0);

    pub const fn new(omega_coeff: u64, finite_part: u64) -> Self {
        Ordinal {
            omega_coeff,
            finite_part,
        }
    }

    pub const fn finite(n: u64) -> Self {
        Ordinal::new(0, n)
    }

    /// `ω + k`.
    pub const fn omega_plus(k: u64) -> Self {
        Ordinal::new(1, k)
    }

    pub fn is_limit_or_zero(&self) -> bool {
        self.finite_part == 0
    }

    /// Splits `γ` into `(λ(γ), n(γ))`: the limit part (or zero) and the
    /// finite remainder.
    pub fn decompose(&self) -> (Ordinal, u64) {
        (Ordinal::new(self.omega_coeff, 0), self.finite_part)
    }

    pub fn compare(&self, other: &Ordinal) -> std::cmp::Ordering {
        self.cmp(other)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w*{}+{}", self.omega_coeff, self.finite_part)
    }
}

impl FromStr for Ordinal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::OrdinalParse(format!("expected \"w*a+n\" or \"n\", got {s:?}"));
        match s.strip_prefix("w*") {
            Some(rest) => {
                let (a, n) = rest.split_once('+').ok_or_else(bad)?;
                Ok(Ordinal::new(
                    a.parse().map_err(|_| bad())?,
                    n.parse().map_err(|_| bad())?,
                ))
            }
            None => Ok(Ordinal::finite(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
