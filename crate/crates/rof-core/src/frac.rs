//! Exact nonnegative fractions for thresholds that must not suffer rounding.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// A nonnegative fraction, kept unreduced. Parsed from `"1/4"`, `"0.25"` or `"1"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FracError {
    #[error("cannot parse fraction {0:?}")]
    Parse(String),
    #[error("fraction has zero denominator")]
    ZeroDenominator,
}

impl Frac {
    pub const fn new(num: u64, den: u64) -> Self {
        Frac { num, den }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact comparison `self >= other` by cross multiplication.
    pub fn ge(self, other: Frac) -> bool {
        self.num as u128 * other.den as u128 >= other.num as u128 * self.den as u128
    }
}

impl FromStr for Frac {
    type Err = FracError;

    fn from_str(s: &str) -> Result<Self, FracError> {
        let bad = || FracError::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let num = n.trim().parse().map_err(|_| bad())?;
            let den: u64 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(FracError::ZeroDenominator);
            }
            return Ok(Frac { num, den });
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let scale = 10u64
                .checked_pow(frac.len() as u32)
                .ok_or_else(bad)?;
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            let num = int.checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
            return Ok(Frac { num, den: scale });
        }
        let num = s.trim().parse().map_err(|_| bad())?;
        Ok(Frac { num, den: 1 })
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
