//! Exact rational helpers and the tagged cost value.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SbfeError};

pub type Rational = BigRational;

/// Builds `num/den` from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parses `"num/den"` (or a bare integer) into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || SbfeError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `1 - r`.
pub fn complement(r: &Rational) -> Rational {
    Rational::one() - r
}

/// An expected or realized cost, tagged by the arithmetic mode that produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum CostValue {
    Exact(Rational),
    Float(f64),
}

impl CostValue {
    pub fn zero_exact() -> Self {
        CostValue::Exact(Rational::zero())
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            CostValue::Exact(r) => Some(r),
            CostValue::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            CostValue::Exact(r) => to_f64(r),
            CostValue::Float(v) => *v,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            CostValue::Exact(r) => r.is_negative(),
            CostValue::Float(v) => *v < 0.0,
        }
    }
}

impl fmt::Display for CostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostValue::Exact(r) => f.write_str(&format_rational(r)),
            CostValue::Float(v) => write!(f, "{v}"),
        }
    }
}

/// A JSON scalar: either a `"num/den"` string or a plain float.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonNumber {
    Text(String),
    Float(f64),
}

impl From<&CostValue> for JsonNumber {
    fn from(v: &CostValue) -> Self {
        match v {
            CostValue::Exact(r) => JsonNumber::Text(format_rational(r)),
            CostValue::Float(x) => JsonNumber::Float(*x),
        }
    }
}
