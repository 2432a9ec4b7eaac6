//! Scalar abstraction shared by the structural (non-stochastic) parts of the crate.
//!
//! Order predicates, the LP engine, the assumption checks and the bound
//! construction are written once over [`Scalar`] and run either in IEEE
//! floating point (`f32`, `f64`) or in exact rational arithmetic
//! ([`BigRational`]). Exact instances use a zero tolerance everywhere.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Field-like number type usable by the generic algorithms.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Serialize + Send + Sync + 'static
{
    /// Whether arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Converts from `f64`. Exact types take the exact binary value.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(|| panic!("{v} is not representable"))
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance value for this type: `v` itself for floats, zero for exact types.
    fn tolerance(v: f64) -> Self {
        if Self::EXACT {
            Self::zero()
        } else {
            Self::from_f64_lossy(v)
        }
    }

    /// Pivot threshold used by the simplex engine.
    fn pivot_epsilon() -> Self;

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn pivot_epsilon() -> Self {
        1e-11
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn pivot_epsilon() -> Self {
        1e-6
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_f64_lossy(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(|| panic!("{v} is not finite"))
    }

    fn pivot_epsilon() -> Self {
        BigRational::zero()
    }
}

/// Parses a decimal literal such as `"0.4677"` exactly.
pub fn rational_from_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn sum<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_is_exact() {
        let r = rational_from_decimal("0.4677").unwrap();
        assert_eq!(r, BigRational::new(4677.into(), 10000.into()));
        let n = rational_from_decimal("-1.5").unwrap();
        assert_eq!(n, BigRational::new((-3).into(), 2.into()));
        assert_eq!(rational_from_decimal("2").unwrap(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn tolerance_is_zero_for_exact() {
        assert!(<BigRational as Scalar>::tolerance(1e-9).is_zero());
        assert_eq!(<f64 as Scalar>::tolerance(1e-9), 1e-9);
    }
}
