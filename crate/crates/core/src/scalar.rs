//! Scalar abstraction for weights and probabilities.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Field-like numeric type used for weights: `f32`, `f64` or an exact rational.
pub trait Scalar:
    Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `self^e` for a non-negative integer exponent, with `0^0 = 1`.
    fn powu(&self, e: usize) -> Self {
        num_traits::pow(self.clone(), e)
    }

    /// `self^e` for a signed exponent. Panics on `0^(-k)`.
    fn powi_signed(&self, e: i64) -> Self {
        if e >= 0 {
            self.powu(e as usize)
        } else {
            assert!(!self.is_zero(), "negative power of zero");
            (Self::one() / self.clone()).powu((-e) as usize)
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }

    fn min_val(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_val(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
}

impl Scalar for BigRational {
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Binomial coefficient in any scalar type.
pub fn binomial<T: Scalar>(m: usize, j: usize) -> T {
    if j > m {
        return T::zero();
    }
    let j = j.min(m - j);
    let mut acc = T::one();
    for i in 0..j {
        acc = acc * T::from_usize(m - i).unwrap() / T::from_usize(i + 1).unwrap();
    }
    acc
}

