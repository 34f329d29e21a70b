//! Numeric backends shared by the estimator code.
//!
//! Everything in [`crate::poly`] is generic over [`Scalar`] so the same
//! formulas run in `f64` on the production path and in exact rationals on
//! the oracle path.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn abs_val(&self) -> Self;

    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Exact rational `num/den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::from_ratio(num, den)
}

/// Falling factorial `x (x-1) ... (x-k+1)` as a scalar; zero whenever the
/// product crosses zero.
pub fn falling<C: Scalar>(x: i64, k: u32) -> C {
    let mut acc = C::one();
    for i in 0..i64::from(k) {
        let f = x - i;
        if f == 0 {
            return C::zero();
        }
        acc = acc * C::from_i64(f);
    }
    acc
}

/// Integer power of a scalar.
pub fn pow<C: Scalar>(base: &C, exp: u32) -> C {
    let mut acc = C::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

pub fn factorial<C: Scalar>(k: u32) -> C {
    falling(i64::from(k), k)
}
