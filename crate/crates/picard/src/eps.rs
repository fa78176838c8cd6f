//! First-order infinitesimal rationals `p + q·ε`, ordered lexicographically.
//!
//! These carry the "for every ε > 0 small enough" limits through the
//! Zariski iteration exactly. Products truncate the ε² term; the one place
//! where a sign decision could depend on ε² (the square of an
//! infinitesimal nef part) falls back to explicit small-rational
//! evaluation in [`crate::zariski`].

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{fmt_rational, Q};

/// `value + slope·ε` for an infinitesimal ε > 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsRational {
    /// Value at ε = 0.
    #[serde(with = "crate::rational::qstr")]
    pub value: Q,
    /// First-order coefficient.
    #[serde(with = "crate::rational::qstr")]
    pub slope: Q,
}

impl EpsRational {
    pub fn new(value: Q, slope: Q) -> Self {
        EpsRational { value, slope }
    }

    /// Embed a plain rational.
    pub fn constant(value: Q) -> Self {
        EpsRational { value, slope: Q::zero() }
    }

    /// The infinitesimal ε itself.
    pub fn epsilon() -> Self {
        EpsRational { value: Q::zero(), slope: num::one() }
    }

    pub fn zero() -> Self {
        EpsRational { value: Q::zero(), slope: Q::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero() && self.slope.is_zero()
    }

    /// `p + qε > 0` iff `p > 0` or (`p = 0` and `q > 0`).
    pub fn is_positive(&self) -> bool {
        self.value.is_positive() || (self.value.is_zero() && self.slope.is_positive())
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative() || (self.value.is_zero() && self.slope.is_negative())
    }

    pub fn scale(&self, c: &Q) -> Self {
        EpsRational::new(&self.value * c, &self.slope * c)
    }

    pub fn div_scale(&self, c: &Q) -> Self {
        EpsRational::new(&self.value / c, &self.slope / c)
    }

    /// Evaluate at a concrete rational ε.
    pub fn at(&self, eps: &Q) -> Q {
        &self.value + &self.slope * eps
    }
}

impl PartialOrd for EpsRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EpsRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then_with(|| self.slope.cmp(&other.slope))
    }
}

impl Add for &EpsRational {
    type Output = EpsRational;
    fn add(self, rhs: &EpsRational) -> EpsRational {
        EpsRational::new(&self.value + &rhs.value, &self.slope + &rhs.slope)
    }
}

impl Sub for &EpsRational {
    type Output = EpsRational;
    fn sub(self, rhs: &EpsRational) -> EpsRational {
        EpsRational::new(&self.value - &rhs.value, &self.slope - &rhs.slope)
    }
}

/// Product with the ε² term truncated to zero.
impl Mul for &EpsRational {
    type Output = EpsRational;
    fn mul(self, rhs: &EpsRational) -> EpsRational {
        EpsRational::new(
            &self.value * &rhs.value,
            &self.value * &rhs.slope + &self.slope * &rhs.value,
        )
    }
}

impl Neg for &EpsRational {
    type Output = EpsRational;
    fn neg(self) -> EpsRational {
        EpsRational::new(-&self.value, -&self.slope)
    }
}

impl std::fmt::Display for EpsRational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.slope.is_zero() {
            write!(f, "{}", fmt_rational(&self.value))
        } else if self.slope.is_negative() {
            write!(f, "{} - {}ε", fmt_rational(&self.value), fmt_rational(&(-&self.slope)))
        } else {
            write!(f, "{} + {}ε", fmt_rational(&self.value), fmt_rational(&self.slope))
        }
    }
}
