use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::Rational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PointError {
    #[error("[0 : 0] is not a point of the projective line")]
    BothZero,
}

/// A point `[x : y]` of ℙ¹(ℚ), read as the affine value `x / y`.
///
/// Coordinates are coprime and sign-normalized (`y ≥ 0`, and `x > 0` when
/// `y = 0`), so `∞ = [1 : 0]` and equal points compare equal structurally.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ProjPoint {
    x: BigInt,
    y: BigInt,
}

impl ProjPoint {
    pub fn new(x: BigInt, y: BigInt) -> Result<Self, PointError> {
        if x.is_zero() && y.is_zero() {
            return Err(PointError::BothZero);
        }
        let g = x.gcd(&y);
        let (mut x, mut y) = (x / &g, y / &g);
        if y.is_negative() || (y.is_zero() && x.is_negative()) {
            x = -x;
            y = -y;
        }
        Ok(ProjPoint { x, y })
    }

    pub fn infinity() -> Self {
        ProjPoint {
            x: BigInt::one(),
            y: BigInt::zero(),
        }
    }

    /// The affine point `r`, i.e. `[num : den]`.
    pub fn from_rational(r: &Rational) -> Self {
        ProjPoint {
            x: r.numer().clone(),
            y: r.denom().clone(),
        }
    }

    /// `[1 : r]`, the image of `r` under `z ↦ 1/z`.
    pub fn inverted(r: &Rational) -> Self {
        Self::new(r.denom().clone(), r.numer().clone()).expect("denominator is nonzero")
    }

    pub fn x(&self) -> &BigInt {
        &self.x
    }

    pub fn y(&self) -> &BigInt {
        &self.y
    }

    pub fn is_infinity(&self) -> bool {
        self.y.is_zero()
    }

    pub fn affine(&self) -> Option<Rational> {
        (!self.is_infinity()).then(|| Rational::new(self.x.clone(), self.y.clone()))
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {}]", self.x, self.y)
    }
}
