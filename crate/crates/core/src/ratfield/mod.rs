//! Exact arithmetic over the rationals.
//!
//! Integers and reduced fractions come from `num-bigint` / `num-rational`;
//! this module adds dense polynomials over ℚ, rational maps, projective
//! points of ℙ¹(ℚ) and the handful of integer helpers (fast gcd, logs of
//! huge integers, digit counts) the rest of the crate leans on.

mod map;
mod point;
mod poly;
mod squarefree;

pub use map::RationalMap;
pub use point::{PointError, ProjPoint};
pub use poly::{IntegralPoly, Polynomial};
pub use squarefree::{is_powerful, squarefree_decomposition, SquarefreeDecomposition};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub type BigInteger = BigInt;
pub type Rational = num_rational::BigRational;

/// `f(x)` evaluated exactly, in lowest terms.
pub fn poly_eval(f: &Polynomial, x: &Rational) -> Rational {
    f.eval(x)
}

/// `φ(z + α) − α`, expanded.
pub fn conjugate(phi: &Polynomial, alpha: &Rational) -> Polynomial {
    phi.conjugate(alpha)
}

/// `1 / ψ(1/z)` as a reduced rational map.
pub fn reverse_map(psi: &Polynomial) -> RationalMap {
    RationalMap::reversed(psi)
}

pub fn derivative(f: &Polynomial) -> Polynomial {
    f.derivative()
}

/// Builds a rational from machine integers. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Natural log of `n > 0`, from the bit length and the leading 53-bit window.
///
/// Returns `-inf` for zero.
pub fn log_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 53 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 53;
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn log_abs(n: &BigInt) -> f64 {
    log_biguint(n.magnitude())
}

/// gcd that reduces the larger operand modulo the smaller before handing the
/// pair to the binary algorithm. `num-bigint` runs Stein's algorithm directly,
/// which is quadratic in the bit length of the larger input.
pub fn gcd_big(a: &BigUint, b: &BigUint) -> BigUint {
    let (big, small) = if a.bits() >= b.bits() { (a, b) } else { (b, a) };
    if small.is_zero() {
        return big.clone();
    }
    if small.is_one() {
        return BigUint::one();
    }
    let mut x = small.clone();
    let mut y = big % small;
    // a few Euclid steps while the sizes are lopsided
    while !y.is_zero() && x.bits() > y.bits() + 64 {
        let r = &x % &y;
        x = y;
        y = r;
    }
    if y.is_zero() {
        return x;
    }
    x.gcd(&y)
}

/// Number of decimal digits of `n` (1 for zero).
pub fn decimal_digits(n: &BigUint) -> u64 {
    if n.is_zero() {
        return 1;
    }
    let bits = n.bits();
    if bits <= 64 {
        let v = n.to_u64().unwrap();
        return v.checked_ilog10().unwrap_or(0) as u64 + 1;
    }
    let est = log_biguint(n) / std::f64::consts::LN_10;
    let guess = est.floor() as u64;
    // the estimate is good to ~1e-12 relative; settle boundary cases exactly
    if est - est.floor() > 1e-6 && est.ceil() - est > 1e-6 {
        return guess + 1;
    }
    let ten_k = num_traits::pow(BigUint::from(10u32), guess as usize);
    if *n >= ten_k {
        if *n >= &ten_k * 10u32 {
            guess + 2
        } else {
            guess + 1
        }
    } else {
        guess
    }
}
