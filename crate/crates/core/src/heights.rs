//! Weil and canonical heights over ℚ, chordal metrics and local
//! log-distances. All logarithms are natural.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::divisibility::{factor, is_prime, valuation, FactorBudget};
use crate::ratfield::{
    decimal_digits, log_abs, log_biguint, IntegralPoly, Polynomial, ProjPoint, Rational,
    RationalMap,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeightError {
    #[error("{0} is not prime")]
    NotPrime(BigUint),
    #[error("the local distance to infinity is undefined at the point at infinity")]
    PointAtInfinity,
    #[error("map must have degree at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
}

/// A place of ℚ: the absolute value, or a p-adic one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinity,
    Finite(BigUint),
}

impl Place {
    pub fn finite(p: BigUint) -> Result<Self, HeightError> {
        if is_prime(&p) {
            Ok(Place::Finite(p))
        } else {
            Err(HeightError::NotPrime(p))
        }
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Infinity)
    }

    pub fn prime(&self) -> Option<&BigUint> {
        match self {
            Place::Infinity => None,
            Place::Finite(p) => Some(p),
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => f.write_str("∞"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// A finite set of places that always contains ∞. Iterates ∞ first, then
/// primes in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaceSet {
    places: BTreeSet<Place>,
}

impl Default for PlaceSet {
    fn default() -> Self {
        Self::infinity_only()
    }
}

impl PlaceSet {
    pub fn infinity_only() -> Self {
        PlaceSet {
            places: BTreeSet::from([Place::Infinity]),
        }
    }

    /// `{∞} ∪ primes`; fails on the first non-prime.
    pub fn with_primes<I: IntoIterator<Item = BigUint>>(primes: I) -> Result<Self, HeightError> {
        let mut s = Self::infinity_only();
        for p in primes {
            s.insert(Place::finite(p)?);
        }
        Ok(s)
    }

    pub fn insert(&mut self, v: Place) -> bool {
        self.places.insert(v)
    }

    pub fn contains(&self, v: &Place) -> bool {
        self.places.contains(v)
    }

    pub fn contains_prime(&self, p: &BigUint) -> bool {
        self.places.contains(&Place::Finite(p.clone()))
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.places.iter().filter_map(Place::prime)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Place> {
        self.places.iter()
    }

    /// `#S`, counting ∞.
    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn union(&self, other: &PlaceSet) -> PlaceSet {
        PlaceSet {
            places: self.places.union(&other.places).cloned().collect(),
        }
    }
}

impl fmt::Display for PlaceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.places.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// A canonical-height value with a certified absolute error.
///
/// `truncated` is set when the digit budget stopped the iteration before
/// the requested tolerance was reached; `error_bound` is still certified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub iterations: u32,
    pub truncated: bool,
}

impl HeightEstimate {
    pub fn lower(&self) -> f64 {
        self.value - self.error_bound
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error_bound
    }
}

/// `log max(|x|, |y|)` for the normalized coordinates of `p`.
pub fn weil_height(p: &ProjPoint) -> f64 {
    log_biguint(p.x().magnitude().max(p.y().magnitude()))
}

/// Height of a rational number, as the point `[num : den]`.
pub fn rational_height(r: &Rational) -> f64 {
    log_biguint(r.numer().magnitude().max(r.denom().magnitude()))
}

/// Log of the largest entry of the primitive integer vector proportional to
/// the coefficients of numerator and denominator taken together.
pub fn map_height(phi: &RationalMap) -> f64 {
    let all: Vec<&Rational> = phi
        .numerator()
        .coeffs()
        .iter()
        .chain(phi.denominator().coeffs())
        .collect();
    let lcm = all.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = all
        .iter()
        .map(|c| (*c * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let max = ints.iter().map(|c| c.abs()).max().unwrap_or_default();
    if g.is_zero() {
        return 0.0;
    }
    log_abs(&(max / g))
}

pub fn polynomial_height(phi: &Polynomial) -> f64 {
    map_height(&RationalMap::from_polynomial(phi))
}

fn cross(p: &ProjPoint, q: &ProjPoint) -> BigInt {
    p.x() * q.y() - q.x() * p.y()
}

fn log_norm2(p: &ProjPoint) -> f64 {
    0.5 * log_biguint(&(p.x().magnitude().pow(2) + p.y().magnitude().pow(2)))
}

/// The v-adic chordal distance, in `[0, 1]`.
pub fn chordal_metric(p: &ProjPoint, q: &ProjPoint, v: &Place) -> f64 {
    let l = local_log_distance(p, q, v);
    if l.is_infinite() {
        0.0
    } else {
        (-l).exp().min(1.0)
    }
}

/// `-log ρ_v(P, Q)`, `+∞` exactly when `P = Q`. Computed in the log domain,
/// so it stays accurate when the coordinates are huge.
pub fn local_log_distance(p: &ProjPoint, q: &ProjPoint, v: &Place) -> f64 {
    let det = cross(p, q);
    if det.is_zero() {
        return f64::INFINITY;
    }
    match v {
        Place::Infinity => (log_norm2(p) + log_norm2(q) - log_abs(&det)).max(0.0),
        // normalized coordinates are coprime, so max(|x|_p, |y|_p) = 1
        Place::Finite(prime) => valuation(det.magnitude(), prime) as f64 * log_biguint(prime),
    }
}

/// `Σ_{v ∈ S′} λ_v(P, ∞)`.
pub fn sum_local_at_infinity(p: &ProjPoint, places: &PlaceSet) -> Result<f64, HeightError> {
    if p.is_infinity() {
        return Err(HeightError::PointAtInfinity);
    }
    let inf = ProjPoint::infinity();
    Ok(places.iter().map(|v| local_log_distance(p, &inf, v)).sum())
}

/// `log max{1, |β|_v}`.
pub fn log_plus_abs(beta: &Rational, v: &Place) -> f64 {
    if beta.is_zero() {
        return 0.0;
    }
    match v {
        Place::Infinity => (log_abs(beta.numer()) - log_abs(beta.denom())).max(0.0),
        Place::Finite(p) => valuation(beta.denom().magnitude(), p) as f64 * log_biguint(p),
    }
}

/// A constant `B` with `|ĥ_φ(P) − h(P)| ≤ B` for all `P`.
///
/// With `F(X, Y) = Σ aᵢ XⁱY^{d−i}` and `G = Y^d`, each place contributes a
/// local defect `log max(|F|_v, |G|_v) − d·log max(|X|_v, |Y|_v)`.
///
/// * Upper: `log⁺ Σ|aᵢ|` at ∞ and `log max(1, |aᵢ|_p)` at p, the latter
///   summing to the log of the lcm of coefficient denominators.
/// * Lower: split on whether `|X|` dominates `R·|Y|`. At ∞, with
///   `S = Σ_{i<d} |aᵢ|`, any `R ≥ 1` with `R|a_d| > S` gives
///   `c_∞ = min(R^{−d}, |a_d| − S/R)`; `R` is chosen to balance the two. At p take
///   `R_p = max(1, max_{i<d} |aᵢ/a_d|_p)` and `c_p = min(R_p^{−d}, |a_d|_p)`,
///   which is 1 away from the primes of `num(a_d)` and of the `den(aᵢ/a_d)`.
///
/// Telescoping the one-step defect gives `B = max(C_up, C_low) / (d − 1)`.
pub fn height_comparison_bound(phi: &Polynomial) -> Result<f64, HeightError> {
    let d = phi.deg();
    if d < 2 {
        return Err(HeightError::DegreeTooSmall(d));
    }
    let coeffs = phi.coeffs();
    let lead = phi.leading();
    let abs_log = |r: &Rational| log_abs(r.numer()) - log_abs(r.denom());

    // upper direction
    let log_sum_abs = log_sum_exp(coeffs.iter().filter(|c| !c.is_zero()).map(abs_log));
    let lcm = phi.denominator_lcm();
    let c_up = log_sum_abs.max(0.0) + log_abs(&lcm);

    // archimedean lower constant
    let log_lead = abs_log(&lead);
    let log_s = log_sum_exp(coeffs[..d].iter().filter(|c| !c.is_zero()).map(abs_log));
    let neg_log_c_inf = archimedean_lower(d, log_lead, log_s);

    // nonarchimedean lower constants
    let ratios: Vec<Rational> = coeffs[..d].iter().map(|c| c / &lead).collect();
    let lead_num = lead.numer().magnitude().clone();
    let mut bad: BigUint = ratios
        .iter()
        .fold(BigUint::one(), |acc, r| acc.lcm(r.denom().magnitude()));
    bad *= &lead_num;
    let f = factor(&bad, &FactorBudget::default());
    let neg_log_c_fin = if f.is_complete() {
        f.primes()
            .map(|p| {
                let lp = log_biguint(p);
                let r_p = ratios
                    .iter()
                    .filter(|r| !r.is_zero())
                    .map(|r| valuation(r.denom().magnitude(), p))
                    .max()
                    .unwrap_or(0);
                let lead_v = valuation(&lead_num, p);
                ((d as u64 * r_p as u64) as f64 * lp).max(lead_v as f64 * lp)
            })
            .sum::<f64>()
    } else {
        let dens: f64 = ratios.iter().map(|r| log_abs(r.denom())).sum();
        d as f64 * dens + log_biguint(&lead_num)
    };
    let c_low = neg_log_c_inf + neg_log_c_fin;

    let b = c_up.max(c_low).max(0.0) / (d - 1) as f64;
    // absorb floating-point rounding in the logs above
    Ok(if b > 0.0 {
        b * (1.0 + 1e-12) + 1e-12
    } else {
        0.0
    })
}

/// `−log c_∞` for the best `R`, found by bisection on `ρ = log R`.
/// Any `R` in range is valid; the search only makes the constant smaller.
fn archimedean_lower(d: usize, log_lead: f64, log_s: f64) -> f64 {
    let df = d as f64;
    // −log(|a_d| − S/R)
    let tail = |rho: f64| -log_lead - (-(log_s - log_lead - rho).exp()).ln_1p();
    if log_s == f64::NEG_INFINITY {
        return (-log_lead).max(0.0);
    }
    let mut lo = (log_s - log_lead).max(0.0);
    if lo == 0.0 && tail(0.0).is_finite() && tail(0.0) <= 0.0 {
        return (-log_lead).max(tail(0.0)).max(0.0);
    }
    let mut hi = lo + 1.0;
    while df * hi < tail(hi) {
        hi = lo + 2.0 * (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if df * mid < tail(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (df * hi).max(tail(hi))
}

fn log_sum_exp<I: Iterator<Item = f64>>(terms: I) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub const DEFAULT_DIGIT_BUDGET: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightOptions {
    /// Largest number of decimal digits allowed in an orbit coordinate.
    pub digit_budget: u64,
    /// Replaces [`height_comparison_bound`] when set.
    pub bound: Option<f64>,
}

impl Default for HeightOptions {
    fn default() -> Self {
        HeightOptions {
            digit_budget: DEFAULT_DIGIT_BUDGET,
            bound: None,
        }
    }
}

/// `ĥ_φ(P)` to within `tol`, with the default options.
pub fn canonical_height(
    phi: &Polynomial,
    p: &Rational,
    tol: f64,
) -> Result<HeightEstimate, HeightError> {
    canonical_height_with(phi, p, tol, &HeightOptions::default())
}

/// `h(φᴺ(P)) / dᴺ` for the least `N` with `B / dᴺ ≤ tol`.
pub fn canonical_height_with(
    phi: &Polynomial,
    p: &Rational,
    tol: f64,
    opts: &HeightOptions,
) -> Result<HeightEstimate, HeightError> {
    let d = phi.deg();
    if d < 2 {
        return Err(HeightError::DegreeTooSmall(d));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(HeightError::BadTolerance(tol));
    }
    let b = match opts.bound {
        Some(b) => b,
        None => height_comparison_bound(phi)?,
    };
    let df = d as f64;
    let target = if b <= tol {
        0
    } else {
        let mut n = ((b / tol).ln() / df.ln()).ceil().max(0.0) as u32;
        while b / df.powi(n as i32) > tol {
            n += 1;
        }
        n
    };
    let ip = IntegralPoly::from_poly(phi);
    let mut x = p.clone();
    let mut n = 0u32;
    while n < target {
        let next = ip.eval(&x);
        let size = next.numer().magnitude().max(next.denom().magnitude());
        if decimal_digits(size) > opts.digit_budget {
            break;
        }
        x = next;
        n += 1;
    }
    let scale = df.powi(n as i32);
    Ok(HeightEstimate {
        value: rational_height(&x) / scale,
        error_bound: b / scale,
        iterations: n,
        truncated: n < target,
    })
}
