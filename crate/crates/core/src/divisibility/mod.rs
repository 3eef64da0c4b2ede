//! Factorization, valuations, primitive parts and the rigid-divisibility
//! checker.
//!
//! Primitive parts are found by gcd-stripping against earlier terms, which
//! needs no factorization and so works for terms with many thousands of
//! digits. Factorization is only used where individual primes must be named.

mod factor;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

pub use factor::{
    factor, is_prime, is_prime_u64, small_primes, valuation, FactorBudget, FactorSource,
    Factorization,
};

use crate::heights::PlaceSet;
use crate::ratfield::{gcd_big, Rational};

/// `(x) = A·B⁻¹` with coprime integral ideals, i.e. `A = |num x|`,
/// `B = den x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdealPair {
    pub a: BigUint,
    pub b: BigUint,
}

pub fn ideal_pair(x: &Rational) -> IdealPair {
    IdealPair {
        a: x.numer().magnitude().clone(),
        b: x.denom().magnitude().clone(),
    }
}

/// `A` with every prime of `S` divided out completely.
pub fn prime_to_s_norm(a: &BigUint, s: &PlaceSet) -> BigUint {
    let mut out = a.clone();
    for p in s.primes() {
        while !out.is_zero() && (&out % p).is_zero() {
            out /= p;
        }
    }
    out
}

/// `Aₙ = primitive_part · nonprimitive_part`, where the primitive part
/// carries exactly the primes not dividing any earlier term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimitiveSplit {
    pub primitive_part: BigUint,
    pub nonprimitive_part: BigUint,
}

impl PrimitiveSplit {
    pub fn has_primitive_divisor(&self) -> bool {
        self.primitive_part > BigUint::one()
    }
}

/// Strips from `a_n` the full power of every prime it shares with some term
/// of `history`, by dividing out gcds until they are all 1.
pub fn primitive_split(a_n: &BigUint, history: &[BigUint]) -> PrimitiveSplit {
    let mut rest = a_n.clone();
    for h in history {
        if rest.is_one() {
            break;
        }
        strip_common(&mut rest, h);
    }
    PrimitiveSplit {
        nonprimitive_part: a_n / &rest,
        primitive_part: rest,
    }
}

/// Divides out of `x` every prime it shares with `y`, to full multiplicity.
/// Returns the removed part.
pub fn strip_common(x: &mut BigUint, y: &BigUint) -> BigUint {
    let orig = x.clone();
    let mut g = gcd_big(x, y);
    while !g.is_one() {
        *x /= &g;
        // later rounds only need primes already found
        g = gcd_big(x, &g);
    }
    orig / &*x
}

pub fn has_primitive_divisor(a_n: &BigUint, history: &[BigUint]) -> bool {
    primitive_split(a_n, history).has_primitive_divisor()
}

/// Which half of the rigid-divisibility definition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RigidCondition {
    /// `p | aₘ, p | aₙ` but `p ∤ a_{gcd(m, n)}`.
    Gcd,
    /// `ord_p(a_{km}) ≠ ord_p(aₘ)` although `ord_p(aₘ) > 0`.
    Stability,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigidViolation {
    pub prime: BigUint,
    pub condition: RigidCondition,
    /// 1-based indices involved: `(m, n, gcd)` or `(m, km)`.
    pub indices: Vec<usize>,
    pub valuations: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RigidReport {
    pub verified: bool,
    pub checked_pairs: u64,
    /// Composite cofactors the budget could not split; their primes were not
    /// checked.
    pub untested: Vec<BigUint>,
    pub violations: Vec<RigidViolation>,
    /// Primes outside `S` that were checked.
    pub primes: Vec<BigUint>,
}

/// Checks both rigid-divisibility conditions for every prime outside `S`
/// found by factoring the terms `a₁, …, a_N` (given 1-based, as a slice).
pub fn rigid_check<F: FactorSource + ?Sized>(
    sequence: &[BigUint],
    s: &PlaceSet,
    source: &F,
) -> RigidReport {
    let mut primes = BTreeSet::new();
    let mut untested = Vec::new();
    for a in sequence {
        assert!(!a.is_zero(), "rigid_check terms must be nonzero");
        let reduced = prime_to_s_norm(a, s);
        if reduced.is_one() {
            continue;
        }
        let f = source.factor(&reduced);
        primes.extend(f.factors.into_keys());
        if !f.cofactor.is_one() && !untested.contains(&f.cofactor) {
            untested.push(f.cofactor);
        }
    }
    let mut report = RigidReport {
        untested,
        ..RigidReport::default()
    };
    for p in &primes {
        let v: Vec<u32> = sequence.iter().map(|a| valuation(a, p)).collect();
        check_prime(p, &v, &mut report);
    }
    report.primes = primes.into_iter().collect();
    report.verified = report.violations.is_empty();
    report
}

/// Runs both conditions on the valuation vector `v` (`v[i]` belongs to
/// index `i + 1`).
fn check_prime(p: &BigUint, v: &[u32], report: &mut RigidReport) {
    let n = v.len();
    let support: Vec<usize> = (1..=n).filter(|&i| v[i - 1] > 0).collect();
    for (i, &m) in support.iter().enumerate() {
        for &k in &support[i + 1..] {
            report.checked_pairs += 1;
            let g = m.gcd(&k);
            if v[g - 1] == 0 {
                report.violations.push(RigidViolation {
                    prime: p.clone(),
                    condition: RigidCondition::Gcd,
                    indices: vec![m, k, g],
                    valuations: vec![v[m - 1], v[k - 1], v[g - 1]],
                });
            }
        }
        for km in (2 * m..=n).step_by(m) {
            report.checked_pairs += 1;
            if v[km - 1] != v[m - 1] {
                report.violations.push(RigidViolation {
                    prime: p.clone(),
                    condition: RigidCondition::Stability,
                    indices: vec![m, km],
                    valuations: vec![v[m - 1], v[km - 1]],
                });
            }
        }
    }
}

/// `𝒩_S(Nₙ) ≤ 𝒩_S(∏_{i | n, i < n} Pᵢ)`; `splits[i − 1]` belongs to index
/// `i`.
pub fn nonprimitive_bound_check(n: usize, splits: &[PrimitiveSplit], s: &PlaceSet) -> bool {
    assert!(n >= 1 && splits.len() >= n, "need splits for indices 1..=n");
    let lhs = prime_to_s_norm(&splits[n - 1].nonprimitive_part, s);
    let rhs: BigUint = (1..n)
        .filter(|i| n.is_multiple_of(*i))
        .map(|i| &splits[i - 1].primitive_part)
        .product();
    lhs <= prime_to_s_norm(&rhs, s)
}
