//! Independent oracles: slow, obviously-correct reimplementations used to
//! cross-check the library.
#![allow(dead_code)]

use std::collections::BTreeMap;

use dynzsig_core::ratfield::{Polynomial, Rational};
use num_bigint::BigInt;
use num_traits::Zero;

/// Trial division by every integer up to √n.
pub fn naive_factor(mut n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    out
}

pub fn naive_is_prime(n: u64) -> bool {
    n >= 2 && naive_factor(n).get(&n) == Some(&1)
}

/// Primitive and non-primitive parts from full factorizations: a prime is
/// primitive iff it divides no earlier term.
pub fn oracle_split(a_n: u64, history: &[u64]) -> (u64, u64) {
    let mut prim = 1u64;
    let mut non = 1u64;
    for (p, e) in naive_factor(a_n) {
        let pe = p.pow(e);
        if history.iter().any(|h| h % p == 0) {
            non *= pe;
        } else {
            prim *= pe;
        }
    }
    (prim, non)
}

/// Plain Horner over ℚ with a reduction after every step.
pub fn horner(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

pub fn poly_from(coeffs: &[(i64, i64)]) -> Polynomial {
    Polynomial::new(
        coeffs
            .iter()
            .map(|&(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
            .collect(),
    )
}

/// `φⁿ(α) − α` for `n = 1..=count` by direct iteration.
pub fn direct_orbit(phi: &[Rational], alpha: &Rational, count: usize) -> Vec<Rational> {
    let mut x = alpha.clone();
    (0..count)
        .map(|_| {
            x = horner(phi, &x);
            &x - alpha
        })
        .collect()
}
