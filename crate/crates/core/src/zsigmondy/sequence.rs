use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;

use crate::divisibility::{ideal_pair, primitive_split, IdealPair, PrimitiveSplit};
use crate::heights::DEFAULT_DIGIT_BUDGET;
use crate::ratfield::{conjugate, decimal_digits, IntegralPoly, Polynomial, Rational};

use super::ZsigmondyError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SequenceOptions {
    /// Largest number of decimal digits allowed in numerator or denominator
    /// of a term.
    pub digit_budget: u64,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            digit_budget: DEFAULT_DIGIT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub n: usize,
    /// `ψⁿ(0) = φⁿ(α) − α`.
    pub value: Rational,
    pub ideal: IdealPair,
    pub split: PrimitiveSplit,
    pub primitive: bool,
}

/// The terms `φⁿ(α) − α = ψⁿ(0)` for `n = 1..=N`, with `ψ(z) = φ(z + α) − α`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSequence {
    pub phi: Polynomial,
    pub alpha: Rational,
    pub psi: Polynomial,
    pub records: Vec<OrbitRecord>,
}

impl OrbitSequence {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record for index `n ≥ 1`.
    pub fn record(&self, n: usize) -> Option<&OrbitRecord> {
        n.checked_sub(1).and_then(|i| self.records.get(i))
    }

    /// `A₁, …, A_N`.
    pub fn a_terms(&self) -> Vec<BigUint> {
        self.records.iter().map(|r| r.ideal.a.clone()).collect()
    }

    pub fn splits(&self) -> Vec<PrimitiveSplit> {
        self.records.iter().map(|r| r.split.clone()).collect()
    }

    pub fn degree(&self) -> usize {
        self.psi.deg()
    }
}

/// Iterates `ψ` exactly from 0 and records ideals and primitive splits.
///
/// Stops with [`ZsigmondyError::Preperiodic`] as soon as a value is 0 or
/// repeats, and with [`ZsigmondyError::DigitBudgetExceeded`] (carrying the
/// records built so far) when a term outgrows the budget.
pub fn build_sequence(
    phi: &Polynomial,
    alpha: &Rational,
    n: usize,
    opts: &SequenceOptions,
) -> Result<OrbitSequence, ZsigmondyError> {
    let d = phi.deg();
    if d < 2 {
        return Err(ZsigmondyError::DegreeTooSmall(d));
    }
    if n == 0 {
        return Err(ZsigmondyError::EmptyRange);
    }
    let psi = conjugate(phi, alpha);
    let ip = IntegralPoly::from_poly(&psi);
    let mut seq = OrbitSequence {
        phi: phi.clone(),
        alpha: alpha.clone(),
        psi,
        records: Vec::with_capacity(n),
    };
    let mut seen: HashMap<Rational, usize> = HashMap::new();
    seen.insert(Rational::zero(), 0);
    let mut history: Vec<BigUint> = Vec::with_capacity(n);
    let mut x = Rational::zero();
    for k in 1..=n {
        x = ip.eval(&x);
        let digits =
            decimal_digits(x.numer().magnitude()).max(decimal_digits(x.denom().magnitude()));
        if digits > opts.digit_budget {
            return Err(ZsigmondyError::DigitBudgetExceeded {
                n: k,
                digits,
                budget: opts.digit_budget,
                partial: Box::new(seq),
            });
        }
        if let Some(&earlier) = seen.get(&x) {
            return Err(ZsigmondyError::Preperiodic { n: k, earlier });
        }
        seen.insert(x.clone(), k);
        let ideal = ideal_pair(&x);
        let split = primitive_split(&ideal.a, &history);
        history.push(ideal.a.clone());
        seq.records.push(OrbitRecord {
            n: k,
            primitive: split.has_primitive_divisor(),
            value: x.clone(),
            ideal,
            split,
        });
    }
    Ok(seq)
}

/// `{ n ≤ N : Aₙ has no primitive divisor }`. Indices with `Aₙ = 1` count.
pub fn zsigmondy_set(seq: &OrbitSequence, n: usize) -> BTreeSet<usize> {
    assert!(seq.len() >= n, "sequence has only {} records", seq.len());
    seq.records[..n]
        .iter()
        .filter(|r| !r.primitive)
        .map(|r| r.n)
        .collect()
}
