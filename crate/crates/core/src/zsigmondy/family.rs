use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::divisibility::{
    factor, prime_to_s_norm, strip_common, valuation, FactorBudget, FactorSource,
};
use crate::heights::{Place, PlaceSet};
use crate::ratfield::{gcd_big, squarefree_decomposition, Polynomial, Rational};

use super::{build_sequence, SequenceOptions, ZsigmondyError};

/// One factor `(z·f(z) + a)^e`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyFactor {
    pub f: Polynomial,
    pub a: BigInt,
    pub e: u32,
}

/// `φ(z) = ∏ (z·fᵢ(z) + aᵢ)^{eᵢ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySpec {
    pub factors: Vec<FamilyFactor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    TooFewFactors(usize),
    ExponentTooSmall {
        index: usize,
        e: u32,
    },
    NoLargeConstant,
    NonIntegral {
        index: usize,
    },
    IntegerRoot {
        index: usize,
        root: BigInt,
    },
    /// The constant term could not be factored, so integer roots could not
    /// be ruled out.
    RootsUndecided {
        index: usize,
    },
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::TooFewFactors(m) => write!(f, "m < 2 (m = {m})"),
            Hypothesis::ExponentTooSmall { index, e } => write!(f, "e_{index} = {e} < 2"),
            Hypothesis::NoLargeConstant => f.write_str("all |a_i| ≤ 1"),
            Hypothesis::NonIntegral { index } => {
                write!(f, "f_{index} has a non-integer coefficient")
            }
            Hypothesis::IntegerRoot { index, root } => {
                write!(f, "f_{index} has the integer root {root}")
            }
            Hypothesis::RootsUndecided { index } => {
                write!(f, "could not decide whether f_{index} has integer roots")
            }
        }
    }
}

impl FamilySpec {
    pub fn m(&self) -> usize {
        self.factors.len()
    }

    /// `E = max eᵢ`.
    pub fn max_exponent(&self) -> u32 {
        self.factors.iter().map(|f| f.e).max().unwrap_or(0)
    }

    /// The base `z·fᵢ(z) + aᵢ` of factor `i` (1-based).
    pub fn base(&self, i: usize) -> Polynomial {
        let fac = &self.factors[i - 1];
        &(&Polynomial::z() * &fac.f) + &Polynomial::constant(Rational::from_integer(fac.a.clone()))
    }

    pub fn bases(&self) -> Vec<Polynomial> {
        (1..=self.m()).map(|i| self.base(i)).collect()
    }

    /// All hypotheses, first failure reported.
    pub fn validate(&self) -> Result<(), Hypothesis> {
        if self.m() < 2 {
            return Err(Hypothesis::TooFewFactors(self.m()));
        }
        for (i, fac) in self.factors.iter().enumerate() {
            if fac.e < 2 {
                return Err(Hypothesis::ExponentTooSmall {
                    index: i + 1,
                    e: fac.e,
                });
            }
        }
        if self.factors.iter().all(|f| f.a.abs() <= BigInt::one()) {
            return Err(Hypothesis::NoLargeConstant);
        }
        for (i, fac) in self.factors.iter().enumerate() {
            if !fac.f.is_integral() {
                return Err(Hypothesis::NonIntegral { index: i + 1 });
            }
            match integer_root(&fac.f) {
                Some(Ok(root)) => return Err(Hypothesis::IntegerRoot { index: i + 1, root }),
                Some(Err(())) => return Err(Hypothesis::RootsUndecided { index: i + 1 }),
                None => {}
            }
        }
        Ok(())
    }
}

/// An integer root of `f`, if any. Candidates are `±` divisors of `f(0)`;
/// `Some(Err(()))` when `f(0)` cannot be factored to list them.
fn integer_root(f: &Polynomial) -> Option<Result<BigInt, ()>> {
    if f.is_zero() {
        return Some(Ok(BigInt::zero()));
    }
    let c0 = f.coeff(0);
    if c0.is_zero() {
        return Some(Ok(BigInt::zero()));
    }
    if f.deg() == 0 {
        return None;
    }
    let fac = factor(c0.numer().magnitude(), &FactorBudget::default());
    if !fac.is_complete() {
        return Some(Err(()));
    }
    let mut divisors = vec![BigUint::one()];
    for (p, e) in &fac.factors {
        let mut next = Vec::with_capacity(divisors.len() * (*e as usize + 1));
        for d in &divisors {
            let mut pk = d.clone();
            for _ in 0..=*e {
                next.push(pk.clone());
                pk *= p;
            }
        }
        divisors = next;
    }
    divisors.sort();
    for d in divisors {
        for r in [BigInt::from(d.clone()), -BigInt::from(d)] {
            if f.eval(&Rational::from_integer(r.clone())).is_zero() {
                return Some(Ok(r));
            }
        }
    }
    None
}

/// The expanded product, after checking every hypothesis.
pub fn family_build(spec: &FamilySpec) -> Result<Polynomial, ZsigmondyError> {
    spec.validate()
        .map_err(ZsigmondyError::HypothesisViolated)?;
    Ok(spec
        .factors
        .iter()
        .enumerate()
        .fold(Polynomial::one(), |acc, (i, fac)| {
            &acc * &spec.base(i + 1).pow(fac.e)
        }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FixedOrWandering {
    Fixed,
    Wandering,
}

/// Fixed iff `φ(0) = ∏ aᵢ^{eᵢ} = 0`.
pub fn fixed_or_wandering(spec: &FamilySpec) -> FixedOrWandering {
    if spec.factors.iter().any(|f| f.a.is_zero()) {
        FixedOrWandering::Fixed
    } else {
        FixedOrWandering::Wandering
    }
}

/// `αₙ = (2ⁿ(m − 1)mⁿ⁻¹ + 2m) / (2m − 1)`, always an integer.
pub fn growth_exponent(m: u64, n: u32) -> BigUint {
    assert!(m >= 1 && n >= 1);
    let m = BigUint::from(m);
    let num = (BigUint::one() << n) * (&m - 1u32) * num_traits::pow(m.clone(), n as usize - 1)
        + &m * 2u32;
    let den = &m * 2u32 - 1u32;
    debug_assert!((&num % &den).is_zero());
    num / den
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthStep {
    pub n: usize,
    pub bits: u64,
    /// `|φⁿ(0)| > |φⁿ⁻¹(0)|²` (reported true for `n = 1`).
    pub squares: bool,
    pub alpha_n: BigUint,
    /// `|φⁿ(0)| ≥ max |aⱼ|^{αₙ}`.
    pub alpha_bound: bool,
    /// `bits(Aₙ) > 2·bits(Aₙ₋₁) − 2`.
    pub bit_shadow: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub holds: bool,
    /// `|φ(0)|² ≥ 4`.
    pub base_at_least_4: bool,
    pub steps: Vec<GrowthStep>,
}

/// `|φⁿ(0)| > |φⁿ⁻¹(0)|² ≥ |φ(0)|² ≥ 4` for `2 ≤ n ≤ N`, plus the exponent
/// floor `|φⁿ(0)| ≥ max |aⱼ|^{αₙ}` for `1 ≤ n ≤ N`.
pub fn growth_check(
    spec: &FamilySpec,
    n: usize,
    opts: &SequenceOptions,
) -> Result<GrowthReport, ZsigmondyError> {
    let phi = family_build(spec)?;
    if fixed_or_wandering(spec) == FixedOrWandering::Fixed {
        return Err(ZsigmondyError::Preperiodic { n: 1, earlier: 0 });
    }
    let seq = build_sequence(&phi, &Rational::zero(), n, opts)?;
    let terms = seq.a_terms();
    let amax = spec
        .factors
        .iter()
        .map(|f| f.a.magnitude().clone())
        .max()
        .unwrap();
    let m = spec.m() as u64;
    let mut steps = Vec::with_capacity(n);
    for (i, a) in terms.iter().enumerate() {
        let k = i + 1;
        let alpha_n = growth_exponent(m, k as u32);
        let (squares, bit_shadow) = if k == 1 {
            (true, true)
        } else {
            let prev = &terms[i - 1];
            (*a > prev * prev, a.bits() + 2 > 2 * prev.bits())
        };
        steps.push(GrowthStep {
            n: k,
            bits: a.bits(),
            squares,
            alpha_bound: power_at_most(&amax, &alpha_n, a),
            alpha_n,
            bit_shadow,
        });
    }
    let base = &terms[0] * &terms[0];
    let base_at_least_4 = base >= BigUint::from(4u32);
    Ok(GrowthReport {
        holds: base_at_least_4
            && steps
                .iter()
                .all(|s| s.squares && s.alpha_bound && s.bit_shadow),
        base_at_least_4,
        steps,
    })
}

/// `base^exp ≤ bound`, without building powers far larger than `bound`.
fn power_at_most(base: &BigUint, exp: &BigUint, bound: &BigUint) -> bool {
    if base.is_zero() || base.is_one() {
        return BigUint::one() <= *bound || base.is_zero();
    }
    // base ≥ 2, so base^exp has at least exp + 1 bits
    let too_big = exp.to_u64().is_none_or(|e| e > bound.bits());
    if too_big {
        return false;
    }
    let e = exp.to_u64().unwrap() as usize;
    if (base.bits() - 1) as u128 * e as u128 > bound.bits() as u128 {
        return false;
    }
    num_traits::pow(base.clone(), e) <= *bound
}

/// `{∞} ∪ {primes dividing a coefficient denominator of some factor}`.
pub fn theorem15_place_set(factors: &[Polynomial]) -> Result<PlaceSet, ZsigmondyError> {
    if factors.is_empty() {
        return Err(ZsigmondyError::InvalidInput(
            "need at least one factor".into(),
        ));
    }
    let lcm = factors
        .iter()
        .flat_map(|f| f.coeffs().iter())
        .fold(BigUint::one(), |acc, c| acc.lcm(c.denom().magnitude()));
    let f = factor(&lcm, &FactorBudget::default());
    if !f.is_complete() {
        return Err(ZsigmondyError::Unfactored(f.cofactor));
    }
    let mut s = PlaceSet::infinity_only();
    for p in f.factors.into_keys() {
        s.insert(Place::Finite(p));
    }
    Ok(s)
}

/// A group of primes outside `S` treated as one unit: either a named prime
/// or a block of unnamed primes sharing the same support in the sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PrimeGroup {
    Prime(BigUint),
    Block(BigUint),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityEntry {
    pub group: PrimeGroup,
    /// Rank of apparition: least `n` with the group dividing `Aₙ`.
    pub rank: usize,
    /// `ord_p(A_r)` for a named prime; 0 for a block.
    pub valuation: u32,
    /// Indices where the required equality or vanishing failed.
    pub failures: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    /// `E`, the largest multiplicity in the squarefree decomposition of `φ`.
    pub e: u32,
    /// `r` where `φ^r(0) | φ′(φ^{r−1}(0))^E` failed in the `S`-integers.
    pub divisibility_failures: Vec<usize>,
    /// Leftovers that neither factoring nor block refinement could place.
    pub untested: Vec<BigUint>,
}

impl StabilityReport {
    pub fn failure_count(&self) -> usize {
        self.entries.iter().map(|e| e.failures.len()).sum::<usize>()
            + self.divisibility_failures.len()
    }

    pub fn passed(&self) -> bool {
        self.failure_count() == 0 && self.untested.is_empty()
    }

    pub fn named_primes(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.iter().filter_map(|e| match &e.group {
            PrimeGroup::Prime(p) => Some(p),
            PrimeGroup::Block(_) => None,
        })
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BigUint> {
        self.entries.iter().filter_map(|e| match &e.group {
            PrimeGroup::Block(b) => Some(b),
            PrimeGroup::Prime(_) => None,
        })
    }
}

/// For every prime `p ∉ S` dividing some `φⁿ(0)`, `n ≤ N`, with rank `r`:
/// `ord_p(φ^{jr}(0)) = ord_p(φ^r(0))` and `ord_p(φᵏ(0)) = 0` for `r ∤ k`.
/// Also checks `φ^r(0) | φ′(φ^{r−1}(0))^E` in the `S`-integers for every
/// `r ≤ N`.
///
/// Terms are factored within the budget. What remains is split by gcds
/// against every term into blocks whose primes divide exactly the same
/// terms; a block is checked by comparing its full-power parts, which
/// certifies the valuation equalities for each of its primes at once.
pub fn valuation_stability_check<F: FactorSource + ?Sized>(
    phi: &Polynomial,
    s: &PlaceSet,
    n: usize,
    opts: &SequenceOptions,
    source: &F,
) -> Result<StabilityReport, ZsigmondyError> {
    let seq = build_sequence(phi, &Rational::zero(), n, opts)?;
    let terms: Vec<BigUint> = seq
        .a_terms()
        .iter()
        .map(|a| prime_to_s_norm(a, s))
        .collect();
    let e = squarefree_decomposition(phi).max_multiplicity();

    let mut primes: BTreeMap<BigUint, ()> = BTreeMap::new();
    let mut leftovers: Vec<BigUint> = Vec::new();
    for a in &terms {
        if a.is_one() {
            continue;
        }
        let f = source.factor(a);
        primes.extend(f.factors.into_keys().map(|p| (p, ())));
        if !f.cofactor.is_one() {
            leftovers.push(f.cofactor);
        }
    }

    let mut report = StabilityReport {
        e,
        ..StabilityReport::default()
    };
    for p in primes.keys() {
        let v: Vec<u32> = terms.iter().map(|a| valuation(a, p)).collect();
        let r = v.iter().position(|&x| x > 0).unwrap() + 1;
        let failures = (1..=n)
            .filter(|k| {
                let want = if k % r == 0 { v[r - 1] } else { 0 };
                v[k - 1] != want
            })
            .collect();
        report.entries.push(StabilityEntry {
            group: PrimeGroup::Prime(p.clone()),
            rank: r,
            valuation: v[r - 1],
            failures,
        });
    }

    // unnamed primes: strip the named ones, then refine into blocks
    let mut rest = leftovers.iter().fold(BigUint::one(), |acc, c| acc.lcm(c));
    for p in primes.keys() {
        while (&rest % p).is_zero() {
            rest /= p;
        }
    }
    if !rest.is_one() {
        for block in refine_blocks(rest, &terms) {
            let parts: Vec<BigUint> = terms.iter().map(|a| smooth_part(a, &block)).collect();
            let Some(r0) = parts.iter().position(|x| !x.is_one()) else {
                report.untested.push(block);
                continue;
            };
            let r = r0 + 1;
            let failures = (1..=n)
                .filter(|k| {
                    if k % r == 0 {
                        parts[k - 1] != parts[r - 1]
                    } else {
                        !parts[k - 1].is_one()
                    }
                })
                .collect();
            report.entries.push(StabilityEntry {
                group: PrimeGroup::Block(block),
                rank: r,
                valuation: 0,
                failures,
            });
        }
    }

    let dphi = phi.derivative();
    let mut prev = Rational::zero();
    for (i, rec) in seq.records.iter().enumerate() {
        let der = dphi.eval(&prev);
        if !divides_power_s(&terms[i], &der, e, s) {
            report.divisibility_failures.push(i + 1);
        }
        prev = rec.value.clone();
    }
    Ok(report)
}

/// Splits `c` into pairwise coprime blocks such that all primes of a block
/// divide exactly the same members of `terms`.
fn refine_blocks(c: BigUint, terms: &[BigUint]) -> Vec<BigUint> {
    let mut blocks = vec![c];
    for a in terms {
        let mut next = Vec::with_capacity(blocks.len() * 2);
        for mut b in blocks {
            let g = gcd_big(&b, a);
            if g.is_one() {
                next.push(b);
                continue;
            }
            let inside = strip_common(&mut b, &g);
            next.push(inside);
            if !b.is_one() {
                next.push(b);
            }
        }
        blocks = next;
    }
    blocks
}

/// The largest divisor of `x` built only from primes of `block`.
fn smooth_part(x: &BigUint, block: &BigUint) -> BigUint {
    let mut y = x.clone();
    strip_common(&mut y, block)
}

/// `a | num(b)^E` after removing primes of `S`, and `den(b)` is an `S`-unit.
fn divides_power_s(a: &BigUint, b: &Rational, e: u32, s: &PlaceSet) -> bool {
    if !prime_to_s_norm(b.denom().magnitude(), s).is_one() {
        return false;
    }
    let bn = b.numer().magnitude();
    if bn.is_zero() {
        return true;
    }
    // each round removes min(ord_p a, ord_p b) from a
    let mut rest = a.clone();
    for _ in 0..e {
        let g = gcd_big(&rest, bn);
        if g.is_one() {
            break;
        }
        rest /= g;
    }
    rest.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfield::rat;

    fn poly(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    fn fac(f: &[i64], a: i64, e: u32) -> FamilyFactor {
        FamilyFactor {
            f: poly(f),
            a: a.into(),
            e,
        }
    }

    fn instance1() -> FamilySpec {
        FamilySpec {
            factors: vec![fac(&[1], 2, 2), fac(&[1], 3, 2)],
        }
    }

    #[test]
    fn build_examples() {
        assert_eq!(
            family_build(&instance1()).unwrap(),
            poly(&[36, 60, 37, 10, 1])
        );
        let bad = FamilySpec {
            factors: vec![fac(&[1], 1, 2), fac(&[1], -1, 2)],
        };
        assert!(matches!(
            family_build(&bad),
            Err(ZsigmondyError::HypothesisViolated(
                Hypothesis::NoLargeConstant
            ))
        ));
        let rooted = FamilySpec {
            factors: vec![fac(&[-4, 1], 2, 2), fac(&[1], 3, 2)],
        };
        match family_build(&rooted) {
            Err(ZsigmondyError::HypothesisViolated(Hypothesis::IntegerRoot { index: 1, root })) => {
                assert_eq!(root, BigInt::from(4))
            }
            other => panic!("unexpected {other:?}"),
        }
        let single = FamilySpec {
            factors: vec![fac(&[1], 1, 2)],
        };
        match family_build(&single) {
            Err(ZsigmondyError::HypothesisViolated(h)) => {
                assert_eq!(h.to_string(), "m < 2 (m = 1)")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixed_or_wandering_examples() {
        assert_eq!(
            fixed_or_wandering(&instance1()),
            FixedOrWandering::Wandering
        );
        let z = FamilySpec {
            factors: vec![fac(&[1], 0, 2), fac(&[1], 3, 2)],
        };
        assert_eq!(fixed_or_wandering(&z), FixedOrWandering::Fixed);
        let neg = FamilySpec {
            factors: vec![fac(&[1], -2, 2), fac(&[1], 3, 2)],
        };
        assert_eq!(fixed_or_wandering(&neg), FixedOrWandering::Wandering);
    }

    #[test]
    fn growth_exponents() {
        assert_eq!(growth_exponent(2, 1), BigUint::from(2u32));
        let expect = [2u32, 4, 12, 44, 172];
        for (n, want) in expect.iter().enumerate() {
            assert_eq!(growth_exponent(2, n as u32 + 1), BigUint::from(*want));
        }
        for m in 2..6u64 {
            for n in 2..8u32 {
                let prev = growth_exponent(m, n - 1);
                assert_eq!(growth_exponent(m, n), (prev - 1u32) * (2 * m));
            }
        }
    }

    #[test]
    fn growth_on_instance1() {
        let r = growth_check(&instance1(), 4, &SequenceOptions::default()).unwrap();
        assert!(r.holds && r.base_at_least_4);
        assert_eq!(r.steps.len(), 4);
    }

    #[test]
    fn place_set_examples() {
        assert_eq!(
            theorem15_place_set(&[poly(&[2, 1])]).unwrap(),
            PlaceSet::infinity_only()
        );
        let f = Polynomial::new(vec![rat(1, 6), rat(1, 1)]);
        assert_eq!(theorem15_place_set(&[f]).unwrap().to_string(), "{∞, 2, 3}");
        let f = Polynomial::new(vec![rat(1, 2), rat(1, 1)]);
        let g = Polynomial::new(vec![rat(3, 5), rat(1, 1)]);
        assert_eq!(
            theorem15_place_set(&[f, g]).unwrap().to_string(),
            "{∞, 2, 5}"
        );
    }

    #[test]
    fn stability_on_instance1() {
        let phi = family_build(&instance1()).unwrap();
        let r = valuation_stability_check(
            &phi,
            &PlaceSet::infinity_only(),
            4,
            &SequenceOptions::default(),
            &FactorBudget::default(),
        )
        .unwrap();
        assert_eq!(r.e, 2);
        assert!(r.passed(), "{r:?}");
        let two = r
            .entries
            .iter()
            .find(|e| e.group == PrimeGroup::Prime(2u32.into()))
            .unwrap();
        assert_eq!((two.rank, two.valuation), (1, 2));
        let p13 = r
            .entries
            .iter()
            .find(|e| e.group == PrimeGroup::Prime(13u32.into()))
            .unwrap();
        assert_eq!((p13.rank, p13.valuation), (2, 2));
    }

    #[test]
    fn blocks_certify_unfactored_terms() {
        let phi = family_build(&instance1()).unwrap();
        let tiny = FactorBudget {
            trial_bound: 10,
            rho_iterations: 0,
            ..FactorBudget::default()
        };
        let r = valuation_stability_check(
            &phi,
            &PlaceSet::infinity_only(),
            5,
            &SequenceOptions::default(),
            &tiny,
        )
        .unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.blocks().count() > 0);
    }

    #[test]
    fn refine_separates_supports() {
        let terms: Vec<BigUint> = [6u32, 35, 10].map(BigUint::from).to_vec();
        let mut blocks = refine_blocks(BigUint::from(2u32 * 3 * 5 * 7 * 11), &terms);
        blocks.sort();
        assert_eq!(blocks, [2u32, 3, 5, 7, 11].map(BigUint::from).to_vec());
        let blocks = refine_blocks(BigUint::from(3u32 * 7), &terms);
        assert_eq!(blocks.len(), 2);
    }

    #[test]
    fn divides_power_examples() {
        let s = PlaceSet::infinity_only();
        assert!(divides_power_s(&BigUint::from(36u32), &rat(6, 1), 2, &s));
        assert!(!divides_power_s(&BigUint::from(72u32), &rat(6, 1), 2, &s));
        assert!(divides_power_s(&BigUint::from(1u32), &rat(6, 1), 2, &s));
        assert!(!divides_power_s(&BigUint::from(4u32), &rat(2, 3), 2, &s));
    }
}
