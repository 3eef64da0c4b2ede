//! Budgeted integer factorization: trial division, Miller–Rabin, and
//! Pollard rho in Brent's formulation.
//!
//! Everything is deterministic for a fixed [`FactorBudget`]: the rho
//! polynomial and starting point for a composite `m` are drawn from a
//! ChaCha stream keyed by `seed` and the low bits of `m`, so the order in
//! which composites are visited does not change the result.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ratfield::gcd_big;

/// Effort limits for [`factor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorBudget {
    /// Trial division by every prime up to this bound.
    pub trial_bound: u64,
    /// Total rho iterations (polynomial evaluations) spent per call.
    pub rho_iterations: u64,
    /// Remainders above this size are left in the cofactor untouched: neither
    /// primality testing nor rho is attempted on them.
    pub rho_max_bits: u64,
    pub seed: u64,
}

impl Default for FactorBudget {
    fn default() -> Self {
        FactorBudget {
            trial_bound: 1_000_000,
            rho_iterations: 1_000_000,
            rho_max_bits: 1024,
            seed: 0x5eed_2024,
        }
    }
}

/// `∏ p^e · cofactor = n`; the cofactor collects what the budget could not
/// split (composites, or remainders too large to test) and is 1 when the
/// factorization is complete.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Factorization {
    pub factors: BTreeMap<BigUint, u32>,
    pub cofactor: BigUint,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.cofactor.is_one()
    }

    pub fn reconstruct(&self) -> BigUint {
        self.factors
            .iter()
            .fold(self.cofactor.clone(), |acc, (p, e)| {
                acc * num_traits::pow(p.clone(), *e as usize)
            })
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.keys()
    }

    fn push(&mut self, p: BigUint, e: u32) {
        *self.factors.entry(p).or_insert(0) += e;
    }
}

/// Anything that can produce a [`Factorization`]; lets callers slot a cache
/// in front of the budgeted algorithm.
pub trait FactorSource {
    fn factor(&self, n: &BigUint) -> Factorization;
}

impl FactorSource for FactorBudget {
    fn factor(&self, n: &BigUint) -> Factorization {
        factor(n, self)
    }
}

impl<T: FactorSource + ?Sized> FactorSource for &T {
    fn factor(&self, n: &BigUint) -> Factorization {
        (**self).factor(n)
    }
}

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
/// Below this bound the 13 prime bases above make Miller–Rabin deterministic.
const MR_DETERMINISTIC_LIMIT: &str = "3317044064679887385961981";
const EXTRA_MR_ROUNDS: usize = 16;

fn mr_limit() -> &'static BigUint {
    static LIMIT: OnceLock<BigUint> = OnceLock::new();
    LIMIT.get_or_init(|| MR_DETERMINISTIC_LIMIT.parse().unwrap())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'base: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn mr_round(n: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let n1 = n - 1u32;
    let mut x = a.modpow(d, n);
    if x.is_one() || x == n1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n1 {
            return true;
        }
    }
    false
}

/// Miller–Rabin: deterministic below 3.3·10²⁴, and with 16 further
/// pseudo-random bases (fixed per `n`) above it.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    for p in small_primes(1000) {
        if (n % *p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    for a in MR_BASES {
        if !mr_round(n, &d, s, &BigUint::from(a)) {
            return false;
        }
    }
    if n >= mr_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(low_u64(n) ^ 0x9e37_79b9_7f4a_7c15);
        let span = n - 4u32;
        for _ in 0..EXTRA_MR_ROUNDS {
            let a = random_below(&mut rng, &span) + 2u32;
            if !mr_round(n, &d, s, &a) {
                return false;
            }
        }
    }
    true
}

fn low_u64(n: &BigUint) -> u64 {
    n.iter_u64_digits().next().unwrap_or(0)
}

fn random_below(rng: &mut ChaCha8Rng, bound: &BigUint) -> BigUint {
    let words = bound.iter_u32_digits().count() + 1;
    let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
    BigUint::new(digits) % bound
}

/// Primes up to `bound`, sieved once per distinct bound.
pub fn small_primes(bound: u64) -> &'static [u32] {
    static DEFAULT: OnceLock<Vec<u32>> = OnceLock::new();
    static SMALL: OnceLock<Vec<u32>> = OnceLock::new();
    match bound {
        1000 => SMALL.get_or_init(|| sieve(1000)),
        1_000_000 => DEFAULT.get_or_init(|| sieve(1_000_000)),
        _ => Box::leak(sieve(bound).into_boxed_slice()),
    }
}

fn sieve(bound: u64) -> Vec<u32> {
    let bound = bound.min(u32::MAX as u64) as usize;
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for i in 2..=bound {
        if composite[i] {
            continue;
        }
        out.push(i as u32);
        let mut j = i * i;
        while j <= bound {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Largest `e` with `p^e | n`, for `n ≥ 1` and `p ≥ 2`.
pub fn valuation(n: &BigUint, p: &BigUint) -> u32 {
    assert!(*p > BigUint::one(), "valuation base must be at least 2");
    if n.is_zero() {
        return u32::MAX;
    }
    let mut e = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return e;
        }
        m = q;
        e += 1;
    }
}

/// Factors `n ≥ 1` within `budget`. Never fails: whatever the budget cannot
/// split ends up in the cofactor.
pub fn factor(n: &BigUint, budget: &FactorBudget) -> Factorization {
    assert!(!n.is_zero(), "factor() needs n ≥ 1");
    let mut out = Factorization {
        factors: BTreeMap::new(),
        cofactor: BigUint::one(),
    };
    let mut rem = n.clone();
    trial_divide(&mut rem, budget.trial_bound, &mut out);
    if rem.is_one() {
        return out;
    }

    let mut spent = 0u64;
    let mut stack = vec![rem];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if m.bits() > budget.rho_max_bits {
            out.cofactor *= m;
            continue;
        }
        if is_prime(&m) {
            out.push(m, 1);
            continue;
        }
        if let Some((root, k)) = perfect_power(&m) {
            for _ in 0..k {
                stack.push(root.clone());
            }
            continue;
        }
        match rho_split(&m, budget, &mut spent) {
            Some(d) => {
                let q = &m / &d;
                stack.push(d);
                stack.push(q);
            }
            None => out.cofactor *= m,
        }
    }
    out
}

/// Strips every prime `p ≤ bound` from `rem`. Large values are reduced
/// modulo products of consecutive primes that fit in a `u64`, so a long
/// number is scanned once per product rather than once per prime.
fn trial_divide(rem: &mut BigUint, bound: u64, out: &mut Factorization) {
    let primes = small_primes(bound);
    let mut i = 0;
    while i < primes.len() && !rem.is_one() {
        if let Some(r) = rem.to_u64() {
            let mut r = r;
            let mut exhausted = true;
            for &p in &primes[i..] {
                let p = p as u64;
                if p.saturating_mul(p) > r {
                    exhausted = false;
                    break;
                }
                if r % p == 0 {
                    let mut e = 0;
                    while r % p == 0 {
                        r /= p;
                        e += 1;
                    }
                    out.push(BigUint::from(p), e);
                }
            }
            if exhausted {
                *rem = BigUint::from(r);
            } else {
                if r > 1 {
                    out.push(BigUint::from(r), 1);
                }
                *rem = BigUint::one();
            }
            return;
        }
        let mut prod = 1u64;
        let mut j = i;
        while j < primes.len() {
            match prod.checked_mul(primes[j] as u64) {
                Some(v) => prod = v,
                None => break,
            }
            j += 1;
        }
        let r = (&*rem % prod).to_u64().unwrap();
        for &p in &primes[i..j] {
            if r.is_multiple_of(p as u64) {
                let mut e = 0;
                while (&*rem % p).is_zero() {
                    *rem /= p;
                    e += 1;
                }
                out.push(BigUint::from(p), e);
            }
        }
        i = j;
    }
}

/// `m = root^k` with the largest such `k ≥ 2`, if any.
fn perfect_power(m: &BigUint) -> Option<(BigUint, usize)> {
    let bits = m.bits();
    for k in (2..=bits.min(64) as u32).rev() {
        let r = m.nth_root(k);
        if num_traits::pow(r.clone(), k as usize) == *m {
            return Some((r, k as usize));
        }
    }
    None
}

fn rho_split(n: &BigUint, budget: &FactorBudget, spent: &mut u64) -> Option<BigUint> {
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed ^ low_u64(n).rotate_left(17));
    while *spent < budget.rho_iterations {
        let left = budget.rho_iterations - *spent;
        let (d, used) = match n.to_u64() {
            Some(v) => {
                let c = rng.gen_range(1..v);
                let y0 = rng.gen_range(0..v);
                let (d, used) = brent_u64(v, c, y0, left);
                (d.map(BigUint::from), used)
            }
            None => {
                let c = random_below(&mut rng, &(n - 1u32)) + 1u32;
                let y0 = random_below(&mut rng, n);
                brent_big(n, &c, y0, left)
            }
        };
        *spent += used;
        if let Some(d) = d {
            if !d.is_one() && d != *n {
                return Some(d);
            }
        }
    }
    None
}

const BATCH: u64 = 128;

fn brent_u64(n: u64, c: u64, y0: u64, limit: u64) -> (Option<u64>, u64) {
    let f = |y: u64| ((y as u128 * y as u128 + c as u128) % n as u128) as u64;
    let (mut y, mut x, mut ys) = (y0, y0, y0);
    let (mut g, mut r, mut q, mut used) = (1u64, 1u64, 1u64, 0u64);
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        used += r;
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            used += steps;
            g = q.gcd(&n);
            k += BATCH;
        }
        r *= 2;
        if used > limit {
            return (None, used);
        }
    }
    if g == n {
        loop {
            ys = f(ys);
            used += 1;
            g = x.abs_diff(ys).gcd(&n);
            if g > 1 || used > limit {
                break;
            }
        }
    }
    ((g > 1 && g < n).then_some(g), used)
}

fn brent_big(n: &BigUint, c: &BigUint, y0: BigUint, limit: u64) -> (Option<BigUint>, u64) {
    let f = |y: &BigUint| (y * y + c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a >= b { a - b } else { b - a };
    let mut y = y0;
    let mut x = y.clone();
    let mut ys = y.clone();
    let mut g = BigUint::one();
    let mut q = BigUint::one();
    let (mut r, mut used) = (1u64, 0u64);
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        used += r;
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                q = (q * diff(&x, &y)) % n;
            }
            used += steps;
            g = gcd_big(&q, n);
            k += BATCH;
        }
        r *= 2;
        if used > limit {
            return (None, used);
        }
    }
    if g == *n {
        loop {
            ys = f(&ys);
            used += 1;
            g = gcd_big(&diff(&x, &ys), n);
            if !g.is_one() || used > limit {
                break;
            }
        }
    }
    ((!g.is_one() && g != *n).then_some(g), used)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(s: &str) -> BigUint {
        s.parse().unwrap()
    }

    fn fac(n: u64) -> Vec<(u64, u32)> {
        factor(&BigUint::from(n), &FactorBudget::default())
            .factors
            .iter()
            .map(|(p, e)| (p.to_u64().unwrap(), *e))
            .collect()
    }

    #[test]
    fn small_examples() {
        assert_eq!(fac(458330), vec![(2, 1), (5, 1), (45833, 1)]);
        assert_eq!(fac(1), vec![]);
        assert_eq!(fac(2196324), vec![(2, 2), (3, 2), (13, 2), (19, 2)]);
        assert_eq!(fac(210066388901), vec![(41, 1), (1277, 1), (4012193, 1)]);
    }

    #[test]
    fn primality_agrees_with_sieve() {
        let primes: std::collections::HashSet<u32> = small_primes(20000).iter().copied().collect();
        for n in 0..20000u64 {
            assert_eq!(
                is_prime(&BigUint::from(n)),
                primes.contains(&(n as u32)),
                "n = {n}"
            );
        }
    }

    #[test]
    fn primality_of_large_values() {
        // 2^89 − 1 and 2^127 − 1 are Mersenne primes
        let m89 = (BigUint::one() << 89u32) - 1u32;
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_prime(&m89));
        assert!(is_prime(&m127));
        assert!(!is_prime(&(&m89 * &m127)));
        // strong pseudoprime to bases 2..37, caught by base 41
        assert!(!is_prime(&big("3825123056546413051")));
        assert!(is_prime(&big("282273128144695230227")));
    }

    #[test]
    fn rho_splits_mid_sized_semiprimes() {
        let p = big("1000000007");
        let q = big("998244353");
        let r = big("4012193");
        let n = &p * &q * &r;
        let f = factor(&n, &FactorBudget::default());
        assert!(f.is_complete());
        assert_eq!(f.reconstruct(), n);
        assert_eq!(f.factors.len(), 3);
        let n = big("19113842599189892819591078");
        let f = factor(&n, &FactorBudget::default());
        assert!(f.is_complete());
        assert!(f.factors.contains_key(&big("282273128144695230227")));
    }

    #[test]
    fn budget_exhaustion_leaves_cofactor() {
        // two 40-digit primes: far out of reach of rho at this budget
        let p = big("1000000000000000000000000000000000000003");
        let q = big("1000000000000000000000000000000000000037");
        assert!(is_prime(&p) && is_prime(&q));
        let n = &p * &q * 12u32;
        let budget = FactorBudget {
            rho_iterations: 20_000,
            ..FactorBudget::default()
        };
        let f = factor(&n, &budget);
        assert!(!f.is_complete());
        assert_eq!(f.cofactor, &p * &q);
        assert_eq!(f.factors.get(&BigUint::from(2u32)), Some(&2));
        assert_eq!(f.factors.get(&BigUint::from(3u32)), Some(&1));
        assert_eq!(f.reconstruct(), n);
    }

    #[test]
    fn prime_powers_beyond_trial_bound() {
        let p = big("1000000007");
        let n = num_traits::pow(p.clone(), 3) * num_traits::pow(big("998244353"), 2);
        let f = factor(&n, &FactorBudget::default());
        assert_eq!(f.factors.get(&p), Some(&3));
        assert_eq!(f.reconstruct(), n);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let n = big("1000000016000000063") * big("2147483647");
        let b = FactorBudget::default();
        assert_eq!(factor(&n, &b), factor(&n, &b));
    }

    #[test]
    fn valuation_examples() {
        let v = |n: u64, p: u64| valuation(&BigUint::from(n), &BigUint::from(p));
        assert_eq!(v(12, 2), 2);
        assert_eq!(v(12, 5), 0);
        assert_eq!(v(2196324, 2), 2);
        assert_eq!(v(1, 3), 0);
    }
}
