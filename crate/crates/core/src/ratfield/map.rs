use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{Polynomial, ProjPoint, Rational};

/// `numerator / denominator` with coprime polynomial parts.
#[derive(Clone, Debug)]
pub struct RationalMap {
    numerator: Polynomial,
    denominator: Polynomial,
}

impl RationalMap {
    /// Reduces by the polynomial gcd. Panics if both parts are zero or the
    /// denominator alone is zero.
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Self {
        assert!(!denominator.is_zero(), "rational map with zero denominator");
        let g = numerator.gcd(&denominator);
        let (numerator, denominator) = if g.deg() > 0 {
            (numerator.div_rem(&g).0, denominator.div_rem(&g).0)
        } else {
            (numerator, denominator)
        };
        RationalMap {
            numerator,
            denominator,
        }
    }

    pub fn from_polynomial(f: &Polynomial) -> Self {
        RationalMap {
            numerator: f.clone(),
            denominator: Polynomial::one(),
        }
    }

    /// `1 / ψ(1/z) = z^d / (z^d ψ(1/z))` for `d = deg ψ`.
    pub fn reversed(psi: &Polynomial) -> Self {
        let d = psi.deg();
        Self::new(Polynomial::monomial(Rational::one(), d), psi.reversal())
    }

    /// `z ↦ 1/z`.
    pub fn inversion() -> Self {
        RationalMap {
            numerator: Polynomial::one(),
            denominator: Polynomial::z(),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn degree(&self) -> usize {
        self.numerator.deg().max(self.denominator.deg())
    }

    /// The induced morphism of ℙ¹: `[X : Y] ↦ [Y^d f(X/Y) : Y^d g(X/Y)]`.
    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let d = self.degree();
        let (x, y) = (p.x(), p.y());
        let lcm = self
            .numerator
            .denominator_lcm()
            .lcm(&self.denominator.denominator_lcm());
        let homog = |f: &Polynomial| -> BigInt {
            let mut acc = BigInt::zero();
            for (i, c) in f.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let ci = (c * Rational::from_integer(lcm.clone())).to_integer();
                acc += ci * num_traits::pow(x.clone(), i) * num_traits::pow(y.clone(), d - i);
            }
            acc
        };
        ProjPoint::new(homog(&self.numerator), homog(&self.denominator))
            .expect("coprime numerator and denominator have no common zero")
    }
}

impl PartialEq for RationalMap {
    fn eq(&self, other: &Self) -> bool {
        &self.numerator * &other.denominator == &other.numerator * &self.denominator
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfield::{rat, rat_int};

    fn p(c: &[i64]) -> Polynomial {
        Polynomial::from_ints(c)
    }

    #[test]
    fn reversal_examples() {
        for c in [1i64, -3, 7] {
            let m = RationalMap::reversed(&p(&[c, 0, 1]));
            assert_eq!(m, RationalMap::new(p(&[0, 0, 1]), p(&[1, 0, c])));
            assert_eq!(m.degree(), 2);
        }
        let m = RationalMap::reversed(&p(&[0, 0, 1]));
        assert_eq!(m.numerator(), &p(&[0, 0, 1]));
        assert_eq!(m.denominator(), &p(&[1]));
        let m = RationalMap::reversed(&p(&[1, 2, 1]));
        assert_eq!(m, RationalMap::new(p(&[0, 0, 1]), p(&[1, 2, 1])));
    }

    #[test]
    fn new_cancels_common_factors() {
        let m = RationalMap::new(p(&[2, 1]) * p(&[0, 1]), p(&[2, 1]) * p(&[1, 1]));
        assert_eq!(m.numerator().deg(), 1);
        assert_eq!(m.denominator().deg(), 1);
    }

    #[test]
    fn reversed_map_sends_infinity_along_inverted_orbit() {
        // ψ̃ⁿ(∞) = [1 : ψⁿ(0)]
        let psi = p(&[1, 0, 1]);
        let tilde = RationalMap::reversed(&psi);
        let mut q = ProjPoint::infinity();
        let mut v = rat_int(0);
        for _ in 0..4 {
            q = tilde.apply(&q);
            v = psi.eval(&v);
            assert_eq!(q, ProjPoint::inverted(&v));
        }
        let frac = Polynomial::new(vec![rat(1, 2), rat(-1, 3), rat(2, 1)]);
        let tilde = RationalMap::reversed(&frac);
        let mut q = ProjPoint::infinity();
        let mut v = rat_int(0);
        for _ in 0..3 {
            q = tilde.apply(&q);
            v = frac.eval(&v);
            assert_eq!(q, ProjPoint::inverted(&v));
        }
    }
}
