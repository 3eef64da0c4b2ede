use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{gcd_big, Rational};

/// Dense univariate polynomial over ℚ, coefficients from degree 0 upward.
///
/// Trailing zero coefficients are never stored, so the zero polynomial has
/// an empty coefficient list and structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| Rational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The identity map `z`.
    pub fn z() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; convenient where the
    /// caller has already excluded zero.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let inv = self.leading().recip();
        self.scale(&inv)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `self(inner(z))`.
    pub fn compose(&self, inner: &Polynomial) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// `φ(z + α) − α`.
    pub fn conjugate(&self, alpha: &Rational) -> Self {
        let shift = Self::new(vec![alpha.clone(), Rational::one()]);
        &self.compose(&shift) - &Self::constant(alpha.clone())
    }

    /// Coefficients of `z^d·f(1/z)` for `d = deg f`.
    pub fn reversal(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    /// Exact value at `x`, reduced.
    pub fn eval(&self, x: &Rational) -> Rational {
        IntegralPoly::from_poly(self).eval(x)
    }

    /// Quotient and remainder over ℚ. Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = divisor.leading().recip();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let top = rem.len() - 1;
            let q = &rem[top] * &lead_inv;
            let shift = top - dd;
            if !q.is_zero() {
                for (i, dc) in divisor.coeffs.iter().enumerate() {
                    rem[shift + i] = &rem[shift + i] - &q * dc;
                }
            }
            quot[shift] = q;
            rem.pop();
        }
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    pub fn divides(&self, other: &Polynomial) -> bool {
        other.div_rem(self).1.is_zero()
    }

    /// Monic gcd over ℚ (zero only when both inputs are zero).
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Prints in the grammar the CLI parser accepts, highest degree first:
/// `z^2 + 2*z + 1`, `-3/4*z^3 - 1/2`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let mono = match i {
                0 => String::new(),
                1 => "z".to_string(),
                k => format!("z^{k}"),
            };
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

/// `f = (Σ cᵢ zⁱ) / D` with integer `cᵢ`, `D > 0` and `gcd(content, D) = 1`.
///
/// Evaluating through this form keeps the homogeneous numerator and
/// denominator as integers and cancels their (provably small) common factor
/// without a big gcd, which is what makes iterating to 10⁵-digit orbit values
/// cheap.
#[derive(Clone, Debug)]
pub struct IntegralPoly {
    coeffs: Vec<BigInt>,
    denom: BigInt,
    /// `D · c_d^d`; every cancellation `gcd(F(a,b), D·b^d)` divides it.
    cancel_bound: BigUint,
}

impl IntegralPoly {
    pub fn from_poly(f: &Polynomial) -> Self {
        let lcm = f.denominator_lcm();
        let mut coeffs: Vec<BigInt> = f
            .coeffs()
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let content = coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        let mut denom = lcm;
        if !content.is_zero() {
            let g = content.gcd(&denom);
            if !g.is_one() {
                for c in coeffs.iter_mut() {
                    *c /= &g;
                }
                denom /= &g;
            }
        }
        let d = coeffs.len().saturating_sub(1);
        let lead = coeffs.last().cloned().unwrap_or_else(BigInt::one);
        let cancel_bound =
            (denom.magnitude() * num_traits::pow(lead.magnitude().clone(), d)).clone();
        IntegralPoly {
            coeffs,
            denom,
            cancel_bound,
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    /// Homogeneous numerator `F(a, b) = Σ cᵢ aⁱ b^{d−i}` and denominator `D·b^d`,
    /// before cancellation.
    pub fn eval_homogeneous(&self, a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
        if self.coeffs.is_empty() {
            return (BigInt::zero(), BigInt::one());
        }
        let d = self.coeffs.len() - 1;
        let mut bpow = Vec::with_capacity(d + 1);
        bpow.push(BigInt::one());
        for k in 1..=d {
            let next = &bpow[k - 1] * b;
            bpow.push(next);
        }
        let mut acc = self.coeffs[d].clone();
        for i in (0..d).rev() {
            acc *= a;
            let c = &self.coeffs[i];
            if !c.is_zero() {
                acc += c * &bpow[d - i];
            }
        }
        (acc, &self.denom * &bpow[d])
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let (num, den) = self.eval_homogeneous(x.numer(), x.denom());
        if num.is_zero() {
            return Rational::zero();
        }
        let g0 = gcd_big(&(num.magnitude() % &self.cancel_bound), &self.cancel_bound);
        if g0.is_one() {
            return Rational::new_raw(num, den);
        }
        let g = gcd_big(&(den.magnitude() % &g0), &g0);
        if g.is_one() {
            return Rational::new_raw(num, den);
        }
        let g = BigInt::from(g);
        Rational::new_raw(num / &g, den / &g)
    }
}
