//! Polynomial expressions in `z`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := '-'? factor ('*' factor)*
//! factor := atom ('^' nat)?
//! atom   := rational | 'z' | '(' expr ')'
//! ```
//!
//! Whitespace is ignored. Positions in errors are character offsets into the
//! original text.

use std::fmt;

use dynzsig_core::ratfield::{Polynomial, Rational};
use dynzsig_core::zsigmondy::{FamilyFactor, FamilySpec};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn expand(&self) -> Polynomial {
        match self {
            Expr::Num(c) => Polynomial::constant(c.clone()),
            Expr::Var => Polynomial::z(),
            Expr::Neg(e) => -&e.expand(),
            Expr::Add(a, b) => &a.expand() + &b.expand(),
            Expr::Sub(a, b) => &a.expand() - &b.expand(),
            Expr::Mul(a, b) => &a.expand() * &b.expand(),
            Expr::Pow(a, e) => a.expand().pow(*e),
        }
    }
}

/// Fully parenthesized, so printing and reparsing gives the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if c.is_negative() => write!(f, "(-{})", -c),
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("z"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Pow(a, e) => write!(f, "{a}^{e}"),
        }
    }
}

/// `(base, exponent)` pairs of a product of powers.
type Factors = Vec<(Expr, u32)>;

/// A parsed polynomial, plus its factors when the input is a plain product
/// `b₁^{e₁} * b₂^{e₂} * …`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyExpr {
    pub ast: Expr,
    pub factored: Option<Vec<(Expr, u32)>>,
}

impl PolyExpr {
    pub fn expand(&self) -> Polynomial {
        self.ast.expand()
    }

    /// Reads each factor `bᵢ^{eᵢ}` as `z·fᵢ(z) + aᵢ` with `aᵢ = bᵢ(0)`.
    pub fn family_spec(&self) -> Result<FamilySpec, FamilyFormError> {
        let factors = self.factored.as_ref().ok_or(FamilyFormError::NotAProduct)?;
        let mut out = Vec::with_capacity(factors.len());
        for (i, (base, e)) in factors.iter().enumerate() {
            let b = base.expand();
            let a = b.coeff(0);
            if !a.is_integer() {
                return Err(FamilyFormError::NonIntegerConstant { index: i + 1, a });
            }
            let shifted = &b - &Polynomial::constant(a.clone());
            let (f, r) = shifted.div_rem(&Polynomial::z());
            debug_assert!(r.is_zero());
            out.push(FamilyFactor {
                f,
                a: a.to_integer(),
                e: *e,
            });
        }
        Ok(FamilySpec { factors: out })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyFormError {
    #[error("expected a product of powers such as (z+2)^2*(z+3)^2")]
    NotAProduct,
    #[error("a_{index} = {a} is not an integer")]
    NonIntegerConstant { index: usize, a: Rational },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("exponent error at offset {pos}: {msg}")]
    Exponent { pos: usize, msg: String },
}

impl ExprError {
    pub fn position(&self) -> usize {
        match self {
            ExprError::Parse { pos, .. } | ExprError::Exponent { pos, .. } => *pos,
        }
    }
}

pub fn parse_poly(text: &str) -> Result<PolyExpr, ExprError> {
    let mut p = Parser {
        chars: text
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .collect(),
        at: 0,
        len: text.chars().count(),
    };
    if p.chars.is_empty() {
        return Err(p.error("empty expression"));
    }
    let (ast, factored) = p.expr()?;
    if let Some(&(pos, c)) = p.chars.get(p.at) {
        return Err(ExprError::Parse {
            pos,
            msg: format!("unexpected '{c}'"),
        });
    }
    Ok(PolyExpr { ast, factored })
}

fn power(base: Expr, e: Option<u32>) -> Expr {
    match e {
        Some(e) => Expr::Pow(Box::new(base), e),
        None => base,
    }
}

struct Parser {
    chars: Vec<(usize, char)>,
    at: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.chars.get(self.at).map_or(self.len, |&(p, _)| p)
    }

    fn error(&self, msg: &str) -> ExprError {
        let msg = match self.peek() {
            Some(c) => format!("{msg}, found '{c}'"),
            None => format!("{msg}, found end of input"),
        };
        ExprError::Parse {
            pos: self.pos(),
            msg,
        }
    }

    /// The tree, and the factor list when the whole expression is one
    /// unsigned term.
    fn expr(&mut self) -> Result<(Expr, Option<Factors>), ExprError> {
        let (mut lhs, mut factors) = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.at += 1;
            let (rhs, _) = self.term()?;
            factors = None;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok((lhs, factors))
    }

    fn term(&mut self) -> Result<(Expr, Option<Factors>), ExprError> {
        let negate = self.peek() == Some('-');
        if negate {
            self.at += 1;
        }
        let (base, e) = self.factor()?;
        let mut lhs = power(base.clone(), e);
        let mut factors = vec![(base, e.unwrap_or(1))];
        while self.peek() == Some('*') {
            self.at += 1;
            let (base, e) = self.factor()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(power(base.clone(), e)));
            factors.push((base, e.unwrap_or(1)));
        }
        if negate {
            return Ok((Expr::Neg(Box::new(lhs)), None));
        }
        Ok((lhs, Some(factors)))
    }

    /// An atom and its exponent, if one is written.
    fn factor(&mut self) -> Result<(Expr, Option<u32>), ExprError> {
        let base = self.atom()?;
        if self.peek() != Some('^') {
            return Ok((base, None));
        }
        self.at += 1;
        let start = self.pos();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let digits = self.digits();
                let e: u32 = digits.parse().map_err(|_| ExprError::Exponent {
                    pos: start,
                    msg: format!("exponent {digits} is too large"),
                })?;
                Ok((base, Some(e)))
            }
            Some('-') => Err(ExprError::Exponent {
                pos: start,
                msg: "exponents must be nonnegative".into(),
            }),
            Some('z' | '(') => Err(ExprError::Exponent {
                pos: start,
                msg: "exponents must be integer literals".into(),
            }),
            _ => Err(self.error("expected an exponent")),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some('z') => {
                self.at += 1;
                Ok(Expr::Var)
            }
            Some('(') => {
                self.at += 1;
                let (inner, _) = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.at += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let num: BigInt = self.digits().parse().unwrap();
                if self.peek() != Some('/') {
                    return Ok(Expr::Num(Rational::from_integer(num)));
                }
                self.at += 1;
                if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    return Err(self.error("expected a denominator"));
                }
                let den_pos = self.pos();
                let den: BigInt = self.digits().parse().unwrap();
                if den.is_zero() {
                    return Err(ExprError::Parse {
                        pos: den_pos,
                        msg: "zero denominator".into(),
                    });
                }
                Ok(Expr::Num(Rational::new(num, den)))
            }
            _ => Err(self.error("expected a number, 'z' or '('")),
        }
    }

    fn digits(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.at += 1;
        }
        s
    }
}

/// `a/b` or `-a/b` as a rational, for point arguments.
pub fn parse_rational(text: &str) -> Result<Rational, ExprError> {
    match parse_poly(text)?.ast {
        Expr::Num(r) => Ok(r),
        Expr::Neg(inner) => match *inner {
            Expr::Num(r) => Ok(-r),
            _ => Err(not_rational(text)),
        },
        _ => Err(not_rational(text)),
    }
}

fn not_rational(text: &str) -> ExprError {
    ExprError::Parse {
        pos: 0,
        msg: format!("expected a rational number, got '{text}'"),
    }
}
