use super::{Polynomial, Rational};

/// `f = unit · ∏ qᵢ^{mᵢ}` with monic, squarefree, pairwise coprime `qᵢ`
/// listed by strictly increasing multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct SquarefreeDecomposition {
    pub unit: Rational,
    pub factors: Vec<(Polynomial, u32)>,
}

impl SquarefreeDecomposition {
    pub fn reconstruct(&self) -> Polynomial {
        self.factors
            .iter()
            .fold(Polynomial::constant(self.unit.clone()), |acc, (q, m)| {
                &acc * &q.pow(*m)
            })
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.factors.iter().map(|(_, m)| *m).max().unwrap_or(0)
    }
}

/// Yun's algorithm over ℚ.
pub fn squarefree_decomposition(f: &Polynomial) -> SquarefreeDecomposition {
    let unit = f.leading();
    let mut factors = Vec::new();
    if f.deg() == 0 {
        return SquarefreeDecomposition { unit, factors };
    }
    let f = f.monic();
    let df = f.derivative();
    let a0 = f.gcd(&df);
    let mut b = f.div_rem(&a0).0;
    let c = df.div_rem(&a0).0;
    let mut d = &c - &b.derivative();
    let mut mult = 1u32;
    while b.deg() > 0 {
        let a = b.gcd(&d);
        if a.deg() > 0 {
            factors.push((a.clone(), mult));
        }
        b = b.div_rem(&a).0;
        let c = d.div_rem(&a).0;
        d = &c - &b.derivative();
        mult += 1;
    }
    SquarefreeDecomposition { unit, factors }
}

/// `deg f ≥ 2` and every irreducible factor divides `f` at least twice.
///
/// Multiplicity ≥ 2 on every squarefree part is equivalent to the statement
/// about irreducible factors, so no factorization over ℚ is needed.
pub fn is_powerful(f: &Polynomial) -> bool {
    if f.is_zero() || f.deg() < 2 {
        return false;
    }
    squarefree_decomposition(f)
        .factors
        .iter()
        .all(|(_, m)| *m >= 2)
}
