mod common;

use common::horner;
use dynzsig_core::ratfield::{
    is_powerful, squarefree_decomposition, IntegralPoly, Polynomial, ProjPoint, Rational,
    RationalMap,
};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=12).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn rational_poly(max_deg: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), 1..=max_deg + 1)
}

fn int_poly(max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(-6i64..=6, 2..=max_deg + 1).prop_map(|c| Polynomial::from_ints(&c))
}

proptest! {
    #[test]
    fn integral_eval_matches_horner(c in rational_poly(5), x in small_rational()) {
        let f = Polynomial::new(c.clone());
        prop_assert_eq!(IntegralPoly::from_poly(&f).eval(&x), horner(&c, &x));
        prop_assert_eq!(f.eval(&x), horner(&c, &x));
    }

    #[test]
    fn iterated_eval_matches_horner(c in rational_poly(3), x in small_rational()) {
        let f = Polynomial::new(c.clone());
        let ip = IntegralPoly::from_poly(&f);
        let (mut a, mut b) = (x.clone(), x);
        for _ in 0..4 {
            a = ip.eval(&a);
            b = horner(&c, &b);
            prop_assert_eq!(&a, &b);
        }
    }

    #[test]
    fn conjugate_is_shifted_map(c in rational_poly(4), alpha in small_rational(), x in small_rational()) {
        let phi = Polynomial::new(c.clone());
        let psi = phi.conjugate(&alpha);
        prop_assert_eq!(psi.eval(&x), horner(&c, &(&x + &alpha)) - &alpha);
    }

    #[test]
    fn derivative_obeys_product_rule(f in int_poly(4), g in int_poly(4)) {
        let lhs = (&f * &g).derivative();
        let rhs = &(&f.derivative() * &g) + &(&f * &g.derivative());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn division_identity(f in int_poly(6), g in int_poly(3)) {
        prop_assume!(!g.is_zero());
        let (q, r) = f.div_rem(&g);
        prop_assert_eq!(&(&q * &g) + &r, f);
        prop_assert!(r.is_zero() || r.deg() < g.deg());
    }

    #[test]
    fn gcd_divides_both(f in int_poly(4), g in int_poly(4), h in int_poly(2)) {
        prop_assume!(!h.is_zero() && !f.is_zero() && !g.is_zero());
        let a = &f * &h;
        let b = &g * &h;
        let d = a.gcd(&b);
        prop_assert!(d.divides(&a) && d.divides(&b));
        prop_assert!(h.divides(&d));
    }

    #[test]
    fn squarefree_reconstructs(f in int_poly(3), g in int_poly(2), e1 in 1u32..4, e2 in 1u32..4) {
        prop_assume!(!f.is_zero() && !g.is_zero() && f.deg() > 0);
        let p = &f.pow(e1) * &g.pow(e2);
        let sf = squarefree_decomposition(&p);
        prop_assert_eq!(sf.reconstruct(), p.clone());
        for (q, _) in &sf.factors {
            prop_assert_eq!(q.leading(), Rational::one());
            prop_assert!(q.gcd(&q.derivative()).deg() == 0);
        }
        if e1 >= 2 && e2 >= 2 {
            prop_assert!(is_powerful(&p));
        }
    }

    #[test]
    fn reversed_map_tracks_inverted_orbit(c in rational_poly(3)) {
        let psi = Polynomial::new(c);
        prop_assume!(psi.deg() >= 2);
        let tilde = RationalMap::reversed(&psi);
        let mut q = ProjPoint::infinity();
        let mut v = Rational::zero();
        for _ in 0..3 {
            q = tilde.apply(&q);
            v = psi.eval(&v);
            prop_assert_eq!(&q, &ProjPoint::inverted(&v));
        }
    }

    #[test]
    fn display_round_trips_through_coefficients(c in rational_poly(4)) {
        // printing is injective on polynomials: distinct inputs print differently
        let f = Polynomial::new(c);
        let g = &f + &Polynomial::one();
        prop_assert_ne!(f.to_string(), g.to_string());
    }
}
