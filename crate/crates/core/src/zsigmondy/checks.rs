use std::collections::HashSet;

use crate::divisibility::prime_to_s_norm;
use crate::heights::{
    canonical_height_with, sum_local_at_infinity, HeightEstimate, HeightOptions, PlaceSet,
};
use crate::ratfield::{decimal_digits, log_biguint, IntegralPoly, Polynomial, ProjPoint, Rational};

use super::bound::enumerate_x;
use super::{OrbitSequence, ZsigmondyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Wandering,
    Preperiodic,
    Unknown,
}

/// Outcome of an inequality check evaluated with interval-valued heights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Holds,
    Violated,
    /// The decision depends on where ĥ sits inside its error bound.
    Ambiguous,
}

impl Check {
    /// True unless definitely violated.
    pub fn passes(self) -> bool {
        self != Check::Violated
    }
}

/// Preperiodic if the orbit of `α` repeats within `probe` steps; wandering
/// if the certified lower end of `ĥ_φ(α)` is positive; unknown otherwise.
pub fn wandering_verdict(
    phi: &Polynomial,
    alpha: &Rational,
    probe: usize,
    tol: f64,
    opts: &HeightOptions,
) -> Result<Verdict, ZsigmondyError> {
    let d = phi.deg();
    if d < 2 {
        return Err(ZsigmondyError::DegreeTooSmall(d));
    }
    let ip = IntegralPoly::from_poly(phi);
    let mut seen = HashSet::new();
    let mut x = alpha.clone();
    seen.insert(x.clone());
    for _ in 0..probe {
        x = ip.eval(&x);
        if !seen.insert(x.clone()) {
            return Ok(Verdict::Preperiodic);
        }
        let size = x.numer().magnitude().max(x.denom().magnitude());
        if decimal_digits(size) > opts.digit_budget {
            break;
        }
    }
    let est = canonical_height_with(phi, alpha, tol, opts)?;
    Ok(if est.lower() > 0.0 {
        Verdict::Wandering
    } else {
        Verdict::Unknown
    })
}

/// Relative slack absorbing rounding in the logarithms compared below.
const LOG_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JMembership {
    pub member: bool,
    pub ambiguous: bool,
    /// `Σ_{v∈S′} λ_v(Qₙ, ∞)`
    pub local_sum: f64,
    /// `(1/8)·dⁿ·ĥ` at the estimate's value.
    pub threshold: f64,
}

/// `n ∈ J(S′, ψ̃)` with `Qₙ = [1 : ψⁿ(0)]` and `ĥ_{ψ̃}(Qₙ) = dⁿ·ĥ_ψ(0)`.
/// Comparisons inside the error bound count as members and set `ambiguous`.
pub fn j_membership(
    seq: &OrbitSequence,
    n: usize,
    places: &PlaceSet,
    hhat0: &HeightEstimate,
) -> Result<JMembership, ZsigmondyError> {
    let rec = seq.record(n).ok_or(ZsigmondyError::MissingRecord(n))?;
    let q = ProjPoint::inverted(&rec.value);
    let lhs = sum_local_at_infinity(&q, places)?;
    let scale = (seq.degree() as f64).powi(n as i32) / 8.0;
    let lo = scale * hhat0.lower();
    let hi = scale * hhat0.upper();
    let slack = LOG_SLACK * lhs.abs().max(hi.abs()).max(1.0);
    let (member, ambiguous) = if lhs >= hi + slack {
        (true, false)
    } else if lhs < lo - slack {
        (false, false)
    } else {
        (true, true)
    };
    Ok(JMembership {
        member,
        ambiguous,
        local_sum: lhs,
        threshold: scale * hhat0.value,
    })
}

/// `log Aₙ ≤ dⁿ·ĥ_ψ(0) + B`.
pub fn lemma31_check(
    seq: &OrbitSequence,
    n: usize,
    b: f64,
    hhat0: &HeightEstimate,
) -> Result<Check, ZsigmondyError> {
    let rec = seq.record(n).ok_or(ZsigmondyError::MissingRecord(n))?;
    let lhs = log_biguint(&rec.ideal.a).max(0.0);
    let dn = (seq.degree() as f64).powi(n as i32);
    Ok(compare_le(
        lhs,
        dn * hhat0.lower() + b,
        dn * hhat0.upper() + b,
    ))
}

/// Holds if `lhs ≤ lo`, violated if `lhs > hi`, with rounding slack.
fn compare_le(lhs: f64, lo: f64, hi: f64) -> Check {
    let slack = LOG_SLACK * lhs.abs().max(hi.abs()).max(1.0);
    if lhs <= lo - slack {
        Check::Holds
    } else if lhs > hi + slack {
        Check::Violated
    } else {
        Check::Ambiguous
    }
}

/// For `n ∉ X ∪ J`, `(3/4)·ĥ·dⁿ < log 𝒩_{S′}(Aₙ)`; vacuous otherwise.
///
/// `gamma_free` controls whether empirical J members are excluded. With it
/// off only `X` is excluded, so the inequality is tested at J members too.
pub fn lemma35_check(
    seq: &OrbitSequence,
    n: usize,
    places: &PlaceSet,
    b: f64,
    hhat0: &HeightEstimate,
    gamma_free: bool,
) -> Result<Check, ZsigmondyError> {
    let rec = seq.record(n).ok_or(ZsigmondyError::MissingRecord(n))?;
    let d = seq.degree() as u32;
    // X membership from both ends of the ĥ interval
    let x_sure = enumerate_x(d, b, hhat0.upper().max(f64::MIN_POSITIVE))?;
    let x_maybe = enumerate_x(d, b, hhat0.lower().max(f64::MIN_POSITIVE))?;
    let n64 = n as u64;
    if x_sure.members.contains(&n64) {
        return Ok(Check::Holds);
    }
    let mut uncertain = x_maybe.members.contains(&n64);
    if gamma_free {
        let j = j_membership(seq, n, places, hhat0)?;
        if j.member && !j.ambiguous {
            return Ok(Check::Holds);
        }
        uncertain |= j.ambiguous;
    }
    let log_norm = log_biguint(&prime_to_s_norm(&rec.ideal.a, places)).max(0.0);
    let dn = (d as f64).powi(n as i32);
    // (3/4)ĥdⁿ < log 𝒩 is the mirror of log 𝒩 ≤ (3/4)ĥdⁿ
    let c = match compare_le(
        log_norm,
        0.75 * dn * hhat0.lower(),
        0.75 * dn * hhat0.upper(),
    ) {
        Check::Holds => Check::Violated,
        Check::Violated => Check::Holds,
        Check::Ambiguous => Check::Ambiguous,
    };
    Ok(if c == Check::Violated && uncertain {
        Check::Ambiguous
    } else {
        c
    })
}
