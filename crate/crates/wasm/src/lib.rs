//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON string;
//! errors come back as a thrown string. The `*_json` functions hold the
//! logic so they can be tested natively.

use dynzsig_cli::expr::{parse_poly, parse_rational};
use dynzsig_core::heights::{canonical_height_with, rational_height, HeightOptions};
use dynzsig_core::ratfield::{decimal_digits, Polynomial, Rational};
use dynzsig_core::zsigmondy::{
    bound_m, build_sequence, zsigmondy_set, BoundInputs, SequenceOptions, ZsigmondyError,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Keeps a single call well under a second in the browser.
pub const DEMO_DIGIT_BUDGET: u64 = 20_000;
pub const MAX_TERMS: usize = 16;

fn poly(text: &str) -> Result<Polynomial, String> {
    let phi = parse_poly(text).map_err(|e| e.to_string())?.expand();
    if phi.deg() < 2 {
        return Err(format!("degree {} is below 2", phi.deg()));
    }
    Ok(phi)
}

fn short(x: &impl ToString) -> String {
    let s = x.to_string();
    if s.len() <= 24 {
        s
    } else {
        format!("{}…{} ({} digits)", &s[..10], &s[s.len() - 6..], s.len())
    }
}

fn to_string(v: Value) -> String {
    serde_json::to_string(&v).unwrap()
}

/// Terms of `φⁿ(α) − α` with their primitive and non-primitive parts.
pub fn orbit_table_json(poly_text: &str, alpha: &str, n: usize) -> Result<String, String> {
    let phi = poly(poly_text)?;
    let alpha = parse_rational(alpha).map_err(|e| e.to_string())?;
    let n = n.clamp(1, MAX_TERMS);
    let opts = SequenceOptions {
        digit_budget: DEMO_DIGIT_BUDGET,
    };
    let (seq, stopped) = match build_sequence(&phi, &alpha, n, &opts) {
        Ok(s) => (s, None),
        Err(ZsigmondyError::DigitBudgetExceeded {
            n, digits, partial, ..
        }) => (
            *partial,
            Some(format!("term {n} would have {digits} digits")),
        ),
        Err(e) => return Err(e.to_string()),
    };
    let rows: Vec<Value> = seq
        .records
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "a": short(&r.ideal.a),
                "digits": decimal_digits(&r.ideal.a),
                "primitive_part": short(&r.split.primitive_part),
                "nonprimitive_part": short(&r.split.nonprimitive_part),
                "primitive": r.primitive,
            })
        })
        .collect();
    let zs: Vec<usize> = zsigmondy_set(&seq, seq.len()).into_iter().collect();
    Ok(to_string(json!({
        "polynomial": phi.to_string(),
        "rows": rows,
        "zsigmondy_set": zs,
        "stopped": stopped,
    })))
}

/// The bound `M` and its summands.
pub fn bound_breakdown_json(
    d: u32,
    b: f64,
    hhat: f64,
    htilde: f64,
    gamma: f64,
    s_size: usize,
) -> Result<String, String> {
    let r = bound_m(&BoundInputs {
        d,
        h_psi: 0.0,
        h_psi_tilde: htilde,
        hhat0: hhat,
        b,
        gamma,
        s_size,
    })
    .map_err(|e| e.to_string())?;
    Ok(to_string(json!({
        "M": r.m,
        "summands": {
            "one": r.one,
            "x_term": r.x_term,
            "i_term": r.i_term,
            "j_gamma": r.j_gamma,
            "j_height": r.j_height,
        },
        "x_set": r.x_set.members,
        "i_set": r.i_set.members,
    })))
}

/// `h(φⁿ(α))/dⁿ` for successive `n`, next to the canonical height it
/// approaches.
pub fn height_convergence_json(
    poly_text: &str,
    alpha: &str,
    steps: usize,
) -> Result<String, String> {
    let phi = poly(poly_text)?;
    let alpha = parse_rational(alpha).map_err(|e| e.to_string())?;
    let d = phi.deg() as f64;
    let mut x = alpha.clone();
    let mut ratios = vec![rational_height(&x)];
    for n in 1..=steps.min(MAX_TERMS) {
        x = phi.eval(&x);
        if size_digits(&x) > DEMO_DIGIT_BUDGET {
            break;
        }
        ratios.push(rational_height(&x) / d.powi(n as i32));
    }
    let opts = HeightOptions {
        digit_budget: DEMO_DIGIT_BUDGET,
        bound: None,
    };
    let est = canonical_height_with(&phi, &alpha, 1e-6, &opts).map_err(|e| e.to_string())?;
    Ok(to_string(json!({
        "ratios": ratios,
        "canonical_height": est.value,
        "error_bound": est.error_bound,
        "truncated": est.truncated,
    })))
}

fn size_digits(x: &Rational) -> u64 {
    decimal_digits(x.numer().magnitude()).max(decimal_digits(x.denom().magnitude()))
}

#[wasm_bindgen]
pub fn orbit_table(poly: &str, alpha: &str, n: usize) -> Result<String, JsValue> {
    orbit_table_json(poly, alpha, n).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn bound_breakdown(
    d: u32,
    b: f64,
    hhat: f64,
    htilde: f64,
    gamma: f64,
    s_size: usize,
) -> Result<String, JsValue> {
    bound_breakdown_json(d, b, hhat, htilde, gamma, s_size).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn height_convergence(poly: &str, alpha: &str, steps: usize) -> Result<String, JsValue> {
    height_convergence_json(poly, alpha, steps).map_err(JsValue::from)
}
