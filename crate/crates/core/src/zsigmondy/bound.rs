use super::ZsigmondyError;

/// Inputs to the explicit bound `M` on the size of the Zsigmondy set.
///
/// `b` stands for `c₃(d) + c₄(d)·h(ψ)`; `h_psi` is carried for reporting
/// only since it enters through `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub d: u32,
    pub h_psi: f64,
    pub h_psi_tilde: f64,
    pub hhat0: f64,
    pub b: f64,
    pub gamma: f64,
    pub s_size: usize,
}

/// `M = 1 + x_term + i_term + j_term`, where `x_term` bounds `#X`, `1 + i_term`
/// bounds `#I`, and `j_term = j_gamma + j_height` bounds `#J`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundBreakdown {
    pub one: f64,
    pub x_term: f64,
    pub i_term: f64,
    pub j_term: f64,
    /// `4^{#S}·γ`
    pub j_gamma: f64,
    /// `log_d(h(ψ̃)/ĥ + 1)`
    pub j_height: f64,
    pub m: f64,
    pub x_set: XSet,
    pub i_set: ISet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct XSet {
    pub members: Vec<u64>,
    /// `log_d⁺(8B/ĥ)`
    pub threshold: f64,
    /// Whether `n = 0` satisfies the predicate (it always does).
    pub contains_zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ISet {
    pub members: Vec<u64>,
    /// Last index examined.
    pub scanned_to: u64,
    /// `1 + 8B/((3d − 7)ĥ)`, the cardinality bound from the proof.
    pub proof_bound: f64,
    pub contains_zero: bool,
    pub warnings: Vec<String>,
}

fn check_inputs(d: u32, b: f64, hhat0: f64) -> Result<(), ZsigmondyError> {
    if !b.is_finite() || b < 0.0 {
        return Err(ZsigmondyError::InvalidInput(format!(
            "B must be finite and ≥ 0, got {b}"
        )));
    }
    if !(hhat0 > 0.0 && hhat0.is_finite()) {
        return Err(ZsigmondyError::InvalidInput(format!(
            "canonical height must be positive and finite, got {hhat0}"
        )));
    }
    if d < 2 {
        return Err(ZsigmondyError::DegreeTooSmall(d as usize));
    }
    Ok(())
}

/// `log_d max{1, x}`.
pub fn log_d_plus(d: u32, x: f64) -> f64 {
    x.max(1.0).ln() / (d as f64).ln()
}

/// `X = { n ≥ 1 : n ≤ log_d⁺(8B/ĥ) }`, tested as `dⁿ ≤ 8B/ĥ`.
pub fn enumerate_x(d: u32, b: f64, hhat0: f64) -> Result<XSet, ZsigmondyError> {
    check_inputs(d, b, hhat0)?;
    let ratio = 8.0 * b / hhat0;
    let df = d as f64;
    let mut members = Vec::new();
    let mut n = 1u64;
    let mut pow = df;
    while pow <= ratio {
        members.push(n);
        n += 1;
        pow *= df;
    }
    Ok(XSet {
        members,
        threshold: log_d_plus(d, ratio),
        contains_zero: true,
    })
}

/// The ratio whose `≥ 1` defines membership in `I`:
/// `[(n − 1)B + ĥ(dⁿ − d)/(d − 1)] / ((3/4)ĥdⁿ)`.
pub fn i_ratio(d: u32, b: f64, hhat0: f64, n: u64) -> f64 {
    let df = d as f64;
    let nf = n as f64;
    // divided through by dⁿ to stay finite for large n
    let inv = df.powf(-nf);
    (4.0 / 3.0) * ((nf - 1.0) * b * inv / hhat0 + (1.0 - df * inv) / (df - 1.0))
}

/// Hard stop for the automatic scan window.
const I_SCAN_CAP: u64 = 1_000_000;

/// Scans `1 ≤ n ≤ n_max` for membership in `I`. With `n_max = None` the scan
/// stops once `(4/3)[(n−1)B/(ĥdⁿ) + 1/(d−1)] < 1` at some `n ≥ 2`; that upper
/// envelope decreases from there on, so no later `n` can qualify.
pub fn enumerate_i(d: u32, b: f64, hhat0: f64, n_max: Option<u64>) -> Result<ISet, ZsigmondyError> {
    check_inputs(d, b, hhat0)?;
    if d < 3 {
        return Err(ZsigmondyError::DegreeTooSmall(d as usize));
    }
    let df = d as f64;
    let limit = n_max.unwrap_or(I_SCAN_CAP);
    let mut members = Vec::new();
    let mut warnings = Vec::new();
    let mut n = 1u64;
    let mut last = 0;
    while n <= limit {
        last = n;
        if i_ratio(d, b, hhat0, n) >= 1.0 {
            members.push(n);
        }
        let envelope =
            (4.0 / 3.0) * ((n as f64 - 1.0) * b * df.powf(-(n as f64)) / hhat0 + 1.0 / (df - 1.0));
        if n_max.is_none() && n >= 2 && envelope < 1.0 {
            break;
        }
        n += 1;
    }
    if members.last() == Some(&last) {
        warnings.push(format!(
            "I-predicate still holds at the end of the scan window (n = {last}); the set may be larger"
        ));
    }
    Ok(ISet {
        members,
        scanned_to: last,
        proof_bound: 1.0 + 8.0 * b / ((3.0 * df - 7.0) * hhat0),
        contains_zero: i_ratio(d, b, hhat0, 0) >= 1.0,
        warnings,
    })
}

/// `M = 1 + log_d⁺(8B/ĥ) + 8B/((3d−7)ĥ) + 4^{#S}γ + log_d(h(ψ̃)/ĥ + 1)`.
pub fn bound_m(inputs: &BoundInputs) -> Result<BoundBreakdown, ZsigmondyError> {
    let BoundInputs {
        d,
        h_psi_tilde,
        hhat0,
        b,
        gamma,
        s_size,
        ..
    } = *inputs;
    if d < 3 {
        return Err(ZsigmondyError::DegreeTooSmall(d as usize));
    }
    check_inputs(d, b, hhat0)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ZsigmondyError::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if s_size < 1 {
        return Err(ZsigmondyError::InvalidInput(
            "#S counts ∞, so it is at least 1".into(),
        ));
    }
    if !(h_psi_tilde >= 0.0 && h_psi_tilde.is_finite()) {
        return Err(ZsigmondyError::InvalidInput(format!(
            "h(ψ̃) must be finite and ≥ 0, got {h_psi_tilde}"
        )));
    }
    let df = d as f64;
    let x_term = log_d_plus(d, 8.0 * b / hhat0);
    let i_term = 8.0 * b / ((3.0 * df - 7.0) * hhat0);
    let j_gamma = 4f64.powi(s_size as i32) * gamma;
    let j_height = (h_psi_tilde / hhat0 + 1.0).ln() / df.ln();
    let j_term = j_gamma + j_height;
    Ok(BoundBreakdown {
        one: 1.0,
        x_term,
        i_term,
        j_term,
        j_gamma,
        j_height,
        m: 1.0 + x_term + i_term + j_term,
        x_set: enumerate_x(d, b, hhat0)?,
        i_set: enumerate_i(d, b, hhat0, None)?,
    })
}
