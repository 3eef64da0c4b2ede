use dynzsig_core::divisibility::{
    nonprimitive_bound_check, rigid_check, FactorSource, RigidCondition,
};
use dynzsig_core::heights::{
    canonical_height_with, height_comparison_bound, local_log_distance, map_height,
    polynomial_height, weil_height, HeightError, HeightEstimate, Place, PlaceSet,
};
use dynzsig_core::ratfield::{
    conjugate, decimal_digits, is_powerful, squarefree_decomposition, Polynomial, ProjPoint,
    Rational, RationalMap,
};
use dynzsig_core::zsigmondy::{
    bound_m, build_sequence, family_build, fixed_or_wandering, growth_check, j_membership,
    theorem15_place_set, valuation_stability_check, zsigmondy_set, BoundInputs, FamilySpec,
    FixedOrWandering, OrbitSequence, PrimeGroup, ZsigmondyError,
};
use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use crate::cache::FactorCache;
use crate::config::RunConfig;
use crate::expr::{parse_poly, parse_rational, PolyExpr};
use crate::report::{int, real, OrbitRow, Report};
use crate::{
    BoundArgs, Cli, Command, OrbitArgs, Outcome, EXIT_BUDGET, EXIT_CONFIG, EXIT_HYPOTHESIS, EXIT_OK,
};

/// Why a subcommand stopped early. Everything but `Config` still emits the
/// report built so far.
#[derive(Clone, Debug, PartialEq)]
pub enum Failure {
    Config(String),
    Hypothesis(String),
    Budget(String),
}

impl From<ZsigmondyError> for Failure {
    fn from(e: ZsigmondyError) -> Self {
        let msg = e.to_string();
        match e {
            ZsigmondyError::HypothesisViolated(h) => Failure::Hypothesis(h.to_string()),
            ZsigmondyError::DegreeTooSmall(_) | ZsigmondyError::Preperiodic { .. } => {
                Failure::Hypothesis(msg)
            }
            ZsigmondyError::DigitBudgetExceeded { .. } | ZsigmondyError::Unfactored(_) => {
                Failure::Budget(msg)
            }
            ZsigmondyError::Height(h) => h.into(),
            ZsigmondyError::EmptyRange
            | ZsigmondyError::MissingRecord(_)
            | ZsigmondyError::InvalidInput(_) => Failure::Config(msg),
        }
    }
}

impl From<HeightError> for Failure {
    fn from(e: HeightError) -> Self {
        match e {
            HeightError::DegreeTooSmall(_) => Failure::Hypothesis(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let cfg = cli.global.run_config();
    if let Err(e) = cfg.validate() {
        return config_error(e.to_string());
    }
    let (name, args) = describe(&cli.command);
    let mut config = cfg.to_json();
    config.as_object_mut().unwrap().extend(args);
    let mut report = Report::new(name, config);
    let cache = cfg
        .cache
        .as_ref()
        .map(|p| FactorCache::open(p, cfg.factor_budget()));
    let budget = cfg.factor_budget();
    let source: &dyn FactorSource = match &cache {
        Some(c) => c,
        None => &budget,
    };
    let outcome = match &cli.command {
        Command::Orbit(a) => orbit(a, &cfg, &mut report, false),
        Command::Zsigmondy(a) => orbit(a, &cfg, &mut report, true),
        Command::RigidCheck { orbit, places } => {
            rigid(orbit, &places.places, &cfg, source, &mut report)
        }
        Command::Heights {
            poly,
            alpha,
            places,
        } => heights(poly, alpha, &places.places, &cfg, &mut report),
        Command::Bound(a) => bound(a, &cfg, &mut report),
        Command::PowerfulCheck { poly } => powerful(poly, &mut report),
        Command::FamilyCheck { factors, n } => family(factors, *n, &cfg, source, &mut report),
    };
    if let Some(c) = &cache {
        report.warnings.extend(c.warnings());
    }
    let (code, diagnostic) = match outcome {
        Ok(()) => (EXIT_OK, None),
        Err(Failure::Config(msg)) => return config_error(msg),
        Err(Failure::Hypothesis(msg)) => {
            let line = format!("hypothesis violated: {msg}");
            insert(&mut report, "hypothesis_violated", Value::String(msg));
            (EXIT_HYPOTHESIS, Some(line))
        }
        Err(Failure::Budget(msg)) => {
            let line = format!("budget exhausted: {msg}; partial results follow");
            insert(&mut report, "budget_exhausted", Value::String(msg));
            (EXIT_BUDGET, Some(line))
        }
    };
    let mut stderr = String::new();
    for w in &report.warnings {
        stderr.push_str(&format!("warning: {w}\n"));
    }
    if let Some(d) = diagnostic {
        stderr.push_str(&d);
        stderr.push('\n');
    }
    match report.render(cfg.format) {
        Ok(stdout) => Outcome {
            code,
            stdout,
            stderr,
        },
        Err(msg) => config_error(msg),
    }
}

fn config_error(msg: String) -> Outcome {
    Outcome {
        code: EXIT_CONFIG,
        stdout: String::new(),
        stderr: format!("error: {msg}\n"),
    }
}

fn insert(report: &mut Report, key: &str, v: Value) {
    report
        .result
        .as_object_mut()
        .unwrap()
        .insert(key.to_string(), v);
}

/// Subcommand name and its inputs, for the report's config section.
fn describe(cmd: &Command) -> (&'static str, Map<String, Value>) {
    let orbit_args = |a: &OrbitArgs| {
        json!({"poly": a.poly, "alpha": a.alpha, "n": a.n})
            .as_object()
            .unwrap()
            .clone()
    };
    match cmd {
        Command::Orbit(a) => ("orbit", orbit_args(a)),
        Command::Zsigmondy(a) => ("zsigmondy", orbit_args(a)),
        Command::RigidCheck { orbit, places } => {
            let mut m = orbit_args(orbit);
            m.insert("places".into(), json!(places.places));
            ("rigid-check", m)
        }
        Command::Heights {
            poly,
            alpha,
            places,
        } => (
            "heights",
            json!({"poly": poly, "alpha": alpha, "places": places.places})
                .as_object()
                .unwrap()
                .clone(),
        ),
        Command::Bound(b) => {
            let v = json!({
                "poly": b.poly,
                "alpha": b.alpha,
                "n": b.n,
                "places": b.places.places,
                "d": b.d,
                "B": b.b.map(real),
                "hhat": b.hhat.map(real),
                "htilde": b.htilde.map(real),
                "gamma": real(b.gamma),
                "s_size": b.s_size,
            });
            ("bound", v.as_object().unwrap().clone())
        }
        Command::PowerfulCheck { poly } => (
            "powerful-check",
            json!({"poly": poly}).as_object().unwrap().clone(),
        ),
        Command::FamilyCheck { factors, n } => (
            "family-check",
            json!({"factors": factors, "n": n})
                .as_object()
                .unwrap()
                .clone(),
        ),
    }
}

fn parse_map(text: &str) -> Result<PolyExpr, Failure> {
    parse_poly(text).map_err(|e| Failure::Config(format!("{e} in '{text}'")))
}

fn parse_point(text: &str) -> Result<Rational, Failure> {
    parse_rational(text).map_err(|e| Failure::Config(format!("{e} in '{text}'")))
}

/// `"2,3"` → `{∞, 2, 3}`; `∞`/`inf` entries are accepted and ignored.
pub fn parse_places(text: &str) -> Result<PlaceSet, Failure> {
    let mut s = PlaceSet::infinity_only();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if matches!(tok, "∞" | "inf" | "infinity") {
            continue;
        }
        let p: BigUint = tok
            .parse()
            .map_err(|_| Failure::Config(format!("'{tok}' is not a place")))?;
        s.insert(Place::finite(p)?);
    }
    Ok(s)
}

fn places_json(s: &PlaceSet) -> Value {
    Value::Array(s.iter().map(|v| Value::String(v.to_string())).collect())
}

fn rational_str(r: &Rational) -> Value {
    Value::String(r.to_string())
}

/// The sequence through `n`, or through the last term inside the digit
/// budget together with a message saying where it stopped.
fn sequence_within_budget(
    phi: &Polynomial,
    alpha: &Rational,
    n: usize,
    cfg: &RunConfig,
) -> Result<(OrbitSequence, Option<String>), Failure> {
    match build_sequence(phi, alpha, n, &cfg.sequence_options()) {
        Ok(seq) => Ok((seq, None)),
        Err(e @ ZsigmondyError::DigitBudgetExceeded { .. }) => {
            let msg = e.to_string();
            let ZsigmondyError::DigitBudgetExceeded { partial, .. } = e else {
                unreachable!()
            };
            Ok((*partial, Some(msg)))
        }
        Err(e) => Err(e.into()),
    }
}

fn orbit_rows(seq: &OrbitSequence) -> Vec<OrbitRow> {
    seq.records
        .iter()
        .map(|r| OrbitRow {
            n: r.n,
            value_digits: decimal_digits(r.value.numer().magnitude())
                .max(decimal_digits(r.value.denom().magnitude())),
            a_digits: decimal_digits(&r.ideal.a),
            primitive: r.primitive,
            p_digits: decimal_digits(&r.split.primitive_part),
            n_digits: decimal_digits(&r.split.nonprimitive_part),
        })
        .collect()
}

fn orbit(a: &OrbitArgs, cfg: &RunConfig, report: &mut Report, splits: bool) -> Result<(), Failure> {
    let phi = parse_map(&a.poly)?.expand();
    let alpha = parse_point(&a.alpha)?;
    let (seq, stopped) = sequence_within_budget(&phi, &alpha, a.n, cfg)?;
    let terms: Vec<Value> = seq
        .records
        .iter()
        .map(|r| {
            if splits {
                json!({
                    "n": r.n,
                    "a": int(&r.ideal.a),
                    "primitive_part": int(&r.split.primitive_part),
                    "nonprimitive_part": int(&r.split.nonprimitive_part),
                    "primitive": r.primitive,
                })
            } else {
                json!({
                    "n": r.n,
                    "value": rational_str(&r.value),
                    "a": int(&r.ideal.a),
                    "b": int(&r.ideal.b),
                    "digits": decimal_digits(r.value.numer().magnitude()),
                })
            }
        })
        .collect();
    let mut result = json!({
        "phi": phi.to_string(),
        "psi": seq.psi.to_string(),
        "terms": terms,
        "computed": seq.len(),
    });
    if splits {
        let z: Vec<usize> = zsigmondy_set(&seq, seq.len()).into_iter().collect();
        result["zsigmondy_set"] = json!(z);
    }
    report.result = result;
    report.table = Some(orbit_rows(&seq));
    match stopped {
        Some(msg) => Err(Failure::Budget(msg)),
        None => Ok(()),
    }
}

fn rigid(
    a: &OrbitArgs,
    places: &str,
    cfg: &RunConfig,
    source: &dyn FactorSource,
    report: &mut Report,
) -> Result<(), Failure> {
    let phi = parse_map(&a.poly)?.expand();
    let alpha = parse_point(&a.alpha)?;
    let s = parse_places(places)?;
    let (seq, stopped) = sequence_within_budget(&phi, &alpha, a.n, cfg)?;
    let terms = seq.a_terms();
    let r = rigid_check(&terms, &s, source);
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            json!({
                "prime": int(&v.prime),
                "condition": match v.condition {
                    RigidCondition::Gcd => "gcd",
                    RigidCondition::Stability => "stability",
                },
                "indices": v.indices,
                "valuations": v.valuations,
            })
        })
        .collect();
    let splits = seq.splits();
    let bound: Vec<Value> = (2..=seq.len())
        .map(|n| json!({"n": n, "holds": nonprimitive_bound_check(n, &splits, &s)}))
        .collect();
    report.result = json!({
        "places": places_json(&s),
        "computed": seq.len(),
        "verified": r.verified,
        "checked_pairs": r.checked_pairs,
        "primes": r.primes.iter().map(int).collect::<Vec<_>>(),
        "untested": r.untested.iter().map(int).collect::<Vec<_>>(),
        "violations": violations,
        "nonprimitive_bound": bound,
    });
    if let Some(msg) = stopped {
        return Err(Failure::Budget(msg));
    }
    if !r.untested.is_empty() {
        return Err(Failure::Budget(format!(
            "{} cofactor(s) could not be factored within the budget",
            r.untested.len()
        )));
    }
    Ok(())
}

fn estimate_json(e: &HeightEstimate) -> Value {
    json!({
        "value": real(e.value),
        "error_bound": real(e.error_bound),
        "lower": real(e.lower()),
        "upper": real(e.upper()),
        "iterations": e.iterations,
        "truncated": e.truncated,
    })
}

fn heights(
    poly: &str,
    alpha: &str,
    places: &str,
    cfg: &RunConfig,
    report: &mut Report,
) -> Result<(), Failure> {
    let phi = parse_map(poly)?.expand();
    let x = parse_point(alpha)?;
    let s = parse_places(places)?;
    let p = ProjPoint::from_rational(&x);
    let inf = ProjPoint::infinity();
    let mut local = Map::new();
    let mut sum = 0.0;
    for v in s.iter() {
        let l = local_log_distance(&p, &inf, v);
        sum += l;
        local.insert(v.to_string(), real(l));
    }
    let mut result = json!({
        "weil_height": real(weil_height(&p)),
        "map_height": real(map_height(&RationalMap::from_polynomial(&phi))),
        "polynomial_height": real(polynomial_height(&phi)),
        "places": places_json(&s),
        "local_heights": local,
        "local_sum": real(sum),
    });
    report.result = result.clone();
    let b = height_comparison_bound(&phi)?;
    let est = canonical_height_with(&phi, &x, cfg.tol, &cfg.height_options())?;
    result["comparison_bound"] = real(b);
    result["canonical_height"] = estimate_json(&est);
    report.result = result;
    if est.truncated {
        return Err(Failure::Budget(format!(
            "orbit outgrew {} digits after {} iterations; error bound is {}",
            cfg.digit_budget,
            est.iterations,
            real(est.error_bound)
        )));
    }
    Ok(())
}

fn bound(a: &BoundArgs, cfg: &RunConfig, report: &mut Report) -> Result<(), Failure> {
    let mut stopped = None;
    let mut j_rows = None;
    let inputs = match &a.poly {
        Some(poly) => {
            let phi = parse_map(poly)?.expand();
            let alpha = parse_point(&a.alpha)?;
            let s = parse_places(&a.places.places)?;
            let psi = conjugate(&phi, &alpha);
            let d = psi.deg();
            if d < 3 {
                return Err(Failure::Hypothesis(format!(
                    "the bound needs degree ≥ 3, got {d}"
                )));
            }
            let b = height_comparison_bound(&psi)?;
            let zero = Rational::from_integer(0.into());
            let hhat = canonical_height_with(&psi, &zero, cfg.tol, &cfg.height_options())?;
            if hhat.truncated {
                stopped = Some(format!(
                    "canonical height truncated by the digit budget; error bound is {}",
                    real(hhat.error_bound)
                ));
            }
            if hhat.lower() <= 0.0 {
                return Err(Failure::Hypothesis(format!(
                    "ĥ_ψ(0) is not certified positive (value {}, error {})",
                    real(hhat.value),
                    real(hhat.error_bound)
                )));
            }
            let (seq, seq_stop) = sequence_within_budget(&phi, &alpha, a.n, cfg)?;
            stopped = stopped.or(seq_stop);
            let mut rows = Vec::new();
            for n in 1..=seq.len() {
                let j = j_membership(&seq, n, &s, &hhat)?;
                rows.push(json!({
                    "n": n,
                    "member": j.member,
                    "ambiguous": j.ambiguous,
                    "local_sum": real(j.local_sum),
                    "threshold": real(j.threshold),
                }));
            }
            j_rows = Some(rows);
            BoundInputs {
                d: d as u32,
                h_psi: polynomial_height(&psi),
                h_psi_tilde: map_height(&RationalMap::reversed(&psi)),
                hhat0: hhat.value,
                b,
                gamma: a.gamma,
                s_size: s.len(),
            }
        }
        None => {
            let need = |name: &str| Failure::Config(format!("--{name} is required without --poly"));
            BoundInputs {
                d: a.d.ok_or_else(|| need("d"))?,
                h_psi: 0.0,
                h_psi_tilde: a.htilde.ok_or_else(|| need("htilde"))?,
                hhat0: a.hhat.ok_or_else(|| need("hhat"))?,
                b: a.b.ok_or_else(|| need("B"))?,
                gamma: a.gamma,
                s_size: a.s_size.ok_or_else(|| need("s-size"))?,
            }
        }
    };
    let r = bound_m(&inputs)?;
    report.warnings.extend(r.i_set.warnings.iter().cloned());
    let mut result = json!({
        "M": real(r.m),
        "summands": {
            "one": real(r.one),
            "x_term": real(r.x_term),
            "i_term": real(r.i_term),
            "j_term": real(r.j_term),
        },
        "j_gamma": real(r.j_gamma),
        "j_height": real(r.j_height),
        "inputs": {
            "d": inputs.d,
            "B": real(inputs.b),
            "hhat": real(inputs.hhat0),
            "htilde": real(inputs.h_psi_tilde),
            "gamma": real(inputs.gamma),
            "s_size": inputs.s_size,
        },
        "x_set": {
            "members": r.x_set.members,
            "threshold": real(r.x_set.threshold),
            "contains_zero": r.x_set.contains_zero,
        },
        "i_set": {
            "members": r.i_set.members,
            "scanned_to": r.i_set.scanned_to,
            "proof_bound": real(r.i_set.proof_bound),
            "contains_zero": r.i_set.contains_zero,
        },
    });
    if let Some(rows) = j_rows {
        result["j_empirical"] = Value::Array(rows);
        result["inputs"]["h_psi"] = real(inputs.h_psi);
    }
    report.result = result;
    match stopped {
        Some(msg) => Err(Failure::Budget(msg)),
        None => Ok(()),
    }
}

fn powerful(poly: &str, report: &mut Report) -> Result<(), Failure> {
    let e = parse_map(poly)?;
    let phi = e.expand();
    if phi.deg() == 0 {
        return Err(Failure::Config("need a nonconstant polynomial".into()));
    }
    let sf = squarefree_decomposition(&phi);
    let bases: Vec<Polynomial> = match &e.factored {
        Some(fs) if fs.len() > 1 => fs.iter().map(|(b, _)| b.expand()).collect(),
        _ => sf.factors.iter().map(|(q, _)| q.clone()).collect(),
    };
    report.result = json!({
        "polynomial": phi.to_string(),
        "is_powerful": is_powerful(&phi),
        "unit": rational_str(&sf.unit),
        "squarefree_factors": sf
            .factors
            .iter()
            .map(|(q, m)| json!({"factor": q.to_string(), "multiplicity": m}))
            .collect::<Vec<_>>(),
        "E": sf.max_multiplicity(),
    });
    let s = theorem15_place_set(&bases)?;
    insert(report, "place_set", places_json(&s));
    Ok(())
}

fn family(
    factors: &str,
    n: usize,
    cfg: &RunConfig,
    source: &dyn FactorSource,
    report: &mut Report,
) -> Result<(), Failure> {
    let e = parse_map(factors)?;
    let spec: FamilySpec = e.family_spec().map_err(|err| match err {
        crate::expr::FamilyFormError::NotAProduct => Failure::Config(err.to_string()),
        _ => Failure::Hypothesis(err.to_string()),
    })?;
    report.result = json!({
        "m": spec.m(),
        "E": spec.max_exponent(),
        "factors": spec
            .factors
            .iter()
            .map(|f| json!({"f": f.f.to_string(), "a": int(&f.a), "e": f.e}))
            .collect::<Vec<_>>(),
    });
    let phi = family_build(&spec)?;
    insert(report, "polynomial", Value::String(phi.to_string()));
    let orbit = fixed_or_wandering(&spec);
    insert(
        report,
        "orbit",
        json!(if orbit == FixedOrWandering::Fixed {
            "fixed"
        } else {
            "wandering"
        }),
    );
    if orbit == FixedOrWandering::Fixed {
        return Err(Failure::Hypothesis("0 is fixed since some a_i = 0".into()));
    }
    let s = theorem15_place_set(&spec.bases())?;
    insert(report, "places", places_json(&s));
    let zero = Rational::from_integer(0.into());
    let (seq, stopped) = sequence_within_budget(&phi, &zero, n, cfg)?;
    let reach = seq.len();
    insert(report, "computed", json!(reach));
    let z: Vec<usize> = zsigmondy_set(&seq, reach).into_iter().collect();
    insert(report, "zsigmondy_set", json!(z));

    let g = growth_check(&spec, reach, &cfg.sequence_options())?;
    insert(
        report,
        "growth",
        json!({
            "holds": g.holds,
            "base_at_least_4": g.base_at_least_4,
            "steps": g.steps.iter().map(|st| json!({
                "n": st.n,
                "bits": st.bits,
                "squares": st.squares,
                "alpha_n": int(&st.alpha_n),
                "alpha_bound": st.alpha_bound,
                "bit_shadow": st.bit_shadow,
            })).collect::<Vec<_>>(),
        }),
    );

    let st = valuation_stability_check(&phi, &s, reach, &cfg.sequence_options(), source)?;
    let entries: Vec<Value> = st
        .entries
        .iter()
        .map(|en| {
            let (kind, value) = match &en.group {
                PrimeGroup::Prime(p) => ("prime", int(p)),
                PrimeGroup::Block(b) => ("block", json!(decimal_digits(b))),
            };
            json!({
                "group": kind,
                // blocks are reported by size only
                "value": value,
                "rank": en.rank,
                "valuation": en.valuation,
                "failures": en.failures,
            })
        })
        .collect();
    insert(
        report,
        "stability",
        json!({
            "passed": st.passed(),
            "E": st.e,
            "failure_count": st.failure_count(),
            "divisibility_failures": st.divisibility_failures,
            "named_primes": st.named_primes().count(),
            "blocks": st.blocks().count(),
            "untested": st.untested.iter().map(int).collect::<Vec<_>>(),
            "entries": entries,
        }),
    );
    match stopped {
        Some(msg) => Err(Failure::Budget(msg)),
        None if !st.untested.is_empty() => Err(Failure::Budget(format!(
            "{} leftover(s) could not be placed",
            st.untested.len()
        ))),
        None => Ok(()),
    }
}
