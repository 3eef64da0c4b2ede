//! Orbit sequences and their Zsigmondy sets, the explicit bound on the
//! number of exceptional indices, the inequality checks behind it, and the
//! powerful-polynomial families whose Zsigmondy sets are empty.

mod bound;
mod checks;
mod family;
mod sequence;

use num_bigint::BigUint;
use thiserror::Error;

pub use bound::{
    bound_m, enumerate_i, enumerate_x, i_ratio, log_d_plus, BoundBreakdown, BoundInputs, ISet, XSet,
};
pub use checks::{
    j_membership, lemma31_check, lemma35_check, wandering_verdict, Check, JMembership, Verdict,
};
pub use family::{
    family_build, fixed_or_wandering, growth_check, growth_exponent, theorem15_place_set,
    valuation_stability_check, FamilyFactor, FamilySpec, FixedOrWandering, GrowthReport,
    GrowthStep, Hypothesis, PrimeGroup, StabilityEntry, StabilityReport,
};
pub use sequence::{build_sequence, zsigmondy_set, OrbitRecord, OrbitSequence, SequenceOptions};

use crate::heights::HeightError;

#[derive(Debug, Error)]
pub enum ZsigmondyError {
    #[error("degree {0} is too small here")]
    DegreeTooSmall(usize),
    #[error("need at least one term")]
    EmptyRange,
    #[error("orbit is preperiodic: term {n} repeats term {earlier}")]
    Preperiodic { n: usize, earlier: usize },
    #[error("term {n} has {digits} digits, over the budget of {budget}")]
    DigitBudgetExceeded {
        n: usize,
        digits: u64,
        budget: u64,
        partial: Box<OrbitSequence>,
    },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error("no record for index {0}")]
    MissingRecord(usize),
    #[error("could not factor {0}")]
    Unfactored(BigUint),
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Height(#[from] HeightError),
}
