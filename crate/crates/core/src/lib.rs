//! Dynamical divisibility sequences over ℚ.
//!
//! Iterating a polynomial `φ` at a wandering point `α` gives the ideals
//! `(φⁿ(α) − α) = 𝔄ₙ 𝔅ₙ⁻¹`; this crate builds those sequences exactly,
//! extracts primitive parts without factoring, computes Zsigmondy sets,
//! checks rigid divisibility, and evaluates the height machinery and the
//! explicit bound on the size of the Zsigmondy set.

pub mod divisibility;
pub mod heights;
pub mod ratfield;
pub mod zsigmondy;
