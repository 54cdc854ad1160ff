//! Evading convex-inducing classifiers with few membership queries.
//!
//! Given a classifier whose positive or negative region is convex, a known negative
//! example and a weighted `Lp` cost around a target, the searches here find a negative
//! point whose cost is within a `1 + eps` factor (or an additive `eps`) of the minimum
//! adversarial cost, using a number of queries logarithmic in the initial gap.
//!
//! * [`positive`]: multiline search and K-step multiline search for convex positive sets.
//! * [`negative`]: randomized intersect search for convex negative sets.
//! * [`harness`]: synthetic instances, trials and sweeps.
//!
//! ```
//! use convex_evasion::oracle::{Label, Oracle};
//! use convex_evasion::positive::{evade_convex_positive, SearchParams, StartBounds};
//! use convex_evasion::CostSpecF64;
//!
//! # fn main() -> convex_evasion::Result<()> {
//! let spec = CostSpecF64::unweighted(2, 1.0)?;
//! let mut oracle = Oracle::new(|x: &[f64]| {
//!     if x[0] >= 2.0 { Label::Negative } else { Label::Positive }
//! });
//! let start = StartBounds { negative: Some(vec![4.0, 0.0]), lower: None };
//! let result = evade_convex_positive(&spec, &start, &SearchParams::new(0.1), &mut oracle)?;
//! assert!(result.witness_cost <= 2.2);
//! # Ok(())
//! # }
//! ```

// Negated float comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod harness;
pub mod negative;
pub mod oracle;
pub mod positive;
pub mod scalar;

pub use cost::{BoundPair, CostBall, CostSpec, GapMode, Halfspace};
pub use error::{Error, Result};
pub use negative::{evade_convex_negative, NegativeParams, SetSearchResult};
pub use oracle::{Classifier, Label, MembershipOracle, Oracle, QueryLedger};
pub use positive::{
    evade_along, evade_convex_positive, DirectionSet, EvasionResult, SearchParams, StartBounds,
    Strategy, Termination,
};
pub use scalar::Scalar;

pub type CostSpecF64 = CostSpec<f64>;
pub type CostSpecF32 = CostSpec<f32>;
pub type BoundPairF64 = BoundPair<f64>;
pub type BoundPairF32 = BoundPair<f32>;
pub type SearchParamsF64 = SearchParams<f64>;
pub type SearchParamsF32 = SearchParams<f32>;
pub type EvasionResultF64 = EvasionResult<f64>;
pub type EvasionResultF32 = EvasionResult<f32>;
pub type NegativeParamsF64 = NegativeParams<f64>;
pub type NegativeParamsF32 = NegativeParams<f32>;
