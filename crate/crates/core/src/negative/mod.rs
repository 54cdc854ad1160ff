//! Evasion when the negative class is convex: a randomized cutting-plane search
//! driven by hit-and-run samples from the negative set.

mod body;
mod sampling;
mod search;

pub use body::{FeasibleBody, SampleSet};
pub use sampling::{approximate_rounding, hit_and_run, DirectionMode};
pub use search::{
    evade_convex_negative, intersect_search, set_search, IntersectOutcome, NegativeParams,
    PhaseRecord, SearchRound, SetSearchResult,
};
