//! Evasion when the positive class is convex: multi-line search and its variants.
//!
//! Every routine probes along unit-cost rays `t + C w` from the target. A sweep
//! where every active ray is positive at cost `C` certifies the cost ball of
//! radius `C` (for the L1 vertex directions) as positive; one negative ray gives
//! a new witness and upper bound.

mod bootstrap;
mod directions;
mod mls;
mod pipeline;

pub use bootstrap::{
    bootstrap_upper_bound, spiral_search, unit_cost_sweep, BootstrapOutcome, SpiralOutcome,
    UnitSweepOutcome,
};
pub use directions::DirectionSet;
pub use mls::{default_k, kmls, kmls_query_ceiling, mls_query_ceiling, multiline_search};
pub use pipeline::{
    convex_search, evade_along, evade_convex_positive, handle_degenerate_weights, linear_search,
    DegenerateWeights, StartBounds,
};

use serde::{Deserialize, Serialize};

use crate::cost::{BoundPair, CostSpec, GapMode};
use crate::error::{invalid, Result};
use crate::oracle::{Label, MembershipOracle};
use crate::scalar::Scalar;

pub const DEFAULT_QUERY_BUDGET: u64 = 10_000_000;
pub const DEFAULT_MAX_DOUBLINGS: u32 = 64;
pub const DEFAULT_SURROGATE_ROUNDS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    NoLowerBound,
    BudgetExhausted,
}

/// Which bisection scheme drives the search once both bounds are known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Multiline,
    /// K-step search; `None` uses `K = ceil(sqrt(L*))`.
    KStep(Option<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams<T> {
    /// `eps` in multiplicative mode, `eta` in additive mode.
    pub accuracy: T,
    pub mode: GapMode,
    pub strategy: Strategy,
    pub query_budget: u64,
    /// Cap on the doubly exponential schedules of the bootstrap procedures.
    pub max_doublings: u32,
    /// Re-query the supplied negative point before searching. The query is not
    /// counted in [`EvasionResult::queries`].
    pub verify_negative: bool,
    /// Number of surrogate runs when some weight is zero.
    pub surrogate_rounds: u32,
    pub trace: bool,
}

impl<T: Scalar> SearchParams<T> {
    pub fn new(accuracy: T) -> Self {
        Self {
            accuracy,
            mode: GapMode::Multiplicative,
            strategy: Strategy::Multiline,
            query_budget: DEFAULT_QUERY_BUDGET,
            max_doublings: DEFAULT_MAX_DOUBLINGS,
            verify_negative: true,
            surrogate_rounds: DEFAULT_SURROGATE_ROUNDS,
            trace: false,
        }
    }

    pub fn additive(accuracy: T) -> Self {
        Self {
            mode: GapMode::Additive,
            ..Self::new(accuracy)
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.query_budget = budget;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.accuracy > T::zero()) || !self.accuracy.is_finite() {
            return Err(invalid("accuracy must be positive and finite"));
        }
        if let Strategy::KStep(Some(0)) = self.strategy {
            return Err(invalid("K must be at least 1"));
        }
        Ok(())
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord<T> {
    pub iteration: u64,
    pub lower: T,
    pub upper: T,
    pub queries: u64,
    pub active_directions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvasionResult<T> {
    pub witness: Vec<T>,
    /// `A(witness)` under the caller's cost.
    pub witness_cost: T,
    pub bounds: BoundPair<T>,
    /// Queries issued by the search, including any bootstrap.
    pub queries: u64,
    /// Portion of `queries` spent establishing the initial bounds.
    pub bootstrap_queries: u64,
    pub iterations: u64,
    /// Completed rounds that moved one of the two bounds.
    pub bisections: u64,
    pub termination: Termination,
    /// Whether `bounds.lower` is a certified lower bound on the MAC.
    pub certified: bool,
    /// Active directions when the search stopped.
    pub active_directions: usize,
    /// Bounds when bisection started, before any rescaling of the final bounds.
    pub entry_bounds: Option<BoundPair<T>>,
    /// `L*` for `entry_bounds` at the accuracy the bisection ran with.
    pub entry_steps: Option<u32>,
    /// Worst-case query count of the bisection phase alone.
    pub query_ceiling: Option<u64>,
    pub trace: Vec<TraceRecord<T>>,
}

impl<T: Scalar> EvasionResult<T> {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    /// Queries spent after the bounds were established.
    pub fn bisection_queries(&self) -> u64 {
        self.queries - self.bootstrap_queries
    }

    /// Bisection queries within [`EvasionResult::query_ceiling`]; `true` when no ceiling applies.
    pub fn within_ceiling(&self) -> bool {
        self.query_ceiling.is_none_or(|c| self.bisection_queries() <= c)
    }
}

/// Counts search queries and enforces the budget.
pub(crate) struct Prober<'a, T, O: ?Sized> {
    oracle: &'a mut O,
    used: u64,
    budget: u64,
    _scalar: std::marker::PhantomData<T>,
}

/// Raised when the query budget runs out; carries no data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct OutOfBudget;

impl<'a, T: Scalar, O: MembershipOracle<T> + ?Sized> Prober<'a, T, O> {
    pub(crate) fn new(oracle: &'a mut O, budget: u64) -> Self {
        Self {
            oracle,
            used: 0,
            budget,
            _scalar: std::marker::PhantomData,
        }
    }

    pub(crate) fn query(&mut self, x: &[T]) -> std::result::Result<Label, OutOfBudget> {
        if self.used >= self.budget {
            return Err(OutOfBudget);
        }
        self.used += 1;
        Ok(self.oracle.query(x))
    }

    /// A query outside the search count.
    pub(crate) fn query_uncounted(&mut self, x: &[T]) -> Label {
        self.oracle.query(x)
    }

    pub(crate) fn used(&self) -> u64 {
        self.used
    }

}

pub(crate) fn check_negative<T: Scalar>(
    spec: &CostSpec<T>,
    negative: &[T],
    upper: T,
) -> Result<T> {
    let cost = spec.cost(negative)?;
    if !cost.is_finite() {
        return Err(invalid("negative example has infinite cost"));
    }
    let slack = T::unit_cost_tolerance() * T::one().max(cost);
    if upper + slack < cost {
        return Err(invalid(format!(
            "upper bound {upper} is below the negative example's cost {cost}"
        )));
    }
    Ok(cost)
}
