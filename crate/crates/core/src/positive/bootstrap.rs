//! Establishing missing bounds before bisection starts.

use super::mls::Progress;
use super::{DirectionSet, OutOfBudget, Prober, SearchParams, Termination};
use crate::cost::{BoundPair, CostSpec};
use crate::error::{invalid, Error, Result};
use crate::oracle::{Label, MembershipOracle};
use crate::scalar::Scalar;

/// Result of [`spiral_search`]; surviving directions stay active in the caller's set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiralOutcome<T> {
    pub bounds: BoundPair<T>,
    pub witness: Vec<T>,
    /// Final exponent level `t`; the lower bound is `C-_0 2^(-2^t)`.
    pub level: u32,
    pub queries: u64,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome<T> {
    pub bounds: BoundPair<T>,
    pub witness: Vec<T>,
    /// Level `T` at which the first negative appeared.
    pub level: u32,
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitSweepOutcome<T> {
    /// Some direction is negative at cost 1.
    Negative { witness: Vec<T>, queries: u64 },
    /// Every direction is positive at cost 1.
    AllPositive { queries: u64 },
}

/// `base * 2^(sign * 2^t)`; exact while the power of two is representable.
fn level_cost<T: Scalar>(base: T, t: u32, sign: T) -> T {
    let exponent = T::lit(2f64.powi(t.min(1100) as i32));
    base * T::lit(2.0).powf(sign * exponent)
}

/// Finds a lower bound when only a negative example is known.
///
/// Probes one direction at a time at cost `upper * 2^(-2^t)`. A positive probe
/// parks the direction; a negative one prunes every parked direction, lowers the
/// upper bound to the probe and deepens `t`. Stops when every active direction is
/// parked at the current level.
pub fn spiral_search<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    negative: &[T],
    upper: T,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<SpiralOutcome<T>> {
    let mut prober = Prober::new(oracle, params.query_budget);
    run_spiral(spec, directions, negative, upper, params, &mut prober)
}

pub(crate) fn run_spiral<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    negative: &[T],
    upper: T,
    params: &SearchParams<T>,
    prober: &mut Prober<'_, T, O>,
) -> Result<SpiralOutcome<T>> {
    if !(upper > T::zero()) || !upper.is_finite() {
        return Err(invalid("spiral search needs a finite positive upper bound"));
    }
    if directions.active_count() == 0 {
        return Err(Error::EmptyDirectionSet);
    }
    let start = prober.used();
    let mut witness = negative.to_vec();
    let mut current_upper = upper;
    let mut t = 0u32;
    let mut parked: Vec<usize> = Vec::new();
    let outcome = |bounds_lower: T, upper: T, witness: Vec<T>, t, used, termination| {
        Ok(SpiralOutcome {
            bounds: BoundPair::multiplicative(bounds_lower, upper)?,
            witness,
            level: t,
            queries: used - start,
            termination,
        })
    };
    loop {
        let level = level_cost(upper, t, -T::one());
        if t > params.max_doublings || !(level > T::zero()) {
            let floor = level.max(T::min_positive_value());
            return outcome(floor, current_upper, witness, t, prober.used(), Termination::NoLowerBound);
        }
        let next = directions
            .active_indices()
            .into_iter()
            .find(|i| !parked.contains(i));
        let Some(e) = next else {
            return outcome(level, current_upper, witness, t, prober.used(), Termination::Converged);
        };
        let x = directions.point(spec, e, level);
        match prober.query(&x) {
            Err(OutOfBudget) => {
                let floor = level.max(T::min_positive_value()).min(current_upper);
                return outcome(floor, current_upper, witness, t, prober.used(), Termination::BudgetExhausted);
            }
            Ok(Label::Positive) => parked.push(e),
            Ok(Label::Negative) => {
                for i in parked.drain(..) {
                    directions.prune(i);
                }
                witness = x;
                current_upper = current_upper.min(level);
                t += 1;
            }
        }
    }
}

/// Finds a negative example when only a lower bound is known by sweeping all
/// directions at costs `lower * 2^(2^t)`, `t = 0, 1, ...`.
///
/// Directions positive in the sweep that found the negative are pruned. Fails
/// with [`Error::SearchExhausted`] once the doubling cap or the budget is hit.
pub fn bootstrap_upper_bound<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    lower: T,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<BootstrapOutcome<T>> {
    let mut prober = Prober::new(oracle, params.query_budget);
    run_bootstrap(spec, directions, lower, params, &mut prober)
}

pub(crate) fn run_bootstrap<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    lower: T,
    params: &SearchParams<T>,
    prober: &mut Prober<'_, T, O>,
) -> Result<BootstrapOutcome<T>> {
    if !(lower > T::zero()) || !lower.is_finite() {
        return Err(invalid("bootstrap needs a finite positive lower bound"));
    }
    let start = prober.used();
    let mut certified = lower;
    for t in 0..=params.max_doublings {
        let level = level_cost(lower, t, T::one());
        if !level.is_finite() {
            break;
        }
        let mut positives = Vec::new();
        for i in directions.active_indices() {
            let x = directions.point(spec, i, level);
            match prober.query(&x) {
                Err(OutOfBudget) => return Err(Error::SearchExhausted),
                Ok(Label::Positive) => positives.push(i),
                Ok(Label::Negative) => {
                    for j in positives {
                        directions.prune(j);
                    }
                    return Ok(BootstrapOutcome {
                        bounds: BoundPair::new(certified, level, params.mode)?,
                        witness: x,
                        level: t,
                        queries: prober.used() - start,
                    });
                }
            }
        }
        certified = level;
    }
    Err(Error::SearchExhausted)
}

/// Probes every active direction at cost 1, stopping at the first negative.
pub fn unit_cost_sweep<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<UnitSweepOutcome<T>> {
    let mut prober = Prober::new(oracle, params.query_budget);
    run_unit_sweep(spec, directions, &mut prober)
}

pub(crate) fn run_unit_sweep<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    prober: &mut Prober<'_, T, O>,
) -> Result<UnitSweepOutcome<T>> {
    let start = prober.used();
    let mut positives = Vec::new();
    for i in directions.active_indices() {
        let x = directions.point(spec, i, T::one());
        match prober.query(&x) {
            Err(OutOfBudget) => return Err(Error::SearchExhausted),
            Ok(Label::Positive) => positives.push(i),
            Ok(Label::Negative) => {
                for j in positives {
                    directions.prune(j);
                }
                return Ok(UnitSweepOutcome::Negative {
                    witness: x,
                    queries: prober.used() - start,
                });
            }
        }
    }
    Ok(UnitSweepOutcome::AllPositive {
        queries: prober.used() - start,
    })
}

impl<T: Scalar> SpiralOutcome<T> {
    pub(crate) fn into_progress(self) -> Progress<T> {
        Progress::new(self.witness, self.bounds)
    }
}
