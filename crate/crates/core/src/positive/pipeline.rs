//! End-to-end drivers: direction construction, cost-exponent guards, degenerate
//! weights and missing bounds.

use super::bootstrap::{run_bootstrap, run_spiral, run_unit_sweep, UnitSweepOutcome};
use super::mls::{run_kmls, run_multiline, verify_negative, Progress};
use super::{check_negative, DirectionSet, EvasionResult, Prober, SearchParams, Strategy, Termination};
use crate::cost::{enclosed_lp_radius, BoundPair, CostSpec, GapMode};
use crate::error::{invalid, Error, Result};
use crate::oracle::MembershipOracle;
use crate::scalar::Scalar;

/// What the attacker knows before searching.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StartBounds<T> {
    /// A point the classifier labels negative.
    pub negative: Option<Vec<T>>,
    /// A cost below which every point is known to be positive.
    pub lower: Option<T>,
}

impl<T: Scalar> StartBounds<T> {
    pub fn new(negative: Vec<T>, lower: T) -> Self {
        Self {
            negative: Some(negative),
            lower: Some(lower),
        }
    }
}

/// Adjusted search setup for weights that are zero or infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateWeights<T> {
    /// Axis directions over the coordinates that may change.
    pub directions: DirectionSet<T>,
    /// Coordinates with infinite weight; they never move.
    pub dropped: Vec<usize>,
    /// Costs with every zero weight replaced by `2^-t`, `t = 1..=rounds`. Empty when
    /// no weight is zero.
    pub surrogates: Vec<CostSpec<T>>,
}

impl<T: Scalar> DegenerateWeights<T> {
    /// Results found through surrogates carry no optimality certificate.
    pub fn certified(&self) -> bool {
        self.surrogates.is_empty()
    }
}

pub fn handle_degenerate_weights<T: Scalar>(
    spec: &CostSpec<T>,
    rounds: u32,
) -> Result<DegenerateWeights<T>> {
    let weights = spec.weights();
    let dropped: Vec<usize> = (0..spec.dim()).filter(|&d| weights[d].is_infinite()).collect();
    if dropped.len() == spec.dim() {
        return Err(Error::EmptyDirectionSet);
    }
    let has_zero = weights.iter().any(|&c| c == T::zero());
    let surrogates = if has_zero {
        if rounds == 0 {
            return Err(invalid("zero weights need at least one surrogate round"));
        }
        (1..=rounds)
            .map(|t| {
                let decay = T::lit(2.0).powi(-(t as i32));
                let w = weights
                    .iter()
                    .map(|&c| if c == T::zero() { decay } else { c })
                    .collect();
                spec.with_weights(w)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let directions = DirectionSet::axes(surrogates.first().unwrap_or(spec))?;
    Ok(DegenerateWeights {
        directions,
        dropped,
        surrogates,
    })
}

/// Convex-positive evasion along the `2D` weighted axis directions.
///
/// `lower` must be a certified lower bound on the MAC.
pub fn convex_search<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    negative: &[T],
    lower: T,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<EvasionResult<T>> {
    evade_convex_positive(spec, &StartBounds::new(negative.to_vec(), lower), params, oracle)
}

/// Evasion of a halfspace classifier, searching only the axis directions that
/// point into the orthant of `negative`.
pub fn linear_search<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    negative: &[T],
    lower: T,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<EvasionResult<T>> {
    let directions = DirectionSet::linear(spec, negative)?;
    evade_along(spec, directions, &StartBounds::new(negative.to_vec(), lower), params, oracle)
}

/// Like [`evade_convex_positive`] but over caller-supplied unit-cost directions.
///
/// Lower bounds are only certified when the directions' convex hull contains the
/// unit cost ball (as the axis directions do for `p <= 1`).
pub fn evade_along<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    mut directions: DirectionSet<T>,
    start: &StartBounds<T>,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<EvasionResult<T>> {
    params.validate()?;
    let (radius, inner) = exponent_guard(spec, params)?;
    let mut prober = Prober::new(oracle, params.query_budget);
    let result = search_core(spec, &mut directions, start, &inner, &mut prober)?;
    Ok(rescale_lower(result, radius, start.lower))
}

/// Full convex-positive pipeline: fills in whichever of the negative example and
/// the lower bound is missing, handles zero and infinite weights, and then runs
/// the configured bisection strategy over the axis directions.
pub fn evade_convex_positive<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    start: &StartBounds<T>,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<EvasionResult<T>> {
    params.validate()?;
    let (radius, inner) = exponent_guard(spec, params)?;
    let degenerate = handle_degenerate_weights(spec, params.surrogate_rounds)?;
    let mut prober = Prober::new(oracle, params.query_budget);
    if degenerate.certified() {
        let mut directions = degenerate.directions;
        let result = search_core(spec, &mut directions, start, &inner, &mut prober)?;
        return Ok(rescale_lower(result, radius, start.lower));
    }

    // Zero weights: rerun on surrogates whose weights decay toward zero and keep
    // the witness that is cheapest under the true cost.
    let mut best: Option<EvasionResult<T>> = None;
    let mut negative = start.negative.clone();
    for surrogate in &degenerate.surrogates {
        let mut directions = DirectionSet::axes(surrogate)?;
        let attempt = StartBounds {
            negative: negative.clone(),
            lower: None,
        };
        let mut result = search_core(surrogate, &mut directions, &attempt, &inner, &mut prober)?;
        result.witness_cost = spec.cost_unchecked(&result.witness);
        result.certified = false;
        negative = Some(result.witness.clone());
        let done = result.witness_cost == T::zero();
        if best.as_ref().is_none_or(|b| result.witness_cost < b.witness_cost) {
            best = Some(result);
        }
        if done {
            break;
        }
    }
    let mut best = best.expect("at least one surrogate round");
    best.queries = prober.used();
    Ok(best)
}

/// Validates the cost exponent. For `p > 1` the axis probes only certify the
/// largest Lp ball inside their L1 hull, of radius `r = D^{-(p-1)/p}` times the
/// probe cost, so the inner search runs at accuracy `(1+eps) r - 1`.
fn exponent_guard<T: Scalar>(
    spec: &CostSpec<T>,
    params: &SearchParams<T>,
) -> Result<(T, SearchParams<T>)> {
    let p = spec.exponent();
    if p <= T::one() {
        return Ok((T::one(), params.clone()));
    }
    if params.mode == GapMode::Additive {
        return Err(Error::ParameterOutOfRange(
            "additive accuracy is only supported for p <= 1".into(),
        ));
    }
    let movable = spec.weights().iter().filter(|c| c.is_finite()).count();
    let radius = enclosed_lp_radius(movable, p)?;
    let inner_accuracy = (T::one() + params.accuracy) * radius - T::one();
    if !(inner_accuracy > T::zero()) {
        return Err(Error::ParameterOutOfRange(format!(
            "with p = {p} and D = {movable} axis search needs eps > {}; \
             no multi-line search over these directions can do better",
            radius.recip() - T::one()
        )));
    }
    let mut inner = params.clone();
    inner.accuracy = inner_accuracy;
    Ok((radius, inner))
}

fn rescale_lower<T: Scalar>(
    mut result: EvasionResult<T>,
    radius: T,
    known: Option<T>,
) -> EvasionResult<T> {
    if radius < T::one() {
        let scaled = result.bounds.lower * radius;
        let lower = known.map_or(scaled, |k| scaled.max(k)).min(result.bounds.upper);
        result.bounds.lower = lower;
        for rec in &mut result.trace {
            rec.lower = rec.lower * radius;
        }
    }
    result
}

fn search_core<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    start: &StartBounds<T>,
    params: &SearchParams<T>,
    prober: &mut Prober<'_, T, O>,
) -> Result<EvasionResult<T>> {
    let mode = params.mode;
    let known_lower = start
        .lower
        .filter(|&l| l > T::zero() || (mode == GapMode::Additive && l == T::zero()));
    let spiral_or_zero = |witness: Vec<T>, upper: T, dirs: &mut DirectionSet<T>, prober: &mut Prober<'_, T, O>| {
        if mode == GapMode::Additive {
            return Ok((Progress::new(witness, BoundPair::additive(T::zero(), upper)?), None));
        }
        let out = run_spiral(spec, dirs, &witness, upper, params, prober)?;
        let termination = out.termination;
        let progress = out.into_progress();
        Ok::<_, Error>((progress, (termination != Termination::Converged).then_some(termination)))
    };

    let (mut progress, stopped) = match (&start.negative, known_lower) {
        (Some(x), Some(lower)) => {
            let cost = check_negative(spec, x, T::infinity())?;
            if lower > cost {
                return Err(invalid("lower bound exceeds the negative example's cost"));
            }
            let bounds = BoundPair::new(lower, cost, mode)?;
            if params.verify_negative && !bounds.converged(params.accuracy) {
                verify_negative(prober, x)?;
            }
            (Progress::new(x.clone(), bounds), None)
        }
        (Some(x), None) => {
            let cost = check_negative(spec, x, T::infinity())?;
            if params.verify_negative {
                verify_negative(prober, x)?;
            }
            spiral_or_zero(x.clone(), cost, directions, prober)?
        }
        (None, Some(lower)) if lower > T::zero() => {
            let out = run_bootstrap(spec, directions, lower, params, prober)?;
            (Progress::new(out.witness, out.bounds), None)
        }
        (None, _) => match run_unit_sweep(spec, directions, prober)? {
            UnitSweepOutcome::Negative { witness, .. } => {
                spiral_or_zero(witness, T::one(), directions, prober)?
            }
            UnitSweepOutcome::AllPositive { .. } => {
                let out = run_bootstrap(spec, directions, T::one(), params, prober)?;
                (Progress::new(out.witness, out.bounds), None)
            }
        },
    };
    let bootstrap_queries = prober.used();
    let termination = match stopped {
        Some(t) => t,
        None => match params.strategy {
            Strategy::Multiline => run_multiline(spec, directions, &mut progress, params, prober)?,
            Strategy::KStep(k) => run_kmls(spec, directions, &mut progress, k, params, prober)?,
        },
    };
    Ok(progress.into_result(
        spec,
        prober.used(),
        bootstrap_queries,
        termination,
        directions.active_count(),
    ))
}
