use super::{
    check_negative, DirectionSet, EvasionResult, OutOfBudget, Prober, SearchParams, Termination,
    TraceRecord,
};
use crate::cost::{steps_for_gap, BoundPair, CostSpec};
use crate::error::{Error, Result};
use crate::oracle::{Label, MembershipOracle};
use crate::scalar::Scalar;

/// Mutable state shared by the bisection loops and the bootstrap phases.
#[derive(Debug, Clone)]
pub(crate) struct Progress<T> {
    pub witness: Vec<T>,
    pub bounds: BoundPair<T>,
    pub iterations: u64,
    pub bisections: u64,
    pub trace: Vec<TraceRecord<T>>,
    /// Entry bounds, `L*` and query ceiling of the bisection phase.
    pub entry: Option<(BoundPair<T>, u32, u64)>,
}

impl<T: Scalar> Progress<T> {
    pub(crate) fn new(witness: Vec<T>, bounds: BoundPair<T>) -> Self {
        Self {
            witness,
            bounds,
            iterations: 0,
            bisections: 0,
            trace: Vec::new(),
            entry: None,
        }
    }

    pub(crate) fn record(&mut self, enabled: bool, queries: u64, active: usize) {
        self.iterations += 1;
        if enabled {
            self.trace.push(TraceRecord {
                iteration: self.iterations,
                lower: self.bounds.lower,
                upper: self.bounds.upper,
                queries,
                active_directions: active,
            });
        }
    }

    pub(crate) fn into_result(
        self,
        spec: &CostSpec<T>,
        queries: u64,
        bootstrap_queries: u64,
        termination: Termination,
        active_directions: usize,
    ) -> EvasionResult<T> {
        let witness_cost = spec.cost_unchecked(&self.witness);
        let (entry_bounds, entry_steps, query_ceiling) = match self.entry {
            Some((b, s, c)) => (Some(b), Some(s), Some(c)),
            None => (None, None, None),
        };
        EvasionResult {
            witness: self.witness,
            witness_cost,
            bounds: self.bounds,
            queries,
            bootstrap_queries,
            iterations: self.iterations,
            bisections: self.bisections,
            termination,
            certified: termination == Termination::Converged,
            active_directions,
            entry_bounds,
            entry_steps,
            query_ceiling,
            trace: self.trace,
        }
    }
}

/// `ceil(sqrt(L*))`, at least 1.
pub fn default_k(steps: u32) -> u32 {
    ((steps as f64).sqrt().ceil() as u32).max(1)
}

/// `|W| L* + |W|`.
pub fn mls_query_ceiling(directions: usize, steps: u32) -> u64 {
    directions as u64 * steps as u64 + directions as u64
}

/// `L* + (2 ceil(sqrt(L*)) + 1) |W|`.
pub fn kmls_query_ceiling(directions: usize, steps: u32) -> u64 {
    let root = (steps as f64).sqrt().ceil() as u64;
    steps as u64 + (2 * root + 1) * directions as u64
}

/// Breadth-first bisection over all active directions with lazy querying and pruning.
///
/// Directions probed positive in a round that found a negative are deactivated in
/// `directions`. Returns once the gap meets `params.accuracy` or the budget runs out.
pub fn multiline_search<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    negative: &[T],
    bounds: BoundPair<T>,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<EvasionResult<T>> {
    let (mut progress, mut prober) = prepare(spec, negative, bounds, params, oracle)?;
    let termination = run_multiline(spec, directions, &mut progress, params, &mut prober)?;
    Ok(progress.into_result(spec, prober.used(), 0, termination, directions.active_count()))
}

/// K-step multi-line search; `k = None` uses [`default_k`] of the entry gap.
pub fn kmls<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    negative: &[T],
    bounds: BoundPair<T>,
    k: Option<u32>,
    params: &SearchParams<T>,
    oracle: &mut O,
) -> Result<EvasionResult<T>> {
    let (mut progress, mut prober) = prepare(spec, negative, bounds, params, oracle)?;
    let termination = run_kmls(spec, directions, &mut progress, k, params, &mut prober)?;
    Ok(progress.into_result(spec, prober.used(), 0, termination, directions.active_count()))
}

fn prepare<'o, T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    negative: &[T],
    bounds: BoundPair<T>,
    params: &SearchParams<T>,
    oracle: &'o mut O,
) -> Result<(Progress<T>, Prober<'o, T, O>)> {
    params.validate()?;
    if bounds.mode != params.mode {
        return Err(crate::error::invalid("bound mode differs from search mode"));
    }
    check_negative(spec, negative, bounds.upper)?;
    let mut prober = Prober::new(oracle, params.query_budget);
    if params.verify_negative && !bounds.converged(params.accuracy) {
        verify_negative(&mut prober, negative)?;
    }
    Ok((Progress::new(negative.to_vec(), bounds), prober))
}

pub(crate) fn verify_negative<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    prober: &mut Prober<'_, T, O>,
    negative: &[T],
) -> Result<()> {
    if prober.query_uncounted(negative).is_positive() {
        return Err(Error::Inconsistent(
            "the supplied negative example is labelled positive".into(),
        ));
    }
    Ok(())
}

/// Proposal strictly inside the bounds, or an error when floating point cannot split them.
fn proposal<T: Scalar>(bounds: &BoundPair<T>) -> Result<T> {
    let c = bounds.proposal();
    if c > bounds.lower && c < bounds.upper {
        Ok(c)
    } else {
        Err(Error::ParameterOutOfRange(format!(
            "cannot split [{}, {}] in floating point; accuracy is too fine",
            bounds.lower, bounds.upper
        )))
    }
}

pub(crate) fn run_multiline<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    progress: &mut Progress<T>,
    params: &SearchParams<T>,
    prober: &mut Prober<'_, T, O>,
) -> Result<Termination> {
    if directions.active_count() == 0 {
        return Err(Error::EmptyDirectionSet);
    }
    let steps = steps_for_gap(&progress.bounds, params.accuracy)?;
    let ceiling = mls_query_ceiling(directions.active_count(), steps);
    progress.entry = Some((progress.bounds, steps, ceiling));
    while !progress.bounds.converged(params.accuracy) {
        let c = proposal(&progress.bounds)?;
        let mut positives = Vec::new();
        let mut hit = None;
        for i in directions.active_indices() {
            let x = directions.point(spec, i, c);
            match prober.query(&x) {
                Err(OutOfBudget) => return Ok(Termination::BudgetExhausted),
                Ok(Label::Negative) => {
                    hit = Some(x);
                    break;
                }
                Ok(Label::Positive) => positives.push(i),
            }
        }
        match hit {
            Some(x) => {
                progress.witness = x;
                progress.bounds.upper = c;
                for i in positives {
                    directions.prune(i);
                }
            }
            None => progress.bounds.lower = c,
        }
        progress.bisections += 1;
        progress.record(params.trace, prober.used(), directions.active_count());
    }
    Ok(Termination::Converged)
}

pub(crate) fn run_kmls<T: Scalar, O: MembershipOracle<T> + ?Sized>(
    spec: &CostSpec<T>,
    directions: &mut DirectionSet<T>,
    progress: &mut Progress<T>,
    k: Option<u32>,
    params: &SearchParams<T>,
    prober: &mut Prober<'_, T, O>,
) -> Result<Termination> {
    if directions.active_count() == 0 {
        return Err(Error::EmptyDirectionSet);
    }
    let steps = steps_for_gap(&progress.bounds, params.accuracy)?;
    let ceiling = kmls_query_ceiling(directions.active_count(), steps);
    progress.entry = Some((progress.bounds, steps, ceiling));
    let k = match k {
        Some(k) => k.max(1),
        None => default_k(steps),
    };
    let mut previous = None;
    while !progress.bounds.converged(params.accuracy) {
        let active = directions.active_indices();
        let chosen = active
            .iter()
            .copied()
            .find(|&i| Some(i) != previous)
            .unwrap_or(active[0]);
        previous = Some(chosen);

        // Depth-first: K bisection steps along the chosen direction.
        let mut candidate = progress.bounds;
        for _ in 0..k {
            if candidate.converged(params.accuracy) {
                break;
            }
            let b = proposal(&candidate)?;
            let x = directions.point(spec, chosen, b);
            match prober.query(&x) {
                Err(OutOfBudget) => return Ok(Termination::BudgetExhausted),
                Ok(Label::Positive) => candidate.lower = b,
                Ok(Label::Negative) => {
                    candidate.upper = b;
                    progress.witness = x;
                }
            }
            progress.bisections += 1;
        }

        // Breadth-first: confirm the candidate lower bound on the other directions.
        let b_plus = candidate.lower;
        if b_plus == progress.bounds.lower {
            progress.bounds.upper = candidate.upper;
        } else {
            let mut positives = Vec::new();
            let mut hit = None;
            for i in active.into_iter().filter(|&i| i != chosen) {
                let x = directions.point(spec, i, b_plus);
                match prober.query(&x) {
                    Err(OutOfBudget) => {
                        progress.bounds.upper = candidate.upper;
                        return Ok(Termination::BudgetExhausted);
                    }
                    Ok(Label::Negative) => {
                        hit = Some(x);
                        break;
                    }
                    Ok(Label::Positive) => positives.push(i),
                }
            }
            match hit {
                Some(x) => {
                    progress.witness = x;
                    progress.bounds.upper = b_plus;
                    directions.prune(chosen);
                    for i in positives {
                        directions.prune(i);
                    }
                }
                None => progress.bounds = candidate,
            }
        }
        progress.record(params.trace, prober.used(), directions.active_count());
    }
    Ok(Termination::Converged)
}
