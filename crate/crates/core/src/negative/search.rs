use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{approximate_rounding, hit_and_run, DirectionMode};
use super::{FeasibleBody, SampleSet};
use crate::cost::{subgradient_halfspace, BoundPair, CostSpec, GapMode};
use crate::error::{invalid, Error, Result};
use crate::oracle::MembershipOracle;
use crate::positive::{EvasionResult, Termination, TraceRecord, DEFAULT_QUERY_BUDGET};
use crate::scalar::Scalar;

/// Sampler and phase constants. `None` fields fall back to dimension-based defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeParams<T> {
    pub accuracy: T,
    pub mode: GapMode,
    /// `N`; `2N` samples are drawn per phase. Default `10 D`.
    pub samples_per_phase: Option<usize>,
    /// Hit-and-run steps per sample. Default `50 D`.
    pub walk_steps: Option<usize>,
    pub rounding_rounds: usize,
    /// Radius of a ball assumed inside the negative set. Default `1e-3 R`.
    pub inner_radius: Option<T>,
    /// Phase cap `T`. Default `ceil(D log2(R / r))`.
    pub max_phases: Option<usize>,
    pub direction_mode: DirectionMode,
    /// Checked between bisection rounds.
    pub query_budget: u64,
    pub trace: bool,
}

impl<T: Scalar> NegativeParams<T> {
    pub fn new(accuracy: T) -> Self {
        Self {
            accuracy,
            mode: GapMode::Multiplicative,
            samples_per_phase: None,
            walk_steps: None,
            rounding_rounds: 2,
            inner_radius: None,
            max_phases: None,
            direction_mode: DirectionMode::Centered,
            query_budget: DEFAULT_QUERY_BUDGET * 100,
            trace: false,
        }
    }

    pub fn with_trace_enabled(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn samples(&self, dim: usize) -> usize {
        self.samples_per_phase.unwrap_or(10 * dim).max(1)
    }

    pub fn steps(&self, dim: usize) -> usize {
        self.walk_steps.unwrap_or(50 * dim)
    }

    /// Phase cap for a body whose known negative has cost `outer`.
    pub fn phases(&self, dim: usize, outer: T) -> usize {
        if let Some(t) = self.max_phases {
            return t;
        }
        let inner = self.inner_radius.unwrap_or(outer * T::lit(1e-3));
        let ratio = (outer / inner).as_f64().max(1.0);
        ((dim as f64 * ratio.log2()) - 1e-9).ceil().max(1.0) as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.accuracy > T::zero()) || !self.accuracy.is_finite() {
            return Err(invalid("accuracy must be positive and finite"));
        }
        if let Some(r) = self.inner_radius {
            if !(r > T::zero()) {
                return Err(invalid("inner radius must be positive"));
            }
        }
        Ok(())
    }
}

/// Progress of one cutting-plane phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord<T> {
    /// Cost ball being tested.
    pub proposal: T,
    pub phase: usize,
    pub samples: usize,
    pub cuts: usize,
    /// Cheapest sample drawn so far in this search.
    pub best_cost: T,
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectOutcome<T> {
    /// A negative point with cost at most the proposal, if one was found.
    pub witness: Option<Vec<T>>,
    pub phases: usize,
    pub records: Vec<PhaseRecord<T>>,
}

impl<T> IntersectOutcome<T> {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

/// Outcome of one bisection round of [`set_search`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRound<T> {
    pub proposal: T,
    pub found: bool,
    pub witness_cost: Option<T>,
    pub phases: usize,
    pub queries: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetSearchResult<T> {
    pub result: EvasionResult<T>,
    pub rounds: Vec<SearchRound<T>>,
    /// Per-phase records, kept when tracing is enabled.
    pub phases: Vec<PhaseRecord<T>>,
}

/// Decides (with high probability) whether the cost ball of radius `cost` meets the body.
///
/// Each phase draws `2N` hit-and-run samples, returning the cheapest if any costs
/// at most `cost`. Otherwise the body is cut through the centroid `z` of the first
/// half with the cost's separating halfspace at `z`, and the second half's
/// survivors become the new sample set. When nothing is found the body and the
/// sample set are restored to their state on entry.
pub fn intersect_search<T, O, R>(
    body: &mut FeasibleBody<T, O>,
    samples: &mut SampleSet<T>,
    cost: T,
    params: &NegativeParams<T>,
    rng: &mut R,
) -> Result<IntersectOutcome<T>>
where
    T: Scalar,
    O: MembershipOracle<T>,
    R: Rng + ?Sized,
{
    params.validate()?;
    if samples.is_empty() {
        return Err(invalid("intersect search needs a non-empty sample set"));
    }
    let dim = body.dim();
    let n = params.samples(dim);
    let steps = params.steps(dim);
    let phases = params.phases(dim, body.radius() / T::lit(2.0));
    let spec = body.spec().clone();
    let saved_cuts = body.cuts().len();
    let saved_samples = samples.clone();
    let mut records = Vec::new();
    let mut best_cost = T::infinity();

    for phase in 1..=phases {
        let mut drawn = Vec::with_capacity(2 * n);
        for j in 0..2 * n {
            let start = samples.points()[j % samples.len()].clone();
            drawn.push(hit_and_run(body, samples, &start, steps, params.direction_mode, rng)?);
        }
        let costs: Vec<T> = drawn.iter().map(|x| spec.cost_unchecked(x)).collect();
        let (cheapest, &min_cost) = costs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite costs"))
            .expect("non-empty draw");
        best_cost = best_cost.min(min_cost);
        if min_cost <= cost {
            return Ok(found(drawn.swap_remove(cheapest), phase, records));
        }

        let second = drawn.split_off(n);
        let centroid = SampleSet::new(drawn)?;
        let z = centroid.mean().expect("non-empty");
        if spec.cost_unchecked(&z) <= cost && body.contains(&z) {
            return Ok(found(z, phase, records));
        }
        let cut = subgradient_halfspace(&z, &spec)?;
        body.add_cut(cut.clone())?;
        let mut survivors = SampleSet::new(second)?;
        survivors.retain_in(&cut);
        if survivors.is_empty() {
            let mut fallback = centroid;
            fallback.retain_in(&cut);
            let seed = fallback.points().first().cloned().ok_or_else(|| {
                Error::DegenerateBody("no samples survive the cut".into())
            })?;
            survivors = approximate_rounding(
                body,
                &seed,
                1,
                2 * n,
                steps,
                params.direction_mode,
                rng,
            )?;
        }
        *samples = survivors;
        if params.trace {
            records.push(PhaseRecord {
                proposal: cost,
                phase,
                samples: samples.len(),
                cuts: body.cuts().len(),
                best_cost,
                queries: body.query_count(),
            });
        }
    }
    body.truncate_cuts(saved_cuts);
    *samples = saved_samples;
    Ok(IntersectOutcome {
        witness: None,
        phases,
        records,
    })
}

fn found<T>(witness: Vec<T>, phases: usize, records: Vec<PhaseRecord<T>>) -> IntersectOutcome<T> {
    IntersectOutcome {
        witness: Some(witness),
        phases,
        records,
    }
}

/// Binary search on the cost with [`intersect_search`] deciding each proposal.
///
/// A found intersection lowers the upper bound to the witness cost and keeps the
/// cut body and samples, since cuts made for a cost stay valid for every smaller
/// cost. A miss raises the lower bound to the proposal. Lower bounds hold only with
/// high probability, so the result is never marked certified.
pub fn set_search<T, O, R>(
    body: &mut FeasibleBody<T, O>,
    samples: &mut SampleSet<T>,
    negative: &[T],
    bounds: BoundPair<T>,
    params: &NegativeParams<T>,
    rng: &mut R,
) -> Result<SetSearchResult<T>>
where
    T: Scalar,
    O: MembershipOracle<T>,
    R: Rng + ?Sized,
{
    params.validate()?;
    if bounds.mode != params.mode {
        return Err(invalid("bound mode differs from search mode"));
    }
    let spec = body.spec().clone();
    spec.check_point(negative)?;
    let start_queries = body.query_count();
    let mut witness = negative.to_vec();
    let entry_bounds = bounds;
    let entry_steps = crate::cost::steps_for_gap(&bounds, params.accuracy)?;
    let mut bounds = bounds;
    let mut rounds = Vec::new();
    let mut phases = Vec::new();
    let mut trace = Vec::new();
    let mut termination = Termination::Converged;

    while !bounds.converged(params.accuracy) {
        if body.query_count() - start_queries >= params.query_budget {
            termination = Termination::BudgetExhausted;
            break;
        }
        let c = bounds.proposal();
        if !(c > bounds.lower && c < bounds.upper) {
            return Err(Error::ParameterOutOfRange(
                "accuracy is below floating-point resolution".into(),
            ));
        }
        let before = body.query_count();
        let outcome = intersect_search(body, samples, c, params, rng)?;
        let witness_cost = outcome.witness.as_ref().map(|w| spec.cost_unchecked(w));
        match outcome.witness {
            Some(w) => {
                let cost = spec.cost_unchecked(&w);
                witness = w;
                bounds.upper = cost.max(bounds.lower);
            }
            None => bounds.lower = c,
        }
        rounds.push(SearchRound {
            proposal: c,
            found: witness_cost.is_some(),
            witness_cost,
            phases: outcome.phases,
            queries: body.query_count() - before,
        });
        phases.extend(outcome.records);
        if params.trace {
            trace.push(TraceRecord {
                iteration: rounds.len() as u64,
                lower: bounds.lower,
                upper: bounds.upper,
                queries: body.query_count() - start_queries,
                active_directions: samples.len(),
            });
        }
    }
    let witness_cost = spec.cost_unchecked(&witness);
    let iterations = rounds.len() as u64;
    Ok(SetSearchResult {
        result: EvasionResult {
            witness,
            witness_cost,
            bounds,
            queries: body.query_count() - start_queries,
            bootstrap_queries: 0,
            iterations,
            bisections: iterations,
            termination,
            certified: false,
            active_directions: samples.len(),
            entry_bounds: Some(entry_bounds),
            entry_steps: Some(entry_steps),
            query_ceiling: None,
            trace,
        },
        rounds,
        phases,
    })
}

/// Convex-negative pipeline from a single negative example: builds the body
/// `X- ∩ {A <= 2 A(x-)}`, rounds it once, then runs [`set_search`].
///
/// Without `lower` the search starts from `1e-3 A(x-)` in multiplicative mode
/// and from 0 in additive mode. `queries` includes the rounding, which is also
/// reported as `bootstrap_queries`.
pub fn evade_convex_negative<T, O, R>(
    spec: &CostSpec<T>,
    oracle: O,
    negative: &[T],
    lower: Option<T>,
    params: &NegativeParams<T>,
    rng: &mut R,
) -> Result<SetSearchResult<T>>
where
    T: Scalar,
    O: MembershipOracle<T>,
    R: Rng + ?Sized,
{
    params.validate()?;
    let outer = spec.cost(negative)?;
    if !(outer > T::zero()) {
        return Err(invalid("the negative example sits on the target; MAC is 0"));
    }
    let mut body = FeasibleBody::new(spec.clone(), outer * T::lit(2.0), oracle)?;
    let start = body.query_count();
    if !body.contains(negative) {
        return Err(Error::Inconsistent(
            "the supplied negative example is labelled positive".into(),
        ));
    }
    let dim = spec.dim();
    let mut samples = approximate_rounding(
        &mut body,
        negative,
        params.rounding_rounds,
        2 * params.samples(dim),
        params.steps(dim),
        params.direction_mode,
        rng,
    )?;
    let rounding = body.query_count() - start;
    let lower = lower.unwrap_or(match params.mode {
        GapMode::Multiplicative => outer * T::lit(1e-3),
        GapMode::Additive => T::zero(),
    });
    let bounds = BoundPair::new(lower.min(outer), outer, params.mode)?;
    let mut out = set_search(&mut body, &mut samples, negative, bounds, params, rng)?;
    out.result.queries += rounding;
    out.result.bootstrap_queries = rounding;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Oracle, SyntheticClassifier};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn slab(dim: usize) -> Oracle<f64, SyntheticClassifier<f64>> {
        let mut e1 = vec![0.0; dim];
        e1[0] = 1.0;
        let c = SyntheticClassifier::halfspace_box(e1, 2.0, &vec![-10.0; dim], &vec![10.0; dim])
            .unwrap();
        Oracle::new(c)
    }

    type SlabBody = FeasibleBody<f64, Oracle<f64, SyntheticClassifier<f64>>>;

    fn prepared(
        dim: usize,
        negative: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> (SlabBody, SampleSet<f64>) {
        let spec = CostSpec::unweighted(dim, 1.0).unwrap();
        let outer = spec.cost(negative).unwrap();
        let mut body = FeasibleBody::new(spec, 2.0 * outer, slab(dim)).unwrap();
        let q = approximate_rounding(&mut body, negative, 2, 20 * dim, 50 * dim, DirectionMode::Centered, rng)
            .unwrap();
        (body, q)
    }

    #[test]
    fn finds_intersection_above_mac() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut body, mut q) = prepared(2, &[4.0, 0.5], &mut rng);
        let out = intersect_search(&mut body, &mut q, 3.0, &NegativeParams::new(0.5), &mut rng).unwrap();
        let w = out.witness.expect("intersection exists");
        assert!(body.spec().cost(&w).unwrap() <= 3.0);
        assert!(w[0] >= 2.0);
    }

    #[test]
    fn misses_below_mac_and_restores() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (mut body, mut q) = prepared(2, &[4.0, 0.5], &mut rng);
        let before = q.clone();
        let mut params = NegativeParams::new(0.5);
        params.max_phases = Some(8);
        let out = intersect_search(&mut body, &mut q, 1.0, &params, &mut rng).unwrap();
        assert!(!out.found());
        assert_eq!(out.phases, 8);
        assert!(body.cuts().is_empty());
        assert_eq!(q, before);
    }

    #[test]
    fn cheap_seed_found_immediately() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut body, mut q) = prepared(2, &[2.5, 0.1], &mut rng);
        let out = intersect_search(&mut body, &mut q, 100.0, &NegativeParams::new(0.5), &mut rng).unwrap();
        assert_eq!(out.phases, 1);
        assert!(body.cuts().is_empty());
    }

    #[test]
    fn set_search_converges_on_slab() {
        for p in [1.0, 2.0] {
            let spec = CostSpec::unweighted(2, p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let params = NegativeParams::new(0.5).with_trace_enabled();
            let out = evade_convex_negative(&spec, slab(2), &[4.0, 0.5], Some(1.0), &params, &mut rng)
                .unwrap();
            let r = &out.result;
            assert!(r.converged());
            assert!(r.witness_cost <= 3.0, "p={p} cost={}", r.witness_cost);
            assert!(r.witness[0] >= 2.0);
            assert!(r.bounds.gap() <= 1.5);
            for pair in r.trace.windows(2) {
                assert!(pair[1].lower >= pair[0].lower && pair[1].upper <= pair[0].upper);
            }
        }
    }

    #[test]
    fn set_search_converged_at_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut body, mut q) = prepared(2, &[4.0, 0.5], &mut rng);
        let before = body.query_count();
        let b = BoundPair::multiplicative(4.0, 4.5).unwrap();
        let out = set_search(&mut body, &mut q, &[4.0, 0.5], b, &NegativeParams::new(0.5), &mut rng)
            .unwrap();
        assert!(out.rounds.is_empty());
        assert_eq!(body.query_count(), before);
    }
}
