use crate::cost::{CostSpec, Halfspace};
use crate::error::{invalid, Error, Result};
use crate::oracle::MembershipOracle;
use crate::scalar::Scalar;

/// Convex body `{x : oracle(x) = -1, A(x) <= radius} ∩ cuts`, known only through
/// membership tests. Cheap constraints are checked before the oracle is queried.
#[derive(Debug)]
pub struct FeasibleBody<T, O> {
    spec: CostSpec<T>,
    radius: T,
    cuts: Vec<Halfspace<T>>,
    oracle: O,
}

impl<T: Scalar, O: MembershipOracle<T>> FeasibleBody<T, O> {
    /// `radius` is the cost-ball bound around the target, usually twice the cost of
    /// the known negative example.
    pub fn new(spec: CostSpec<T>, radius: T, oracle: O) -> Result<Self> {
        if !spec.has_regular_weights() {
            return Err(invalid("feasible bodies need finite positive weights"));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(invalid("bounding radius must be positive and finite"));
        }
        Ok(Self {
            spec,
            radius,
            cuts: Vec::new(),
            oracle,
        })
    }

    pub fn spec(&self) -> &CostSpec<T> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn cuts(&self) -> &[Halfspace<T>] {
        &self.cuts
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn into_oracle(self) -> O {
        self.oracle
    }

    pub fn add_cut(&mut self, cut: Halfspace<T>) -> Result<()> {
        if cut.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: cut.dim(),
            });
        }
        self.cuts.push(cut);
        Ok(())
    }

    pub(crate) fn truncate_cuts(&mut self, len: usize) {
        self.cuts.truncate(len);
    }

    /// Membership without querying the oracle: ball and cuts only.
    pub fn satisfies_constraints(&self, x: &[T]) -> bool {
        self.spec.cost_unchecked(x) <= self.radius && self.cuts.iter().all(|c| c.contains(x))
    }

    /// Full membership test; queries the oracle only when the cheap checks pass.
    pub fn contains(&mut self, x: &[T]) -> bool {
        if x.iter().any(|v| !v.is_finite()) || !self.satisfies_constraints(x) {
            return false;
        }
        self.oracle.query(x).is_negative()
    }

    pub fn query_count(&self) -> u64 {
        self.oracle.query_count()
    }

    /// Euclidean radius of a box around the target that contains the body.
    pub(crate) fn euclidean_extent(&self) -> T {
        (0..self.dim())
            .map(|d| {
                let half = self.radius * self.spec.unit_axis_length(d);
                half * half
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

/// Points believed to be uniform in the current body.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    points: Vec<Vec<T>>,
}

impl<T: Scalar> SampleSet<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        if let Some(first) = points.first() {
            if let Some(bad) = points.iter().find(|p| p.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: bad.len(),
                });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Vec<T>> {
        self.points
    }

    pub fn mean(&self) -> Option<Vec<T>> {
        let first = self.points.first()?;
        let n = T::from_usize(self.points.len()).unwrap();
        let mut mean = vec![T::zero(); first.len()];
        for p in &self.points {
            for (m, &v) in mean.iter_mut().zip(p) {
                *m = *m + v;
            }
        }
        Some(mean.into_iter().map(|m| m / n).collect())
    }

    /// Keeps the points inside `cut`.
    pub fn retain_in(&mut self, cut: &Halfspace<T>) {
        self.points.retain(|p| cut.contains(p));
    }
}
