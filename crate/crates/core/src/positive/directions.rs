use crate::cost::CostSpec;
use crate::error::{invalid, Error, Result};
use crate::scalar::{ray_point, Scalar};

/// Search directions radiating from the target, each of unit cost, with pruning flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet<T> {
    vectors: Vec<Vec<T>>,
    active: Vec<bool>,
}

impl<T: Scalar> DirectionSet<T> {
    /// Takes displacement vectors that already have unit cost under `spec`.
    pub fn new(vectors: Vec<Vec<T>>, spec: &CostSpec<T>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyDirectionSet);
        }
        for v in &vectors {
            let cost = spec.cost(&ray_point(spec.target(), v, T::one()))?;
            if (cost - T::one()).abs() > T::unit_cost_tolerance() {
                return Err(invalid(format!("direction has cost {cost}, expected 1")));
            }
        }
        let active = vec![true; vectors.len()];
        Ok(Self { vectors, active })
    }

    /// Rescales each non-zero displacement `v` to `v / A(t + v)`.
    pub fn normalized(vectors: Vec<Vec<T>>, spec: &CostSpec<T>) -> Result<Self> {
        let mut unit = Vec::with_capacity(vectors.len());
        for v in vectors {
            let cost = spec.cost(&ray_point(spec.target(), &v, T::one()))?;
            if !(cost > T::zero()) || !cost.is_finite() {
                return Err(invalid("direction must have finite positive cost"));
            }
            unit.push(v.into_iter().map(|x| x / cost).collect());
        }
        Self::new(unit, spec)
    }

    /// `+-e_d / c_d^{1/p}` in the order `+1, -1, +2, -2, ...`, skipping coordinates
    /// with infinite weight. Zero weights are rejected.
    pub fn axes(spec: &CostSpec<T>) -> Result<Self> {
        let mut vectors = Vec::with_capacity(2 * spec.dim());
        for d in axis_coordinates(spec)? {
            vectors.push(axis(spec, d, T::one()));
            vectors.push(axis(spec, d, -T::one()));
        }
        Self::new(vectors, spec)
    }

    /// Axis directions pointing into the orthant of `negative`: a single direction
    /// per coordinate where `negative` moved away from the target, both otherwise.
    pub fn linear(spec: &CostSpec<T>, negative: &[T]) -> Result<Self> {
        spec.check_point(negative)?;
        let mut vectors = Vec::with_capacity(2 * spec.dim());
        for d in axis_coordinates(spec)? {
            let delta = negative[d] - spec.target()[d];
            if delta > T::zero() {
                vectors.push(axis(spec, d, T::one()));
            } else if delta < T::zero() {
                vectors.push(axis(spec, d, -T::one()));
            } else {
                vectors.push(axis(spec, d, T::one()));
                vectors.push(axis(spec, d, -T::one()));
            }
        }
        Self::new(vectors, spec)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn direction(&self, i: usize) -> &[T] {
        &self.vectors[i]
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.active[i]).collect()
    }

    /// Deactivates a direction for the rest of the run.
    pub fn prune(&mut self, i: usize) {
        self.active[i] = false;
    }

    /// The active directions as a fresh set.
    pub fn surviving(&self) -> Result<Self> {
        let vectors: Vec<_> = self
            .active_indices()
            .into_iter()
            .map(|i| self.vectors[i].clone())
            .collect();
        if vectors.is_empty() {
            return Err(Error::EmptyDirectionSet);
        }
        let active = vec![true; vectors.len()];
        Ok(Self { vectors, active })
    }

    /// `t + cost * w_i`.
    pub fn point(&self, spec: &CostSpec<T>, i: usize, cost: T) -> Vec<T> {
        ray_point(spec.target(), &self.vectors[i], cost)
    }
}

fn axis_coordinates<T: Scalar>(spec: &CostSpec<T>) -> Result<Vec<usize>> {
    if spec.weights().iter().any(|&c| c == T::zero()) {
        return Err(invalid(
            "zero weights need the surrogate schedule of handle_degenerate_weights",
        ));
    }
    let coords: Vec<usize> = (0..spec.dim())
        .filter(|&d| spec.weights()[d].is_finite())
        .collect();
    if coords.is_empty() {
        return Err(Error::EmptyDirectionSet);
    }
    Ok(coords)
}

fn axis<T: Scalar>(spec: &CostSpec<T>, d: usize, sign: T) -> Vec<T> {
    let mut v = vec![T::zero(); spec.dim()];
    v[d] = sign * spec.unit_axis_length(d);
    v
}
