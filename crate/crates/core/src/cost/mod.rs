//! Weighted Lp cost functions, cost-ball geometry and separating halfspaces.

mod bounds;

pub use bounds::{
    binary_entropy, cap_covering_bound, hypercube_covering_bound, l2_query_lower_bound,
    lp_query_lower_bound,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{dot, Scalar};

/// Weighted Lp cost centred on a target point:
/// `A(x) = (sum_d c_d |x_d - t_d|^p)^(1/p)`, or `max_d c_d |x_d - t_d|` when `p = inf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSpec<T> {
    target: Vec<T>,
    weights: Vec<T>,
    exponent: T,
}

impl<T: Scalar> CostSpec<T> {
    /// Weights may be `0` or `+inf`; operations that cannot handle those say so.
    pub fn new(target: Vec<T>, weights: Vec<T>, exponent: T) -> Result<Self> {
        if target.is_empty() {
            return Err(invalid("cost dimension must be at least 1"));
        }
        if weights.len() != target.len() {
            return Err(Error::DimensionMismatch {
                expected: target.len(),
                got: weights.len(),
            });
        }
        if target.iter().any(|t| !t.is_finite()) {
            return Err(invalid("target must be finite in every coordinate"));
        }
        if weights.iter().any(|w| w.is_nan() || *w < T::zero()) {
            return Err(invalid("weights must lie in [0, inf]"));
        }
        if exponent.is_nan() || exponent <= T::zero() {
            return Err(invalid("exponent must lie in (0, inf]"));
        }
        Ok(Self {
            target,
            weights,
            exponent,
        })
    }

    /// Unit weights, target at the origin.
    pub fn unweighted(dim: usize, exponent: T) -> Result<Self> {
        Self::new(vec![T::zero(); dim], vec![T::one(); dim], exponent)
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &[T] {
        &self.target
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn is_infinity_norm(&self) -> bool {
        self.exponent.is_infinite()
    }

    /// All weights finite and strictly positive.
    pub fn has_regular_weights(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite() && *w > T::zero())
    }

    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        Self::new(self.target.clone(), weights, self.exponent)
    }

    pub fn with_target(&self, target: Vec<T>) -> Result<Self> {
        Self::new(target, self.weights.clone(), self.exponent)
    }

    /// Cost of `x`. Coordinates that do not move contribute nothing, whatever their weight.
    pub fn cost(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        Ok(self.cost_unchecked(x))
    }

    pub(crate) fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("point has a non-finite coordinate"));
        }
        Ok(())
    }

    pub(crate) fn cost_unchecked(&self, x: &[T]) -> T {
        let p = self.exponent;
        let terms = x
            .iter()
            .zip(&self.target)
            .zip(&self.weights)
            .filter_map(|((&xi, &ti), &c)| {
                let delta = (xi - ti).abs();
                (delta > T::zero()).then_some((c, delta))
            });
        if p.is_infinite() {
            terms.fold(T::zero(), |m, (c, delta)| m.max(c * delta))
        } else if p == T::one() {
            terms.fold(T::zero(), |s, (c, delta)| s + c * delta)
        } else if p == T::lit(2.0) {
            terms.fold(T::zero(), |s, (c, delta)| s + c * delta * delta).sqrt()
        } else {
            terms
                .fold(T::zero(), |s, (c, delta)| s + c * delta.powf(p))
                .powf(p.recip())
        }
    }

    /// Length of the axis-`d` step that costs exactly one unit.
    pub fn unit_axis_length(&self, d: usize) -> T {
        let c = self.weights[d];
        if self.exponent.is_infinite() {
            c.recip()
        } else {
            c.powf(-self.exponent.recip())
        }
    }

    /// Per-coordinate factor mapping displacements into the unweighted frame
    /// where this cost is a plain Lp norm.
    pub(crate) fn frame_scale(&self, d: usize) -> T {
        self.unit_axis_length(d).recip()
    }

    fn require_regular(&self, what: &str) -> Result<()> {
        if self.has_regular_weights() {
            Ok(())
        } else {
            Err(invalid(format!("{what} requires finite, positive weights")))
        }
    }
}

/// Free-function form of [`CostSpec::cost`].
pub fn evaluate_cost<T: Scalar>(x: &[T], spec: &CostSpec<T>) -> Result<T> {
    spec.cost(x)
}

/// Closed sublevel set `{x : A(x) <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBall<T> {
    spec: CostSpec<T>,
    radius: T,
}

impl<T: Scalar> CostBall<T> {
    pub fn new(spec: CostSpec<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(invalid("cost-ball radius must be positive"));
        }
        Ok(Self { spec, radius })
    }

    pub fn spec(&self) -> &CostSpec<T> {
        &self.spec
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.spec.cost_unchecked(x) <= self.radius
    }
}

/// Closed halfspace `{x : normal . x <= offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace<T> {
    normal: Vec<T>,
    offset: T,
}

impl<T: Scalar> Halfspace<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        if normal.is_empty() || normal.iter().all(|v| *v == T::zero()) {
            return Err(invalid("halfspace normal must be non-zero"));
        }
        if normal.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
            return Err(invalid("halfspace must be finite"));
        }
        Ok(Self { normal, offset })
    }

    /// Halfspace with the given normal whose boundary passes through `point`.
    pub fn through(normal: Vec<T>, point: &[T]) -> Result<Self> {
        let offset = dot(&normal, point);
        Self::new(normal, offset)
    }

    pub fn normal(&self) -> &[T] {
        &self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `normal . x - offset`; non-positive inside.
    pub fn slack(&self, x: &[T]) -> T {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.slack(x) <= T::zero()
    }
}

/// Whether optimality is judged by ratio or by difference of the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GapMode {
    #[default]
    Multiplicative,
    Additive,
}

/// Certified lower bound (`lower`, a cost ball known to be positive) and the
/// cost of a known negative instance (`upper`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair<T> {
    pub lower: T,
    pub upper: T,
    pub mode: GapMode,
}

impl<T: Scalar> BoundPair<T> {
    pub fn new(lower: T, upper: T, mode: GapMode) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(invalid("bounds must be finite"));
        }
        match mode {
            GapMode::Multiplicative if lower <= T::zero() => {
                return Err(invalid(
                    "multiplicative mode requires a strictly positive lower bound",
                ))
            }
            GapMode::Additive if lower < T::zero() => {
                return Err(invalid("lower bound must be non-negative"))
            }
            _ => {}
        }
        if lower > upper {
            return Err(invalid("lower bound exceeds upper bound"));
        }
        Ok(Self { lower, upper, mode })
    }

    pub fn multiplicative(lower: T, upper: T) -> Result<Self> {
        Self::new(lower, upper, GapMode::Multiplicative)
    }

    pub fn additive(lower: T, upper: T) -> Result<Self> {
        Self::new(lower, upper, GapMode::Additive)
    }

    /// `upper / lower` or `upper - lower`.
    pub fn gap(&self) -> T {
        match self.mode {
            GapMode::Multiplicative => self.upper / self.lower,
            GapMode::Additive => self.upper - self.lower,
        }
    }

    /// Next cost to probe: geometric or arithmetic mean of the bounds.
    pub fn proposal(&self) -> T {
        match self.mode {
            GapMode::Multiplicative => crate::scalar::geometric_mean(self.lower, self.upper),
            GapMode::Additive => (self.lower + self.upper) / T::lit(2.0),
        }
    }

    /// Stop rule: `gap <= 1 + eps` or `gap <= eta`.
    pub fn converged(&self, accuracy: T) -> bool {
        match self.mode {
            GapMode::Multiplicative => self.gap() <= T::one() + accuracy,
            GapMode::Additive => self.gap() <= accuracy,
        }
    }
}

/// Number of bisection steps binary search needs to close the gap to `accuracy`.
pub fn steps_for_gap<T: Scalar>(bounds: &BoundPair<T>, accuracy: T) -> Result<u32> {
    if !(accuracy > T::zero()) {
        return Err(invalid("accuracy must be positive"));
    }
    let raw = match bounds.mode {
        GapMode::Multiplicative => {
            if !(bounds.lower > T::zero()) {
                return Err(invalid("zero lower bound in multiplicative mode"));
            }
            let ratio = (bounds.upper / bounds.lower).as_f64();
            let per_step = (1.0 + accuracy.as_f64()).log2();
            if ratio.log2() <= per_step {
                return Ok(0);
            }
            (ratio.log2() / per_step).log2()
        }
        GapMode::Additive => {
            let gap = (bounds.upper - bounds.lower).as_f64();
            if gap <= accuracy.as_f64() {
                return Ok(0);
            }
            (gap / accuracy.as_f64()).log2()
        }
    };
    Ok((raw - 1e-9).ceil().max(0.0) as u32)
}

/// The `2D` vertices `t +- (C / c_d) e_d` of the weighted L1 ball of cost `radius`,
/// ordered `+e_1, -e_1, +e_2, -e_2, ...`.
pub fn l1_ball_vertices<T: Scalar>(radius: T, spec: &CostSpec<T>) -> Result<Vec<Vec<T>>> {
    if spec.exponent() != T::one() {
        return Err(invalid("L1-ball vertices require p = 1"));
    }
    spec.require_regular("l1_ball_vertices")?;
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(invalid("cost-ball radius must be positive"));
    }
    let mut out = Vec::with_capacity(2 * spec.dim());
    for d in 0..spec.dim() {
        let step = radius / spec.weights[d];
        for sign in [T::one(), -T::one()] {
            let mut v = spec.target.clone();
            v[d] = v[d] + sign * step;
            out.push(v);
        }
    }
    Ok(out)
}

/// Separating halfspace `{x : h . x <= h . y}` containing every `x` with `A(x) <= A(y)`.
///
/// `h` is a subgradient of the cost at `y`. For `p = inf` every coordinate attaining
/// the maximum contributes to `h`.
pub fn subgradient_halfspace<T: Scalar>(y: &[T], spec: &CostSpec<T>) -> Result<Halfspace<T>> {
    spec.check_point(y)?;
    if spec.exponent() < T::one() {
        return Err(invalid("subgradient halfspaces require p >= 1"));
    }
    spec.require_regular("subgradient_halfspace")?;
    let cost = spec.cost_unchecked(y);
    if cost == T::zero() {
        return Err(Error::DegenerateSubgradient);
    }
    let p = spec.exponent();
    let normal: Vec<T> = y
        .iter()
        .zip(spec.target())
        .zip(spec.weights())
        .map(|((&yi, &ti), &c)| {
            let delta = yi - ti;
            let sign = if delta > T::zero() {
                T::one()
            } else if delta < T::zero() {
                -T::one()
            } else {
                T::zero()
            };
            if p == T::one() {
                c * sign
            } else if p.is_infinite() {
                if crate::scalar::cost_close(c * delta.abs(), cost) {
                    c * sign
                } else {
                    T::zero()
                }
            } else {
                c * sign * (delta.abs() / cost).powf(p - T::one())
            }
        })
        .collect();
    Halfspace::through(normal, y)
}

/// `||v||_q` with `1/p + 1/q = 1`.
fn dual_norm<T: Scalar>(v: &[T], p: T) -> T {
    if p == T::one() {
        v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    } else if p.is_infinite() {
        v.iter().fold(T::zero(), |s, x| s + x.abs())
    } else {
        let q = p / (p - T::one());
        v.iter()
            .fold(T::zero(), |s, x| s + x.abs().powf(q))
            .powf(q.recip())
    }
}

/// Halfspace normal expressed in the unweighted frame `x'_d = s_d (x_d - t_d)`.
fn normal_in_frame<T: Scalar>(w: &[T], spec: &CostSpec<T>) -> Vec<T> {
    w.iter()
        .enumerate()
        .map(|(d, &wd)| wd / spec.frame_scale(d))
        .collect()
}

fn check_halfspace_args<T: Scalar>(w: &[T], spec: &CostSpec<T>) -> Result<()> {
    if w.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: w.len(),
        });
    }
    if w.iter().all(|v| *v == T::zero()) {
        return Err(invalid("halfspace normal must be non-zero"));
    }
    if spec.exponent() < T::one() {
        return Err(invalid("closed-form halfspace MAC requires p >= 1"));
    }
    spec.require_regular("halfspace_lp_mac")
}

fn displacement<T: Scalar>(w: &[T], b: &[T], spec: &CostSpec<T>) -> Result<T> {
    spec.check_point(b)?;
    Ok(b
        .iter()
        .zip(spec.target())
        .zip(w)
        .fold(T::zero(), |s, ((&bi, &ti), &wi)| s + (bi - ti) * wi))
}

/// Exact minimal adversarial cost of the classifier whose negative set is
/// `{x : x . w >= b . w}`: `d / ||w||_q` for displacement `d = (b - t) . w > 0`, else 0.
///
/// Weighted costs are reduced to the unweighted case by rescaling coordinates.
pub fn halfspace_lp_mac<T: Scalar>(w: &[T], b: &[T], spec: &CostSpec<T>) -> Result<T> {
    check_halfspace_args(w, spec)?;
    let d = displacement(w, b, spec)?;
    mac_for_displacement(w, d, spec)
}

/// [`halfspace_lp_mac`] for the halfspace `{x : x . w >= t . w + displacement}`.
pub(crate) fn mac_for_displacement<T: Scalar>(
    w: &[T],
    displacement: T,
    spec: &CostSpec<T>,
) -> Result<T> {
    check_halfspace_args(w, spec)?;
    if displacement <= T::zero() {
        return Ok(T::zero());
    }
    let w_frame = normal_in_frame(w, spec);
    Ok(displacement / dual_norm(&w_frame, spec.exponent()))
}

/// A point of the halfspace `{x : x . w >= b . w}` attaining [`halfspace_lp_mac`].
pub fn halfspace_lp_minimizer<T: Scalar>(w: &[T], b: &[T], spec: &CostSpec<T>) -> Result<Vec<T>> {
    check_halfspace_args(w, spec)?;
    let d = displacement(w, b, spec)?;
    minimizer_for_displacement(w, d, spec)
}

pub(crate) fn minimizer_for_displacement<T: Scalar>(
    w: &[T],
    displacement: T,
    spec: &CostSpec<T>,
) -> Result<Vec<T>> {
    check_halfspace_args(w, spec)?;
    if displacement <= T::zero() {
        return Ok(spec.target().to_vec());
    }
    let p = spec.exponent();
    let wf = normal_in_frame(w, spec);
    let sign = |v: T| if v < T::zero() { -T::one() } else { T::one() };
    let frame: Vec<T> = if p == T::one() {
        let (k, wk) = wf
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(bk, bv), (i, &v)| {
                if v.abs() > bv {
                    (i, v.abs())
                } else {
                    (bk, bv)
                }
            });
        let mut x = vec![T::zero(); wf.len()];
        x[k] = sign(wf[k]) * displacement / wk;
        x
    } else if p.is_infinite() {
        let l1 = dual_norm(&wf, p);
        wf.iter()
            .map(|&v| {
                if v == T::zero() {
                    T::zero()
                } else {
                    sign(v) * displacement / l1
                }
            })
            .collect()
    } else {
        let q = p / (p - T::one());
        let sum_q = wf.iter().fold(T::zero(), |s, v| s + v.abs().powf(q));
        wf.iter()
            .map(|&v| sign(v) * (displacement / sum_q) * v.abs().powf((p - T::one()).recip()))
            .collect()
    };
    Ok(frame
        .iter()
        .enumerate()
        .map(|(d, &xf)| spec.target()[d] + xf / spec.frame_scale(d))
        .collect())
}

/// Radius of the largest centred Lp ball inside the unit L1 ball.
pub fn enclosed_lp_radius<T: Scalar>(dim: usize, p: T) -> Result<T> {
    if dim == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if p.is_nan() || p < T::one() {
        return Err(invalid("enclosed radius is defined for p >= 1"));
    }
    let d = T::from_usize(dim).expect("dimension fits");
    Ok(if p == T::one() {
        T::one()
    } else if p.is_infinite() {
        d.recip()
    } else {
        d.powf((T::one() - p) / p)
    })
}
