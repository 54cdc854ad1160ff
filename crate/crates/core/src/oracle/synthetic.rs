//! Classifiers with known ground truth, plus closed-form and brute-force MAC.

use serde::{Deserialize, Serialize};

use super::{Classifier, Label};
use crate::cost::{mac_for_displacement, minimizer_for_displacement, CostSpec, Halfspace};
use crate::error::{invalid, Error, Result};
use crate::scalar::{dot, Scalar};

/// Which of the two classes is convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvexClass {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SyntheticClassifier<T> {
    /// Negative set `{x : x . normal >= level}`.
    Halfspace { normal: Vec<T>, level: T },
    /// `+1` iff `A(x) < threshold` (open ball, so the boundary is negative).
    OpenCostBall { spec: CostSpec<T>, threshold: T },
    /// Positive set is the intersection of the faces.
    Polytope { faces: Vec<Halfspace<T>> },
    /// Negative set is the intersection of the faces.
    ConvexNegative { faces: Vec<Halfspace<T>> },
}

impl<T: Scalar> SyntheticClassifier<T> {
    /// Negative set `{x : x . w >= b . w}`.
    pub fn halfspace(normal: Vec<T>, anchor: &[T]) -> Result<Self> {
        if normal.len() != anchor.len() {
            return Err(Error::DimensionMismatch {
                expected: normal.len(),
                got: anchor.len(),
            });
        }
        if normal.iter().all(|v| *v == T::zero()) {
            return Err(invalid("halfspace normal must be non-zero"));
        }
        let level = dot(&normal, anchor);
        Ok(Self::Halfspace { normal, level })
    }

    pub fn open_cost_ball(spec: CostSpec<T>, threshold: T) -> Result<Self> {
        if !(threshold > T::zero()) || !threshold.is_finite() {
            return Err(invalid("ball threshold must be positive and finite"));
        }
        Ok(Self::OpenCostBall { spec, threshold })
    }

    pub fn polytope(faces: Vec<Halfspace<T>>) -> Result<Self> {
        check_faces(&faces)?;
        Ok(Self::Polytope { faces })
    }

    pub fn convex_negative(faces: Vec<Halfspace<T>>) -> Result<Self> {
        check_faces(&faces)?;
        Ok(Self::ConvexNegative { faces })
    }

    /// Axis-aligned box `[lo, hi]` intersected with `{x : x . w >= level}` as a negative set.
    pub fn halfspace_box(normal: Vec<T>, level: T, lo: &[T], hi: &[T]) -> Result<Self> {
        let dim = normal.len();
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lo.len().min(hi.len()),
            });
        }
        let mut faces = vec![Halfspace::new(normal.iter().map(|&v| -v).collect(), -level)?];
        for d in 0..dim {
            let mut e = vec![T::zero(); dim];
            e[d] = T::one();
            faces.push(Halfspace::new(e.clone(), hi[d])?);
            e[d] = -T::one();
            faces.push(Halfspace::new(e, -lo[d])?);
        }
        Self::convex_negative(faces)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Halfspace { normal, .. } => normal.len(),
            Self::OpenCostBall { spec, .. } => spec.dim(),
            Self::Polytope { faces } | Self::ConvexNegative { faces } => faces[0].dim(),
        }
    }

    pub fn convex_class(&self) -> ConvexClass {
        match self {
            Self::Halfspace { .. } | Self::OpenCostBall { .. } | Self::Polytope { .. } => {
                ConvexClass::Positive
            }
            Self::ConvexNegative { .. } => ConvexClass::Negative,
        }
    }

    /// Stateless label.
    pub fn label(&self, x: &[T]) -> Label {
        let negative = match self {
            Self::Halfspace { normal, level } => dot(normal, x) >= *level,
            Self::OpenCostBall { spec, threshold } => spec.cost_unchecked(x) >= *threshold,
            Self::Polytope { faces } => !faces.iter().all(|f| f.contains(x)),
            Self::ConvexNegative { faces } => faces.iter().all(|f| f.contains(x)),
        };
        if negative {
            Label::Negative
        } else {
            Label::Positive
        }
    }

    /// Returns a copy whose cost-dependent parameters are rescaled to `spec`.
    pub fn with_ball_spec(&self, spec: CostSpec<T>, threshold: T) -> Result<Self> {
        match self {
            Self::OpenCostBall { .. } => Self::open_cost_ball(spec, threshold),
            _ => Err(invalid("only cost-ball classifiers carry a cost spec")),
        }
    }
}

fn check_faces<T: Scalar>(faces: &[Halfspace<T>]) -> Result<()> {
    let first = faces
        .first()
        .ok_or_else(|| invalid("need at least one face"))?;
    if let Some(bad) = faces.iter().find(|f| f.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: bad.dim(),
        });
    }
    Ok(())
}

impl<T: Scalar> Classifier<T> for SyntheticClassifier<T> {
    fn classify(&mut self, x: &[T]) -> Label {
        self.label(x)
    }
}

impl<T: Scalar> Classifier<T> for &SyntheticClassifier<T> {
    fn classify(&mut self, x: &[T]) -> Label {
        self.label(x)
    }
}

/// Exact MAC where a closed form exists; [`Error::NotAvailable`] otherwise.
///
/// * halfspace: dual-norm formula;
/// * open cost ball under the same cost: its threshold;
/// * positive polytope: minimum of the per-face halfspace MACs;
/// * negative polytope: the largest per-face MAC, when that face's minimizer is
///   feasible for every other face.
pub fn analytic_mac<T: Scalar>(classifier: &SyntheticClassifier<T>, spec: &CostSpec<T>) -> Result<T> {
    if classifier.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: classifier.dim(),
        });
    }
    let target = spec.target();
    match classifier {
        SyntheticClassifier::Halfspace { normal, level } => {
            mac_for_displacement(normal, *level - dot(normal, target), spec)
        }
        SyntheticClassifier::OpenCostBall {
            spec: ball_spec,
            threshold,
        } => {
            if ball_spec == spec {
                Ok(*threshold)
            } else {
                Err(Error::NotAvailable)
            }
        }
        SyntheticClassifier::Polytope { faces } => {
            // Negative set is the union of the open complements {n . x > o}.
            let mut best = T::infinity();
            for f in faces {
                let d = f.offset() - dot(f.normal(), target);
                best = best.min(mac_for_displacement(f.normal(), d, spec)?);
            }
            Ok(best)
        }
        SyntheticClassifier::ConvexNegative { faces } => {
            if faces.iter().all(|f| f.contains(target)) {
                return Ok(T::zero());
            }
            let mut best: Option<(T, Vec<T>)> = None;
            for f in faces {
                let w: Vec<T> = f.normal().iter().map(|&v| -v).collect();
                let d = dot(f.normal(), target) - f.offset();
                let mac = mac_for_displacement(&w, d, spec)?;
                if best.as_ref().is_none_or(|(m, _)| mac > *m) {
                    best = Some((mac, minimizer_for_displacement(&w, d, spec)?));
                }
            }
            let (mac, point) = best.expect("at least one face");
            let tol = T::cost_tolerance();
            let feasible = faces.iter().all(|f| {
                let scale = T::one().max(f.offset().abs());
                f.slack(&point) <= tol * scale
            });
            if feasible {
                Ok(mac)
            } else {
                Err(Error::NotAvailable)
            }
        }
    }
}

/// Grid-search MAC bracket for a synthetic classifier. See [`brute_force_mac_with`].
pub fn brute_force_mac<T: Scalar>(
    classifier: &SyntheticClassifier<T>,
    spec: &CostSpec<T>,
    resolution: T,
    lower_corner: &[T],
    upper_corner: &[T],
) -> Result<(T, T)> {
    brute_force_mac_with(|x| classifier.label(x), spec, resolution, lower_corner, upper_corner)
}

/// Grid-search MAC bracket `[lo, hi]` for any pointwise-decidable labelling.
///
/// `hi` is the smallest cost over negative grid points; `lo` subtracts the largest
/// cost change across one grid cell. Limited to `D <= 3`; the box must contain a
/// negative point and the true minimizer.
pub fn brute_force_mac_with<T: Scalar, F: FnMut(&[T]) -> Label>(
    mut label: F,
    spec: &CostSpec<T>,
    resolution: T,
    lower_corner: &[T],
    upper_corner: &[T],
) -> Result<(T, T)> {
    let dim = spec.dim();
    if dim > 3 {
        return Err(invalid("brute-force MAC is limited to D <= 3"));
    }
    if lower_corner.len() != dim || upper_corner.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: lower_corner.len().min(upper_corner.len()),
        });
    }
    if !(resolution > T::zero()) {
        return Err(invalid("grid resolution must be positive"));
    }
    if spec.exponent() < T::one() || !spec.has_regular_weights() {
        return Err(invalid("brute-force MAC needs p >= 1 and regular weights"));
    }
    let counts: Vec<usize> = (0..dim)
        .map(|d| {
            let span = (upper_corner[d] - lower_corner[d]) / resolution;
            span.floor().to_usize().unwrap_or(0) + 1
        })
        .collect();
    let mut index = vec![0usize; dim];
    let mut point = lower_corner.to_vec();
    let mut best = T::infinity();
    'outer: loop {
        for d in 0..dim {
            point[d] = lower_corner[d] + T::from_usize(index[d]).unwrap() * resolution;
        }
        let cost = spec.cost_unchecked(&point);
        if cost < best && label(&point).is_negative() {
            best = cost;
        }
        for d in 0..dim {
            index[d] += 1;
            if index[d] < counts[d] {
                continue 'outer;
            }
            index[d] = 0;
        }
        break;
    }
    if !best.is_finite() {
        return Err(Error::SearchExhausted);
    }
    let p = spec.exponent();
    let lipschitz = if p.is_infinite() {
        spec.weights().iter().fold(T::zero(), |m, &c| m.max(c))
    } else {
        spec.weights()
            .iter()
            .fold(T::zero(), |s, &c| s + c)
            .powf(p.recip())
    };
    Ok(((best - lipschitz * resolution).max(T::zero()), best))
}
