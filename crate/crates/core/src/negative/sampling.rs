use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{FeasibleBody, SampleSet};
use crate::error::{invalid, Error, Result};
use crate::oracle::MembershipOracle;
use crate::scalar::{norm2, ray_point, Scalar};

/// How hit-and-run turns the sample set into a random direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMode {
    /// `v = sum_j nu_j (y_j - mean)`: a Gaussian with the samples' covariance.
    #[default]
    Centered,
    /// `v = sum_j nu_j y_j` over raw sample locations.
    Raw,
}

/// Cap on rejections while shrinking the chord interval.
const MAX_SHRINKS: usize = 200;

/// `steps` hit-and-run moves from `start`, which must lie in `body`.
///
/// Each move draws a Gaussian direction shaped by `samples`, brackets the chord
/// through the current point on both sides by doubling, and samples the chord
/// uniformly by shrinking the bracket toward the current point on rejection.
pub fn hit_and_run<T, O, R>(
    body: &mut FeasibleBody<T, O>,
    samples: &SampleSet<T>,
    start: &[T],
    steps: usize,
    mode: DirectionMode,
    rng: &mut R,
) -> Result<Vec<T>>
where
    T: Scalar,
    O: MembershipOracle<T>,
    R: Rng + ?Sized,
{
    if samples.is_empty() {
        return Err(invalid("hit-and-run needs a non-empty sample set"));
    }
    if start.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: start.len(),
        });
    }
    let mean = samples.mean().expect("non-empty");
    let extent = body.euclidean_extent();
    let mut x = start.to_vec();
    for _ in 0..steps {
        let v = direction(samples, &mean, mode, extent, rng);
        let forward = bracket(body, &x, &v, T::one(), extent)?;
        let backward = bracket(body, &x, &v, -T::one(), extent)?;
        x = sample_chord(body, &x, &v, -backward, forward, rng);
    }
    Ok(x)
}

fn direction<T: Scalar, R: Rng + ?Sized>(
    samples: &SampleSet<T>,
    mean: &[T],
    mode: DirectionMode,
    extent: T,
    rng: &mut R,
) -> Vec<T> {
    let dim = mean.len();
    let mut v = vec![T::zero(); dim];
    for y in samples.points() {
        let nu = T::standard_normal(rng);
        for d in 0..dim {
            let centered = match mode {
                DirectionMode::Centered => y[d] - mean[d],
                DirectionMode::Raw => y[d],
            };
            v[d] = v[d] + nu * centered;
        }
    }
    let scale = T::from_usize(samples.len()).unwrap().sqrt();
    v.iter_mut().for_each(|c| *c = *c / scale);
    if norm2(&v) > extent * T::lit(1e-9) {
        return v;
    }
    // Collapsed sample set (e.g. a single point): fall back to an isotropic direction.
    loop {
        let g: Vec<T> = (0..dim).map(|_| T::standard_normal(rng)).collect();
        let n = norm2(&g);
        if n > T::zero() {
            let s = extent * T::lit(1e-2) / n;
            return g.into_iter().map(|c| c * s).collect();
        }
    }
}

/// Smallest doubling `omega >= 1` with `x + sign * omega * v` outside the body.
fn bracket<T: Scalar, O: MembershipOracle<T>>(
    body: &mut FeasibleBody<T, O>,
    x: &[T],
    v: &[T],
    sign: T,
    extent: T,
) -> Result<T> {
    let limit = T::lit(4.0) * extent / norm2(v);
    let mut omega = T::one();
    while body.contains(&ray_point(x, v, sign * omega)) {
        omega = omega * T::lit(2.0);
        if omega > limit {
            return Err(Error::DegenerateBody(
                "chord does not leave the bounding ball".into(),
            ));
        }
    }
    Ok(omega)
}

fn sample_chord<T: Scalar, O: MembershipOracle<T>, R: Rng + ?Sized>(
    body: &mut FeasibleBody<T, O>,
    x: &[T],
    v: &[T],
    mut lo: T,
    mut hi: T,
    rng: &mut R,
) -> Vec<T> {
    for _ in 0..MAX_SHRINKS {
        let omega = lo + T::uniform01(rng) * (hi - lo);
        let y = ray_point(x, v, omega);
        if body.contains(&y) {
            return y;
        }
        if omega > T::zero() {
            hi = omega;
        } else {
            lo = omega;
        }
    }
    x.to_vec()
}

/// Builds an approximately uniform sample set of `size` points in `body`.
///
/// Seeds with `seed` plus one axis perturbation per coordinate and sign (step
/// halved until it lands inside), then performs `rounds` rounds of resampling by
/// hit-and-run chains whose directions follow the previous round's spread.
/// With `rounds = 0` the seed set itself is returned.
pub fn approximate_rounding<T, O, R>(
    body: &mut FeasibleBody<T, O>,
    seed: &[T],
    rounds: usize,
    size: usize,
    steps: usize,
    mode: DirectionMode,
    rng: &mut R,
) -> Result<SampleSet<T>>
where
    T: Scalar,
    O: MembershipOracle<T>,
    R: Rng + ?Sized,
{
    if seed.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: seed.len(),
        });
    }
    let mut points = vec![seed.to_vec()];
    for d in 0..body.dim() {
        let initial = body.radius() * body.spec().unit_axis_length(d) * T::lit(0.1);
        for sign in [T::one(), -T::one()] {
            let mut delta = initial;
            for _ in 0..40 {
                let mut y = seed.to_vec();
                y[d] = y[d] + sign * delta;
                if body.contains(&y) {
                    points.push(y);
                    break;
                }
                delta = delta / T::lit(2.0);
            }
        }
    }
    if points.len() == 1 {
        return Err(Error::DegenerateBody(
            "no axis perturbation of the seed stays inside the body".into(),
        ));
    }
    let mut set = SampleSet::new(points)?;
    for _ in 0..rounds {
        let mut next = Vec::with_capacity(size);
        for j in 0..size.max(1) {
            let start = set.points()[j % set.len()].clone();
            next.push(hit_and_run(body, &set, &start, steps, mode, rng)?);
        }
        set = SampleSet::new(next)?;
    }
    Ok(set)
}
