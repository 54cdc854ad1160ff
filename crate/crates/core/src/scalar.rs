//! Floating-point scalar abstraction shared by every algorithm in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar type the geometry and search code is generic over: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute cost-comparison tolerance at unit scale.
    fn cost_tolerance() -> Self;

    /// Tolerance used when validating that a search direction has unit cost.
    fn unit_cost_tolerance() -> Self;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f64 {
    fn cost_tolerance() -> Self {
        1e-12
    }

    fn unit_cost_tolerance() -> Self {
        1e-9
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }
}

impl Scalar for f32 {
    fn cost_tolerance() -> Self {
        1e-5
    }

    fn unit_cost_tolerance() -> Self {
        1e-5
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform01<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }
}

/// `a` and `b` agree within the cost tolerance scaled by `max(1, |b|)`.
pub fn cost_close<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::cost_tolerance() * T::one().max(b.abs())
}

/// Geometric mean computed in log space so extreme gaps do not overflow.
pub fn geometric_mean<T: Scalar>(a: T, b: T) -> T {
    ((a.ln() + b.ln()) / T::lit(2.0)).exp()
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `origin + scale * dir`.
pub(crate) fn ray_point<T: Scalar>(origin: &[T], dir: &[T], scale: T) -> Vec<T> {
    origin.iter().zip(dir).map(|(&o, &d)| o + scale * d).collect()
}
