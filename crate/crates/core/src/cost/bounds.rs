//! Closed-form query lower bounds and covering numbers.
//!
//! All calculators return reals; callers round as needed.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Binary entropy `H(d) = -d log2 d - (1-d) log2 (1-d)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy<T: Scalar>(delta: T) -> T {
    let term = |v: T| {
        if v <= T::zero() {
            T::zero()
        } else {
            -v * v.log2()
        }
    };
    term(delta) + term(T::one() - delta)
}

/// Minimum size `2^(D (1 - H(delta)))` of a Hamming covering of the D-cube graph
/// with radius `floor(delta D)`.
pub fn hypercube_covering_bound<T: Scalar>(dim: usize, delta: T) -> Result<T> {
    let half = T::lit(0.5);
    if !(delta > T::zero() && delta < half) {
        return Err(invalid("delta must lie in (0, 1/2)"));
    }
    let d = T::from_usize(dim).expect("dimension fits");
    Ok(T::lit(2.0).powf(d * (T::one() - binary_entropy(delta))))
}

/// Spherical caps of half-angle `phi` needed to cover the unit sphere: `(1 / sin phi)^(D-2)`.
pub fn cap_covering_bound<T: Scalar>(dim: usize, phi: T) -> Result<T> {
    if dim < 2 {
        return Err(invalid("cap covering needs D >= 2"));
    }
    let half_pi = T::lit(std::f64::consts::FRAC_PI_2);
    if !(phi > T::zero() && phi <= half_pi) {
        return Err(invalid("phi must lie in (0, pi/2]"));
    }
    let exponent = T::from_usize(dim - 2).expect("dimension fits");
    Ok(phi.sin().recip().powf(exponent))
}

/// Worst-case query lower bound for L2 costs: `alpha^((D-2)/2)` with
/// `alpha = (1+eps)^2 / ((1+eps)^2 - 1)`.
pub fn l2_query_lower_bound<T: Scalar>(dim: usize, epsilon: T) -> Result<T> {
    if dim < 2 {
        return Err(invalid("L2 lower bound needs D >= 2"));
    }
    if !(epsilon > T::zero()) {
        return Err(invalid("epsilon must be positive"));
    }
    let sq = (T::one() + epsilon).powi(2);
    let alpha = sq / (sq - T::one());
    let exponent = T::from_usize(dim - 2).expect("dimension fits") / T::lit(2.0);
    Ok(alpha.powf(exponent))
}

/// Worst-case query lower bound `alpha_{p,eps}^D` for Lp costs with `p > 1`,
/// where `alpha = 2^(1 - H(delta))`.
pub fn lp_query_lower_bound<T: Scalar>(dim: usize, p: T, epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) {
        return Err(invalid("epsilon must be positive"));
    }
    let delta = if p.is_infinite() {
        if epsilon >= T::one() {
            return Err(invalid("p = inf requires eps < 1"));
        }
        epsilon / (T::one() + epsilon)
    } else {
        if !(p > T::one()) {
            return Err(invalid("Lp lower bound needs p > 1"));
        }
        let limit = T::lit(2.0).powf((p - T::one()) / p) - T::one();
        if epsilon >= limit {
            return Err(invalid(format!("eps must be below 2^((p-1)/p) - 1 = {limit}")));
        }
        let scaled = (T::one() + epsilon).powf(p / (p - T::one()));
        (scaled - T::one()) / scaled
    };
    let alpha = T::lit(2.0).powf(T::one() - binary_entropy(delta));
    let d = T::from_usize(dim).expect("dimension fits");
    Ok(alpha.powf(d))
}
