use super::{Classifier, Label};
use crate::cost::{BoundPair, CostSpec};
use crate::error::{invalid, Result};
use crate::scalar::{geometric_mean, Scalar};

/// Adversarial responder for the multiplicative lower bound.
///
/// Answers `+1` iff `A(x) <= sqrt(lower * upper)` for its current bounds, then
/// raises `lower` (on `+1`) or lowers `upper` (on `-1`) to `A(x)`. Every
/// transcript it produces is realised by the open ball of radius `upper`.
#[derive(Debug, Clone)]
pub struct MaliciousClassifier<T> {
    spec: CostSpec<T>,
    lower: T,
    upper: T,
}

impl<T: Scalar> MaliciousClassifier<T> {
    pub fn new(spec: CostSpec<T>, lower: T, upper: T) -> Result<Self> {
        if !(lower > T::zero() && lower < upper && upper.is_finite()) {
            return Err(invalid("malicious oracle needs 0 < lower < upper"));
        }
        Ok(Self { spec, lower, upper })
    }

    pub fn bounds(&self) -> BoundPair<T> {
        BoundPair::multiplicative(self.lower, self.upper).expect("bounds kept ordered")
    }

    pub fn spec(&self) -> &CostSpec<T> {
        &self.spec
    }

    pub fn respond(&mut self, x: &[T]) -> Label {
        let cost = self.spec.cost_unchecked(x);
        if cost <= geometric_mean(self.lower, self.upper) {
            self.lower = self.lower.max(cost);
            Label::Positive
        } else {
            self.upper = self.upper.min(cost);
            Label::Negative
        }
    }
}

impl<T: Scalar> Classifier<T> for MaliciousClassifier<T> {
    fn classify(&mut self, x: &[T]) -> Label {
        self.respond(x)
    }
}
