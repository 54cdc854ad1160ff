//! Turning a configuration and a seed into a concrete classifier, cost and start point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ClassifierKind, ExperimentConfig};
use crate::cost::{CostSpec, Halfspace};
use crate::error::{Error, Result};
use crate::oracle::{
    analytic_mac, brute_force_mac, Classifier, Label, MaliciousClassifier, SyntheticClassifier,
};
use crate::scalar::{dot, norm2};

/// Stream id for a name, so each purpose gets its own reproducible sequence.
pub fn stream_id(name: &str) -> u64 {
    // FNV-1a
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Seeded generator for one purpose within one trial.
pub fn trial_rng(seed: u64, purpose: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(purpose));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MacSource {
    Analytic,
    BruteForce,
    None,
}

#[derive(Debug, Clone)]
pub enum InstanceClassifier {
    Synthetic(SyntheticClassifier<f64>),
    Malicious(MaliciousClassifier<f64>),
}

impl Classifier<f64> for InstanceClassifier {
    fn classify(&mut self, x: &[f64]) -> Label {
        match self {
            InstanceClassifier::Synthetic(c) => c.label(x),
            InstanceClassifier::Malicious(m) => m.respond(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: CostSpec<f64>,
    pub classifier: InstanceClassifier,
    pub negative: Vec<f64>,
    /// Lower bound implied by the instance itself (the malicious oracle's start).
    pub lower: Option<f64>,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng))
            .collect();
        let n = norm2(&v);
        if n > 1e-9 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn along(origin: &[f64], dir: &[f64], s: f64) -> Vec<f64> {
    origin.iter().zip(dir).map(|(o, d)| o + s * d).collect()
}

/// Builds the trial instance. Random parameters come from the `instance` stream of
/// `seed`, so every algorithm sees the same classifier for a given seed.
pub fn build_instance(config: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let dim = config.cost.dim;
    let target = config.cost.target.clone().unwrap_or_else(|| vec![0.0; dim]);
    let weights = config.cost.weights.clone().unwrap_or_else(|| vec![1.0; dim]);
    let spec = CostSpec::new(target.clone(), weights, config.cost.p)
        .map_err(|e| config_error("cost", e.to_string()))?;
    let c = &config.classifier;
    let mut rng = trial_rng(seed, "instance");
    let mut lower = None;

    let (classifier, default_negative) = match c.kind {
        ClassifierKind::RandomHalfspace => {
            let w = gaussian_unit(&mut rng, dim);
            let distance = rng.random_range(1.0..10.0);
            let stretch = rng.random_range(1.5..4.0);
            let anchor = along(&target, &w, distance);
            let negative = along(&target, &w, distance * stretch);
            (SyntheticClassifier::halfspace(w, &anchor)?, negative)
        }
        ClassifierKind::Halfspace => {
            let w = c.normal.clone().expect("validated");
            let anchor = c.anchor.clone().expect("validated");
            let gap = dot(&w, &anchor) - dot(&w, &target);
            if !(gap > 0.0) {
                return Err(config_error("classifier.anchor", "target lies in the negative halfspace"));
            }
            let negative = along(&target, &w, 2.0 * gap / dot(&w, &w));
            (SyntheticClassifier::halfspace(w, &anchor)?, negative)
        }
        ClassifierKind::CostBall => {
            let threshold = c.threshold.unwrap_or_else(|| rng.random_range(1.0..10.0));
            let negative = axis_point(&spec, 2.0 * threshold)?;
            (SyntheticClassifier::open_cost_ball(spec.clone(), threshold)?, negative)
        }
        ClassifierKind::RandomPolytope => {
            let faces = c.faces.unwrap_or(2 * dim).max(1);
            let mut list = Vec::with_capacity(faces);
            let mut first = None;
            for _ in 0..faces {
                let n = gaussian_unit(&mut rng, dim);
                let margin = rng.random_range(1.0..10.0);
                let offset = dot(&n, &target) + margin;
                if first.is_none() {
                    first = Some((n.clone(), margin));
                }
                list.push(Halfspace::new(n, offset)?);
            }
            let (n, margin) = first.expect("at least one face");
            let stretch = rng.random_range(1.5..4.0);
            let negative = along(&target, &n, margin * stretch);
            (SyntheticClassifier::polytope(list)?, negative)
        }
        ClassifierKind::HalfspaceBox => {
            let normal = c.normal.clone().unwrap_or_else(|| {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                e
            });
            let level = c.level.unwrap_or(2.0);
            let lo: Vec<f64> = target.iter().map(|t| t - c.box_half_width).collect();
            let hi: Vec<f64> = target.iter().map(|t| t + c.box_half_width).collect();
            let gap = level - dot(&normal, &target);
            let negative = along(&target, &normal, 2.0 * gap.max(0.0) / dot(&normal, &normal));
            (
                SyntheticClassifier::halfspace_box(normal, level, &lo, &hi)?,
                negative,
            )
        }
        ClassifierKind::Malicious => {
            let lo = c.lower.unwrap_or(1.0);
            let hi = c.upper.unwrap_or(16.0);
            let m = MaliciousClassifier::new(spec.clone(), lo, hi)
                .map_err(|e| config_error("classifier.lower", e.to_string()))?;
            lower = Some(lo);
            let negative = axis_point(&spec, hi)?;
            return finish(config, spec, InstanceClassifier::Malicious(m), negative, lower);
        }
    };
    finish(config, spec, InstanceClassifier::Synthetic(classifier), default_negative, lower)
}

fn finish(
    config: &ExperimentConfig,
    spec: CostSpec<f64>,
    classifier: InstanceClassifier,
    default_negative: Vec<f64>,
    lower: Option<f64>,
) -> Result<Instance> {
    let negative = config.classifier.negative.clone().unwrap_or(default_negative);
    if let InstanceClassifier::Synthetic(c) = &classifier {
        if c.label(&negative).is_positive() {
            return Err(config_error("classifier.negative", "point is not labelled negative"));
        }
    }
    Ok(Instance {
        spec,
        classifier,
        negative,
        lower,
    })
}

/// `t + cost * e_d / c_d^{1/p}` along the first movable coordinate.
fn axis_point(spec: &CostSpec<f64>, cost: f64) -> Result<Vec<f64>> {
    let d = (0..spec.dim())
        .find(|&d| spec.weights()[d].is_finite() && spec.weights()[d] > 0.0)
        .ok_or(Error::EmptyDirectionSet)?;
    let mut x = spec.target().to_vec();
    x[d] += cost * spec.unit_axis_length(d);
    Ok(x)
}

/// Ground-truth MAC for the instance: closed form where available, otherwise a
/// brute-force lower bracket at `D <= 3`.
pub fn reference_mac(instance: &Instance, resolution: f64) -> (Option<f64>, MacSource) {
    let InstanceClassifier::Synthetic(c) = &instance.classifier else {
        return (None, MacSource::None);
    };
    match analytic_mac(c, &instance.spec) {
        Ok(m) => return (Some(m), MacSource::Analytic),
        Err(Error::NotAvailable) => {}
        Err(_) => return (None, MacSource::None),
    }
    let spec = &instance.spec;
    if spec.dim() > 3 || spec.exponent() < 1.0 || !spec.has_regular_weights() {
        return (None, MacSource::None);
    }
    let Ok(radius) = spec.cost(&instance.negative) else {
        return (None, MacSource::None);
    };
    let half: Vec<f64> = (0..spec.dim()).map(|d| radius * spec.unit_axis_length(d)).collect();
    let widest = half.iter().fold(0.0f64, |m, &h| m.max(h));
    // Keep the grid to a few million points.
    let per_axis = match spec.dim() {
        1 => 1e6,
        2 => 2e3,
        _ => 150.0,
    };
    let step = resolution.max(2.0 * widest / per_axis);
    let lo: Vec<f64> = spec.target().iter().zip(&half).map(|(t, h)| t - h).collect();
    let hi: Vec<f64> = spec.target().iter().zip(&half).map(|(t, h)| t + h).collect();
    match brute_force_mac(c, spec, step, &lo, &hi) {
        Ok((low, _)) => (Some(low), MacSource::BruteForce),
        Err(_) => (None, MacSource::None),
    }
}
