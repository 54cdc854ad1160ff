//! Experiment configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::cost::GapMode;
use crate::error::{Error, Result};
use crate::negative::DirectionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Multi-line search over the `2D` weighted axis directions.
    ConvexSearch,
    /// K-step multi-line search over the axis directions.
    Kmls,
    /// Multi-line search over the axis directions facing the negative example.
    LinearSearch,
    /// Cutting-plane search for convex negative sets.
    SetSearch,
}

impl Algorithm {
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::ConvexSearch => "convex-search",
            Algorithm::Kmls => "kmls",
            Algorithm::LinearSearch => "linear-search",
            Algorithm::SetSearch => "set-search",
        }
    }

    pub fn needs_convex_negative(self) -> bool {
        self == Algorithm::SetSearch
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    /// Halfspace with a random unit normal and random distance from the target.
    RandomHalfspace,
    /// Halfspace from `normal` and `anchor`.
    Halfspace,
    /// Open cost ball around the target with radius `threshold`.
    CostBall,
    /// Positive set is an intersection of `faces` random halfspaces containing the target.
    RandomPolytope,
    /// Negative set `{x . normal >= level}` inside a box around the target.
    HalfspaceBox,
    /// Adversarial responder starting from bounds `lower`, `upper`.
    Malicious,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub dim: usize,
    pub p: f64,
    pub weights: Option<Vec<f64>>,
    pub target: Option<Vec<f64>>,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            p: 1.0,
            weights: None,
            target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub normal: Option<Vec<f64>>,
    pub anchor: Option<Vec<f64>>,
    pub threshold: Option<f64>,
    pub faces: Option<usize>,
    pub level: Option<f64>,
    pub box_half_width: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Known negative example; generated from the classifier when absent.
    pub negative: Option<Vec<f64>>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            kind: ClassifierKind::RandomHalfspace,
            normal: None,
            anchor: None,
            threshold: None,
            faces: None,
            level: None,
            box_half_width: 10.0,
            lower: None,
            upper: None,
            negative: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub queries: u64,
    pub doublings: u32,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            queries: crate::positive::DEFAULT_QUERY_BUDGET,
            doublings: crate::positive::DEFAULT_MAX_DOUBLINGS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub samples_per_phase: Option<usize>,
    pub walk_steps: Option<usize>,
    pub rounding_rounds: usize,
    pub inner_radius: Option<f64>,
    pub max_phases: Option<usize>,
    pub direction_mode: DirectionMode,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples_per_phase: None,
            walk_steps: None,
            rounding_rounds: 2,
            inner_radius: None,
            max_phases: None,
            direction_mode: DirectionMode::Centered,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub csv: String,
    /// Line-delimited JSON trace file name; no trace when absent.
    pub trace: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            csv: "trials.csv".into(),
            trace: None,
        }
    }
}

/// Grid for `bench`: one trial per (algorithm, dim, accuracy, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub algorithms: Vec<Algorithm>,
    pub dims: Vec<usize>,
    pub accuracies: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub accuracy: f64,
    pub mode: GapMode,
    pub seed: u64,
    /// Trials run with seeds `seed, seed + 1, ...`.
    pub trials: usize,
    /// Certified lower bound on the MAC; searched for when absent.
    pub lower_bound: Option<f64>,
    /// K for `kmls`; `ceil(sqrt(L*))` when absent.
    pub k: Option<u32>,
    /// Grid step for brute-force MAC references at `D <= 3`.
    pub mac_resolution: f64,
    pub cost: CostConfig,
    pub classifier: ClassifierConfig,
    pub budget: BudgetConfig,
    pub sampler: SamplerConfig,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::ConvexSearch,
            accuracy: 0.1,
            mode: GapMode::Multiplicative,
            seed: 1,
            trials: 1,
            lower_bound: None,
            k: None,
            mac_resolution: 1e-2,
            cost: CostConfig::default(),
            classifier: ClassifierConfig::default(),
            budget: BudgetConfig::default(),
            sampler: SamplerConfig::default(),
            output: OutputConfig::default(),
            sweep: None,
        }
    }
}

fn field_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| field_error("<file>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| field_error("<file>", e.to_string()))
    }

    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.accuracy > 0.0) || !self.accuracy.is_finite() {
            return Err(field_error("accuracy", "must be positive and finite"));
        }
        if self.trials == 0 {
            return Err(field_error("trials", "must be at least 1"));
        }
        if self.k == Some(0) {
            return Err(field_error("k", "must be at least 1"));
        }
        if !(self.mac_resolution > 0.0) {
            return Err(field_error("mac_resolution", "must be positive"));
        }
        if let Some(l) = self.lower_bound {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(field_error("lower_bound", "must be a finite non-negative number"));
            }
        }
        let dim = self.cost.dim;
        if dim == 0 {
            return Err(field_error("cost.dim", "must be at least 1"));
        }
        if !(self.cost.p > 0.0) {
            return Err(field_error("cost.p", "must be positive"));
        }
        for (name, v) in [
            ("cost.weights", &self.cost.weights),
            ("cost.target", &self.cost.target),
            ("classifier.normal", &self.classifier.normal),
            ("classifier.anchor", &self.classifier.anchor),
            ("classifier.negative", &self.classifier.negative),
        ] {
            if let Some(v) = v {
                if v.len() != dim {
                    return Err(field_error(name, format!("expected {dim} entries, got {}", v.len())));
                }
            }
        }
        if self.budget.queries == 0 {
            return Err(field_error("budget.queries", "must be positive"));
        }
        let kind = self.classifier.kind;
        let convex_negative = matches!(
            kind,
            ClassifierKind::HalfspaceBox | ClassifierKind::Halfspace | ClassifierKind::RandomHalfspace
        );
        let convex_positive = kind != ClassifierKind::HalfspaceBox;
        if self.algorithm.needs_convex_negative() && !convex_negative {
            return Err(field_error(
                "classifier.kind",
                format!("{} needs a convex negative set", self.algorithm.id()),
            ));
        }
        if !self.algorithm.needs_convex_negative() && !convex_positive {
            return Err(field_error(
                "classifier.kind",
                format!("{} needs a convex positive set", self.algorithm.id()),
            ));
        }
        if kind == ClassifierKind::Halfspace
            && (self.classifier.normal.is_none() || self.classifier.anchor.is_none())
        {
            return Err(field_error("classifier", "halfspace needs `normal` and `anchor`"));
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate()?;
        }
        Ok(())
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("sweep.algorithms", self.algorithms.is_empty()),
            ("sweep.dims", self.dims.is_empty()),
            ("sweep.accuracies", self.accuracies.is_empty()),
            ("sweep.seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(field_error(name, "sweep grid must be non-empty"));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.algorithms.len() * self.dims.len() * self.accuracies.len() * self.seeds.len()
    }
}
