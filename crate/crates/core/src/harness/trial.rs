//! Single trials, `evade` runs and `bench` sweeps.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, ExperimentConfig};
use super::instance::{build_instance, reference_mac, trial_rng, InstanceClassifier, MacSource};
use crate::error::{Error, Result};
use crate::negative::{evade_convex_negative, NegativeParams};
use crate::oracle::Oracle;
use crate::positive::{
    evade_along, evade_convex_positive, kmls_query_ceiling, mls_query_ceiling, DirectionSet,
    EvasionResult, SearchParams, StartBounds, Strategy, TraceRecord,
};

/// One CSV row. Column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: String,
    #[serde(rename = "D")]
    pub dim: usize,
    pub p: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub queries: u64,
    pub iterations: u64,
    pub final_cost: f64,
    pub mac_reference: Option<f64>,
    pub mac_source: MacSource,
    pub ratio: Option<f64>,
    pub bound_ok: bool,
    pub wall_ms: f64,
    pub termination: String,
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub record: TrialRecord,
    /// `None` when the run stopped with an error (recorded in `termination`).
    pub result: Option<EvasionResult<f64>>,
}

#[derive(Debug, Serialize)]
struct TraceLine<'a> {
    algorithm: &'a str,
    seed: u64,
    #[serde(flatten)]
    record: &'a TraceRecord<f64>,
}

fn error_tag(e: &Error) -> String {
    let kind = match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::DegenerateSubgradient => "degenerate-subgradient",
        Error::DimensionMismatch { .. } => "dimension-mismatch",
        Error::SearchExhausted => "search-exhausted",
        Error::Inconsistent(_) => "inconsistent",
        Error::ParameterOutOfRange(_) => "parameter-out-of-range",
        Error::EmptyDirectionSet => "empty-direction-set",
        Error::DegenerateBody(_) => "degenerate-body",
        Error::NotAvailable => "not-available",
        Error::Config { .. } => "config",
        Error::Io(_) => "io",
    };
    format!("error:{kind}")
}

fn search_params(config: &ExperimentConfig) -> SearchParams<f64> {
    let strategy = match config.algorithm {
        Algorithm::Kmls => Strategy::KStep(config.k),
        _ => Strategy::Multiline,
    };
    let mut params = SearchParams::new(config.accuracy)
        .with_strategy(strategy)
        .with_budget(config.budget.queries)
        .with_trace(config.output.trace.is_some());
    params.mode = config.mode;
    params.max_doublings = config.budget.doublings;
    params
}

fn negative_params(config: &ExperimentConfig) -> NegativeParams<f64> {
    let s = &config.sampler;
    let mut params = NegativeParams::new(config.accuracy);
    params.mode = config.mode;
    params.samples_per_phase = s.samples_per_phase;
    params.walk_steps = s.walk_steps;
    params.rounding_rounds = s.rounding_rounds;
    params.inner_radius = s.inner_radius;
    params.max_phases = s.max_phases;
    params.direction_mode = s.direction_mode;
    params.query_budget = config.budget.queries;
    params.trace = config.output.trace.is_some();
    params
}

/// Runs one seeded trial of the configured algorithm.
///
/// Configuration problems are returned as errors; failures of the search itself
/// are recorded in the row's `termination` column.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<TrialOutput> {
    config.validate()?;
    let instance = build_instance(config, seed)?;
    let (mac, mac_source) = reference_mac(&instance, config.mac_resolution);
    let lower = config.lower_bound.or(instance.lower);
    let spec = instance.spec.clone();
    let started = Instant::now();
    let outcome = match config.algorithm {
        Algorithm::ConvexSearch | Algorithm::Kmls | Algorithm::LinearSearch => {
            let mut oracle = Oracle::new(instance.classifier.clone());
            let params = search_params(config);
            let start = StartBounds {
                negative: Some(instance.negative.clone()),
                lower,
            };
            if config.algorithm == Algorithm::LinearSearch {
                DirectionSet::linear(&spec, &instance.negative)
                    .and_then(|w| evade_along(&spec, w, &start, &params, &mut oracle))
            } else {
                evade_convex_positive(&spec, &start, &params, &mut oracle)
            }
        }
        Algorithm::SetSearch => {
            let InstanceClassifier::Synthetic(classifier) = instance.classifier.clone() else {
                unreachable!("validated: set-search needs a convex negative classifier");
            };
            let mut rng = trial_rng(seed, config.algorithm.id());
            let params = negative_params(config);
            evade_convex_negative(
                &spec,
                Oracle::new(classifier),
                &instance.negative,
                lower,
                &params,
                &mut rng,
            )
            .map(|out| out.result)
        }
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut record = TrialRecord {
        algorithm: config.algorithm.id().into(),
        dim: spec.dim(),
        p: spec.exponent(),
        epsilon: config.accuracy,
        seed,
        queries: 0,
        iterations: 0,
        final_cost: f64::NAN,
        mac_reference: mac,
        mac_source,
        ratio: None,
        bound_ok: false,
        wall_ms,
        termination: String::new(),
    };
    match outcome {
        Ok(result) => {
            record.queries = result.queries;
            record.iterations = result.iterations;
            record.final_cost = result.witness_cost;
            record.ratio = mac.filter(|m| *m > 0.0).map(|m| result.witness_cost / m);
            record.bound_ok = result.within_ceiling();
            record.termination = serde_json::to_value(result.termination)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default();
            Ok(TrialOutput {
                record,
                result: Some(result),
            })
        }
        Err(e) => {
            record.termination = error_tag(&e);
            Ok(TrialOutput {
                record,
                result: None,
            })
        }
    }
}

/// Runs `config.trials` trials in parallel with consecutive seeds.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialOutput>> {
    config.validate()?;
    (0..config.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(config, config.seed + i))
        .collect()
}

/// `evade`: runs the trials and writes the CSV (and trace) under the output directory.
pub fn run_evade(config: &ExperimentConfig) -> Result<Vec<TrialOutput>> {
    let outputs = run_trials(config)?;
    write_outputs(config, &outputs)?;
    Ok(outputs)
}

fn write_outputs(config: &ExperimentConfig, outputs: &[TrialOutput]) -> Result<()> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir)?;
    write_records(&dir.join(&config.output.csv), outputs.iter().map(|o| &o.record))?;
    if let Some(name) = &config.output.trace {
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        for o in outputs {
            if let Some(result) = &o.result {
                for record in &result.trace {
                    let line = TraceLine {
                        algorithm: &o.record.algorithm,
                        seed: o.record.seed,
                        record,
                    };
                    serde_json::to_writer(&mut w, &line).map_err(|e| Error::Io(e.to_string()))?;
                    w.write_all(b"\n")?;
                }
            }
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_records<'a>(path: &Path, records: impl IntoIterator<Item = &'a TrialRecord>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Per-cell aggregate written next to the trial CSV by `bench`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    #[serde(rename = "D")]
    pub dim: usize,
    pub p: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub converged: usize,
    pub bound_violations: usize,
    pub median_queries: f64,
    /// Median `L*` at bisection entry.
    pub median_steps: f64,
    /// `L* + (2 ceil(sqrt(L*)) + 1) 2D` at the median `L*`.
    pub kmls_ceiling: u64,
    /// `2D L* + 2D` at the median `L*`.
    pub mls_ceiling: u64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub outputs: Vec<TrialOutput>,
    pub summary: Vec<SummaryRow>,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// `bench`: one trial per grid cell, a trial CSV and a per-cell summary CSV.
pub fn run_bench(config: &ExperimentConfig) -> Result<BenchReport> {
    config.validate()?;
    let sweep = config.sweep.clone().ok_or_else(|| Error::Config {
        field: "sweep".into(),
        message: "bench needs a [sweep] section".into(),
    })?;
    sweep.validate()?;
    let mut cells = Vec::with_capacity(sweep.cells());
    for &algorithm in &sweep.algorithms {
        for &dim in &sweep.dims {
            for &accuracy in &sweep.accuracies {
                let mut cell = config.clone();
                cell.algorithm = algorithm;
                cell.cost.dim = dim;
                cell.accuracy = accuracy;
                cell.sweep = None;
                cell.validate()?;
                for &seed in &sweep.seeds {
                    cells.push((cell.clone(), seed));
                }
            }
        }
    }
    let outputs: Vec<TrialOutput> = cells
        .par_iter()
        .map(|(cell, seed)| run_trial(cell, *seed))
        .collect::<Result<_>>()?;

    let mut summary = Vec::new();
    for chunk in outputs.chunks(sweep.seeds.len()) {
        let first = &chunk[0].record;
        let dirs = 2 * first.dim;
        let steps = median(
            chunk
                .iter()
                .filter_map(|o| o.result.as_ref().and_then(|r| r.entry_steps))
                .map(f64::from)
                .collect(),
        );
        let l = if steps.is_finite() { steps.ceil() as u32 } else { 0 };
        summary.push(SummaryRow {
            algorithm: first.algorithm.clone(),
            dim: first.dim,
            p: first.p,
            epsilon: first.epsilon,
            trials: chunk.len(),
            converged: chunk.iter().filter(|o| o.record.termination == "converged").count(),
            bound_violations: chunk.iter().filter(|o| !o.record.bound_ok).count(),
            median_queries: median(chunk.iter().map(|o| o.record.queries as f64).collect()),
            median_steps: steps,
            kmls_ceiling: kmls_query_ceiling(dirs, l),
            mls_ceiling: mls_query_ceiling(dirs, l),
        });
    }

    let dir = &config.output.dir;
    fs::create_dir_all(dir)?;
    write_outputs(config, &outputs)?;
    let csv_path = dir.join(&config.output.csv);
    let summary_path = csv_path.with_extension("summary.csv");
    let mut w = csv::Writer::from_path(&summary_path).map_err(|e| Error::Io(e.to_string()))?;
    for row in &summary {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(BenchReport {
        outputs,
        summary,
        csv_path,
        summary_path,
    })
}
