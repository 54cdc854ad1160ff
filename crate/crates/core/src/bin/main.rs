use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use convex_evasion::cost::GapMode;
use convex_evasion::harness::{
    run_bench, run_evade, run_verify, Algorithm, ClassifierKind, ExperimentConfig, Suite,
    SweepConfig, VerifyOptions,
};
use convex_evasion::negative::DirectionMode;

#[derive(Parser)]
#[command(version, about = "Near-optimal evasion of convex-inducing classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured search for `trials` consecutive seeds.
    Evade(Overrides),
    /// Run a sweep grid and write per-trial and per-cell CSVs.
    Bench {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        accuracies: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Run property suites; exits nonzero on any failure.
    Verify {
        /// Suites to run (default: all).
        #[arg(long, value_delimiter = ',')]
        suite: Vec<Suite>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Replace the vertex-witness polytopes with a non-convex positive set.
        #[arg(long)]
        inject_bug: bool,
    },
}

/// Command-line values win over the config file.
#[derive(Args)]
struct Overrides {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Epsilon (multiplicative) or eta (additive).
    #[arg(long)]
    accuracy: Option<f64>,
    #[arg(long)]
    mode: Option<GapMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    lower_bound: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    mac_resolution: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target: Option<Vec<f64>>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    normal: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    anchor: Option<Vec<f64>>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    faces: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    level: Option<f64>,
    #[arg(long)]
    box_half_width: Option<f64>,
    /// Initial lower bound of the malicious responder.
    #[arg(long)]
    malicious_lower: Option<f64>,
    /// Initial upper bound of the malicious responder.
    #[arg(long)]
    malicious_upper: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    negative: Option<Vec<f64>>,
    #[arg(long)]
    max_queries: Option<u64>,
    #[arg(long)]
    max_doublings: Option<u32>,
    #[arg(long)]
    samples_per_phase: Option<usize>,
    #[arg(long)]
    walk_steps: Option<usize>,
    #[arg(long)]
    rounding_rounds: Option<usize>,
    #[arg(long)]
    inner_radius: Option<f64>,
    #[arg(long)]
    max_phases: Option<usize>,
    #[arg(long)]
    direction_mode: Option<DirectionMode>,
    #[arg(long, env = "EVASION_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    csv: Option<String>,
    /// Write per-iteration trace records (JSON lines) to this file in the output directory.
    #[arg(long)]
    trace: Option<String>,
}

macro_rules! set {
    ($src:expr => $dst:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
    ($src:expr => some $dst:expr) => {
        if let Some(v) = $src {
            $dst = Some(v);
        }
    };
}

impl Overrides {
    fn resolve(self) -> convex_evasion::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        set!(self.algorithm => c.algorithm);
        set!(self.accuracy => c.accuracy);
        set!(self.mode => c.mode);
        set!(self.seed => c.seed);
        set!(self.trials => c.trials);
        set!(self.lower_bound => some c.lower_bound);
        set!(self.k => some c.k);
        set!(self.mac_resolution => c.mac_resolution);
        set!(self.dim => c.cost.dim);
        set!(self.p => c.cost.p);
        set!(self.weights => some c.cost.weights);
        set!(self.target => some c.cost.target);
        set!(self.classifier => c.classifier.kind);
        set!(self.normal => some c.classifier.normal);
        set!(self.anchor => some c.classifier.anchor);
        set!(self.threshold => some c.classifier.threshold);
        set!(self.faces => some c.classifier.faces);
        set!(self.level => some c.classifier.level);
        set!(self.box_half_width => c.classifier.box_half_width);
        set!(self.malicious_lower => some c.classifier.lower);
        set!(self.malicious_upper => some c.classifier.upper);
        set!(self.negative => some c.classifier.negative);
        set!(self.max_queries => c.budget.queries);
        set!(self.max_doublings => c.budget.doublings);
        set!(self.samples_per_phase => some c.sampler.samples_per_phase);
        set!(self.walk_steps => some c.sampler.walk_steps);
        set!(self.rounding_rounds => c.sampler.rounding_rounds);
        set!(self.inner_radius => some c.sampler.inner_radius);
        set!(self.max_phases => some c.sampler.max_phases);
        set!(self.direction_mode => c.sampler.direction_mode);
        set!(self.out_dir => c.output.dir);
        set!(self.csv => c.output.csv);
        set!(self.trace => some c.output.trace);
        Ok(c)
    }
}

fn run(cli: Cli) -> convex_evasion::Result<bool> {
    match cli.command {
        Command::Evade(overrides) => {
            let config = overrides.resolve()?;
            let outputs = run_evade(&config)?;
            for o in &outputs {
                let r = &o.record;
                println!(
                    "seed={} queries={} cost={} mac={} termination={}",
                    r.seed,
                    r.queries,
                    r.final_cost,
                    r.mac_reference.map_or("-".into(), |m| m.to_string()),
                    r.termination
                );
            }
            println!("wrote {}", config.output.dir.join(&config.output.csv).display());
            Ok(true)
        }
        Command::Bench {
            overrides,
            algorithms,
            dims,
            accuracies,
            seeds,
        } => {
            let mut config = overrides.resolve()?;
            let mut sweep = config.sweep.take().unwrap_or_else(|| SweepConfig {
                algorithms: vec![config.algorithm],
                dims: vec![config.cost.dim],
                accuracies: vec![config.accuracy],
                seeds: vec![config.seed],
            });
            set!(algorithms => sweep.algorithms);
            set!(dims => sweep.dims);
            set!(accuracies => sweep.accuracies);
            set!(seeds => sweep.seeds);
            config.sweep = Some(sweep);
            let report = run_bench(&config)?;
            for s in &report.summary {
                println!(
                    "{:<14} D={:<4} eps={:<6} median_queries={} kmls_ceiling={} violations={}",
                    s.algorithm, s.dim, s.epsilon, s.median_queries, s.kmls_ceiling, s.bound_violations
                );
            }
            println!("wrote {} and {}", report.csv_path.display(), report.summary_path.display());
            Ok(true)
        }
        Command::Verify {
            suite,
            seed,
            inject_bug,
        } => {
            let report = run_verify(&VerifyOptions {
                suites: suite,
                seed,
                inject_bug,
            })?;
            print!("{report}");
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
