//! Command-line front end of the experiment runner.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};

use crate::engine::{ConsensusConfig, EpsilonPolicy};
use crate::experiment::{
    run_experiment, split_seed, AttributeSource, ExperimentConfig, GraphSource, MetricChoice,
};
use crate::metrics::MetricSpec;

/// Caps the number of worker threads used inside a consensus round.
pub const THREADS_ENV: &str = "LINKMETRIC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Tv,
    Poly,
}

/// Compute link-based network metrics by distributed consensus.
#[derive(Debug, Parser)]
#[command(name = "linkmetric", version)]
pub struct Args {
    /// SNAP-style edge list; its largest connected component is used.
    #[arg(long, value_name = "PATH", conflicts_with = "er", required_unless_present = "er")]
    pub edges: Option<PathBuf>,

    /// Erdős–Rényi G(N, P) graph (largest connected component).
    #[arg(long, num_args = 2, value_names = ["N", "P"])]
    pub er: Option<Vec<String>>,

    /// Attribute file with `node_id value` lines.
    #[arg(long, value_name = "PATH", conflicts_with = "exp_mean", required_unless_present = "exp_mean")]
    pub attrs: Option<PathBuf>,

    /// Exponentially distributed attributes with this mean.
    #[arg(long, value_name = "M")]
    pub exp_mean: Option<f64>,

    /// Seed for synthetic sources; graph and attributes use independent
    /// streams derived from it.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum, default_value = "tv")]
    pub metric: Metric,

    /// Polynomial spec (`l k c_lk` lines), required with `--metric poly`.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,

    /// Step size of each stage as a fraction of its stability bound.
    #[arg(long, default_value_t = 0.9)]
    pub eps_frac: f64,

    /// Also run on attributes shifted by this positive constant.
    #[arg(long, value_name = "C")]
    pub shift: Option<f64>,

    /// Add a spectral convergence report per stage.
    #[arg(long)]
    pub analyze: bool,

    /// Add centralized reference values and deltas.
    #[arg(long)]
    pub oracle: bool,

    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Permit step sizes at or beyond the stability bound.
    #[arg(long)]
    pub allow_unstable_epsilon: bool,

    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,

    #[arg(long, default_value_t = 1e-12)]
    pub tol_step: f64,

    #[arg(long, default_value_t = 1e-10)]
    pub tol_spread: f64,

    /// Write every K-th iterate to the trace CSVs (0 = no traces).
    #[arg(long, value_name = "K", default_value_t = 1)]
    pub trace_every: usize,
}

impl Args {
    pub fn to_config(&self) -> anyhow::Result<ExperimentConfig> {
        let seeds = self.seed.map(split_seed);
        let graph = match (&self.edges, &self.er) {
            (Some(path), None) => GraphSource::EdgeList(path.clone()),
            (None, Some(er)) => {
                let n = er[0].parse().with_context(|| format!("--er: bad node count {:?}", er[0]))?;
                let p = er[1].parse().with_context(|| format!("--er: bad probability {:?}", er[1]))?;
                let Some((seed, _)) = seeds else {
                    bail!("--er requires --seed");
                };
                GraphSource::ErdosRenyi { n, p, seed }
            }
            _ => bail!("give exactly one of --edges or --er"),
        };
        let attributes = match (&self.attrs, self.exp_mean) {
            (Some(path), None) => AttributeSource::File(path.clone()),
            (None, Some(mean)) => {
                let Some((_, seed)) = seeds else {
                    bail!("--exp-mean requires --seed");
                };
                AttributeSource::Exponential { mean, seed }
            }
            _ => bail!("give exactly one of --attrs or --exp-mean"),
        };
        let metric = match (self.metric, &self.spec) {
            (Metric::Tv, None) => MetricChoice::TotalVariation,
            (Metric::Tv, Some(_)) => bail!("--spec only applies to --metric poly"),
            (Metric::Poly, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                MetricChoice::Polynomial(MetricSpec::parse(&text)?)
            }
            (Metric::Poly, None) => bail!("--metric poly requires --spec"),
        };
        let consensus = ConsensusConfig {
            epsilon_policy: EpsilonPolicy::Fraction(self.eps_frac),
            step_tolerance: self.tol_step,
            spread_tolerance: self.tol_spread,
            max_iterations: self.max_iters,
            record_trace: false,
            allow_unstable_epsilon: self.allow_unstable_epsilon,
        };
        Ok(ExperimentConfig {
            graph,
            attributes,
            metric,
            consensus,
            shift: self.shift,
            analyze: self.analyze,
            oracle: self.oracle,
            out_dir: self.out.clone(),
            trace_every: self.trace_every,
        })
    }
}

fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={v:?} is not a thread count"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be at least 1");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

/// Runs the CLI and returns the process exit code: 0 converged, 1 input
/// error, 2 some stage did not converge.
pub fn run(args: &Args) -> i32 {
    let result = (|| -> anyhow::Result<i32> {
        let cfg = args.to_config()?;
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_cap()? {
            pool = pool.num_threads(n);
        }
        let pool = pool.build().context("building thread pool")?;
        let outcome = pool.install(|| run_experiment(&cfg))?;
        if !outcome.converged {
            eprintln!("warning: at least one consensus stage did not converge");
        }
        Ok(outcome.exit_code())
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn main() -> ! {
    let args = Args::parse();
    std::process::exit(run(&args))
}
