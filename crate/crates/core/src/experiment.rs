//! End-to-end experiment runs: load or generate a graph and attributes,
//! run a metric pipeline, optionally repeat it on shifted attributes, and
//! write per-stage trace CSVs plus a JSON summary.
//!
//! Output layout under the output directory:
//!
//! ```text
//! summary.json
//! stage{1,2,3}_trace.csv            # metric = tv
//! term_{l}_{k}_stage{1,2}_trace.csv # metric = poly
//! shifted/...                        # same files for the shifted run
//! ```
//!
//! Trace CSVs use the long format `iteration,node_id,state` where `node_id`
//! is the node's original identifier. Every float in the outputs is written
//! with 17 significant digits, so identical configurations produce
//! byte-identical files.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Number, Value};

use crate::engine::{distributed_delta1, AttributeVector, ConsensusConfig, EpsilonPolicy};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph};
use crate::metrics::{
    polynomial_metric_observed, shift_attributes, total_variation_pipeline_observed,
    MetricSpec, PolynomialResult, StageRecord, TvResult,
};
use crate::oracle::{exact_alphas, exact_polynomial_metric, exact_total_variation};
use crate::spectral::spectral_report;
use crate::synthetic::{generate_attributes, generate_synthetic, Rng};

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    EdgeList(PathBuf),
    ErdosRenyi { n: usize, p: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeSource {
    File(PathBuf),
    Exponential { mean: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricChoice {
    TotalVariation,
    Polynomial(MetricSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub attributes: AttributeSource,
    pub metric: MetricChoice,
    pub consensus: ConsensusConfig,
    pub shift: Option<f64>,
    pub analyze: bool,
    pub oracle: bool,
    pub out_dir: PathBuf,
    /// Write every `trace_every`-th iterate to the trace CSVs; 0 disables
    /// trace output.
    pub trace_every: usize,
}

impl ExperimentConfig {
    pub fn new(graph: GraphSource, attributes: AttributeSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            graph,
            attributes,
            metric: MetricChoice::TotalVariation,
            consensus: ConsensusConfig::default(),
            shift: None,
            analyze: false,
            oracle: false,
            out_dir: out_dir.into(),
            trace_every: 1,
        }
    }
}

/// Seeds for the graph and attribute streams derived from one user seed:
/// the first two outputs of SplitMix64 seeded with it.
pub fn split_seed(seed: u64) -> (u64, u64) {
    let mut rng = Rng::new(seed);
    (rng.next_u64(), rng.next_u64())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub converged: bool,
    pub summary: Value,
}

impl ExperimentOutcome {
    /// 0 when every stage converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            2
        }
    }
}

/// Loads the graph and reduces it to its largest connected component.
pub fn load_graph(source: &GraphSource) -> Result<Graph> {
    match source {
        GraphSource::EdgeList(path) => Ok(load_edge_list(path)?.largest_connected_component()),
        GraphSource::ErdosRenyi { n, p, seed } => generate_synthetic(*n, *p, *seed),
    }
}

pub fn load_attributes(source: &AttributeSource, g: &Graph) -> Result<AttributeVector> {
    match source {
        AttributeSource::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Attributes(format!("{}: {e}", path.display())))?;
            parse_attributes(&text, g)
        }
        AttributeSource::Exponential { mean, seed } => generate_attributes(g, *mean, *seed),
    }
}

/// Parses `node_id value` lines against the original ids of `g`. Ids not
/// in `g` are ignored; every node of `g` needs exactly one value.
pub fn parse_attributes(text: &str, g: &Graph) -> Result<AttributeVector> {
    let index: HashMap<u64, usize> = g.labels().iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut values: Vec<Option<f64>> = vec![None; g.node_count()];
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::Attributes(format!("line {}: expected `node_id value`, got {line:?}", n + 1));
        let mut tok = line.split_whitespace();
        let (Some(id), Some(value), None) = (tok.next(), tok.next(), tok.next()) else {
            return Err(bad());
        };
        let id: u64 = id.parse().map_err(|_| bad())?;
        let value: f64 = value.parse().map_err(|_| bad())?;
        let Some(&i) = index.get(&id) else { continue };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Attributes(format!("node {id} has non-positive value {value}")));
        }
        if values[i].replace(value).is_some() {
            return Err(Error::Attributes(format!("node {id} has more than one value")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::Attributes(format!("no value for node {}", g.label(i)))))
        .collect::<Result<Vec<_>>>()?;
    AttributeVector::new(values)
}

/// Float as a JSON number with 17 significant digits; non-finite values
/// become `null`.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_string_unchecked(fmt_f64(x)))
    } else {
        Value::Null
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Streams trace rows into one CSV per stage.
struct TraceSink {
    dir: PathBuf,
    every: usize,
    labels: Vec<u64>,
    writers: BTreeMap<String, csv::Writer<BufWriter<File>>>,
    error: Option<Error>,
}

impl TraceSink {
    fn new(dir: &Path, every: usize, g: &Graph) -> Self {
        Self {
            dir: dir.to_path_buf(),
            every,
            labels: g.labels().to_vec(),
            writers: BTreeMap::new(),
            error: None,
        }
    }

    fn record(&mut self, file: String, k: usize, x: &[f64]) {
        if self.every == 0 || !k.is_multiple_of(self.every) || self.error.is_some() {
            return;
        }
        if let Err(e) = self.try_record(file, k, x) {
            self.error = Some(Error::Config(format!("writing trace: {e}")));
        }
    }

    fn try_record(&mut self, file: String, k: usize, x: &[f64]) -> std::result::Result<(), csv::Error> {
        if !self.writers.contains_key(&file) {
            let f = File::create(self.dir.join(&file))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(f));
            w.write_record(["iteration", "node_id", "state"])?;
            self.writers.insert(file.clone(), w);
        }
        let w = self.writers.get_mut(&file).expect("writer exists");
        let k = k.to_string();
        for (label, v) in self.labels.iter().zip(x) {
            w.write_record([k.as_str(), &label.to_string(), &fmt_f64(*v)])?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        for (_, mut w) in std::mem::take(&mut self.writers) {
            w.flush()
                .map_err(|e| Error::Config(format!("writing trace: {e}")))?;
        }
        Ok(())
    }
}

enum MetricRun {
    Tv(TvResult),
    Poly(PolynomialResult),
}

impl MetricRun {
    fn value(&self) -> f64 {
        match self {
            MetricRun::Tv(r) => r.total_variation,
            MetricRun::Poly(r) => r.value,
        }
    }

    fn converged(&self) -> bool {
        match self {
            MetricRun::Tv(r) => r.converged(),
            MetricRun::Poly(r) => r.converged(),
        }
    }

    fn stages(&self) -> Vec<(Option<(u32, u32)>, &StageRecord)> {
        match self {
            MetricRun::Tv(r) => r.stages.iter().map(|s| (None, s)).collect(),
            MetricRun::Poly(r) => r
                .terms
                .iter()
                .flat_map(|t| t.stages.iter().map(move |s| (Some((t.l, t.k)), s)))
                .collect(),
        }
    }
}

fn run_metric(
    cfg: &ExperimentConfig,
    g: &Graph,
    y: &AttributeVector,
    dir: &Path,
) -> Result<MetricRun> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    let mut sink = TraceSink::new(dir, cfg.trace_every, g);
    let run = match &cfg.metric {
        MetricChoice::TotalVariation => {
            let r = total_variation_pipeline_observed(g, y, &cfg.consensus, &mut |stage, k, x| {
                sink.record(format!("{stage}_trace.csv"), k, x)
            })?;
            MetricRun::Tv(r)
        }
        MetricChoice::Polynomial(spec) => {
            let r = polynomial_metric_observed(g, y, spec, &cfg.consensus, &mut |(l, t), stage, k, x| {
                sink.record(format!("term_{l}_{t}_{stage}_trace.csv"), k, x)
            })?;
            MetricRun::Poly(r)
        }
    };
    sink.finish()?;
    Ok(run)
}

fn stage_json(term: Option<(u32, u32)>, s: &StageRecord) -> Value {
    let r = &s.run;
    let mut obj = Map::new();
    obj.insert("name".into(), json!(s.name));
    if let Some((l, k)) = term {
        obj.insert("term".into(), json!([l, k]));
    }
    obj.insert("epsilon".into(), json_f64(r.epsilon));
    obj.insert("delta".into(), json_f64(r.step_bound));
    obj.insert("iterations".into(), json!(r.iterations_used));
    obj.insert("converged".into(), json!(r.converged));
    obj.insert("stop_reason".into(), json!(r.stop_reason));
    obj.insert("consensus_value".into(), json_f64(r.consensus_value));
    obj.insert("final_spread".into(), json_f64(r.final_spread()));
    Value::Object(obj)
}

fn alphas_json(run: &MetricRun) -> Value {
    match run {
        MetricRun::Tv(r) => json!({
            "alpha1": json_f64(r.alpha1),
            "alpha2": json_f64(r.alpha2),
            "alpha3": json_f64(r.alpha3),
        }),
        MetricRun::Poly(r) => Value::Object(
            r.terms
                .iter()
                .map(|t| {
                    (
                        format!("term_{}_{}", t.l, t.k),
                        json!({
                            "c": json_f64(t.coefficient),
                            "alpha_1lk": json_f64(t.alpha_1lk),
                            "alpha_2lk": json_f64(t.alpha_2lk),
                            "h_lk": json_f64(t.h_lk),
                        }),
                    )
                })
                .collect(),
        ),
    }
}

fn oracle_json(cfg: &ExperimentConfig, g: &Graph, y: &AttributeVector, run: &MetricRun) -> Result<Value> {
    if !cfg.oracle {
        return Ok(json!({}));
    }
    let exact = match &cfg.metric {
        MetricChoice::TotalVariation => exact_total_variation(g, y)?,
        MetricChoice::Polynomial(spec) => exact_polynomial_metric(g, y, spec)?,
    };
    let delta = (run.value() - exact).abs();
    let mut obj = Map::new();
    obj.insert("metric_value".into(), json_f64(exact));
    obj.insert("abs_delta".into(), json_f64(delta));
    obj.insert("rel_delta".into(), json_f64(delta / exact.abs().max(1.0)));
    if matches!(cfg.metric, MetricChoice::TotalVariation) {
        let (a1, a2, a3) = exact_alphas(g, y)?;
        obj.insert(
            "alphas".into(),
            json!({"alpha1": json_f64(a1), "alpha2": json_f64(a2), "alpha3": json_f64(a3)}),
        );
    }
    Ok(Value::Object(obj))
}

fn spectral_json(cfg: &ExperimentConfig, g: &Graph, run: &MetricRun) -> Result<Value> {
    if !cfg.analyze {
        return Ok(json!({}));
    }
    let mut obj = Map::new();
    for (term, s) in run.stages() {
        let key = match term {
            Some((l, k)) => format!("term_{l}_{k}_{}", s.name),
            None => s.name.to_string(),
        };
        let rep = spectral_report(g, &s.weights, s.run.epsilon)?;
        let ev = &rep.eigenvalues;
        obj.insert(
            key,
            json!({
                "epsilon": json_f64(rep.epsilon),
                "rho": json_f64(rep.rho),
                "lambda_1": json_f64(ev[0]),
                "lambda_2": ev.get(1).map_or(Value::Null, |&v| json_f64(v)),
                "lambda_n": json_f64(ev[ev.len() - 1]),
                "predicted_iterations_1e-6": rep.predicted_iterations(1e-6),
                "observed_iterations": s.run.iterations_used,
            }),
        );
    }
    Ok(Value::Object(obj))
}

fn run_json(cfg: &ExperimentConfig, g: &Graph, y: &AttributeVector, run: &MetricRun) -> Result<Map<String, Value>> {
    let mut obj = Map::new();
    obj.insert(
        "stages".into(),
        Value::Array(run.stages().into_iter().map(|(t, s)| stage_json(t, s)).collect()),
    );
    obj.insert("alphas".into(), alphas_json(run));
    obj.insert("metric_value".into(), json_f64(run.value()));
    obj.insert("delta1".into(), json_f64(distributed_delta1(g, y)?));
    obj.insert("oracle".into(), oracle_json(cfg, g, y, run)?);
    obj.insert("spectral".into(), spectral_json(cfg, g, run)?);
    obj.insert("converged".into(), json!(run.converged()));
    Ok(obj)
}

/// Runs one experiment and writes its outputs. `Err` means bad input or
/// configuration; an unconverged stage is reported through the outcome.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.consensus.validate()?;
    if let Some(c) = cfg.shift {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("shift must be positive, got {c}")));
        }
    }
    let g = load_graph(&cfg.graph)?;
    let y = load_attributes(&cfg.attributes, &g)?;

    let run = run_metric(cfg, &g, &y, &cfg.out_dir)?;
    let mut converged = run.converged();
    let mut summary = run_json(cfg, &g, &y, &run)?;
    summary.insert(
        "graph".into(),
        json!({"n": g.node_count(), "m": g.edge_count()}),
    );
    summary.insert(
        "metric".into(),
        json!(match cfg.metric {
            MetricChoice::TotalVariation => "tv",
            MetricChoice::Polynomial(_) => "poly",
        }),
    );
    summary.insert("config".into(), config_json(cfg));

    if let Some(c) = cfg.shift {
        let shifted = shift_attributes(&y, c)?;
        let srun = run_metric(cfg, &g, &shifted, &cfg.out_dir.join("shifted"))?;
        converged &= srun.converged();
        let mut s = run_json(cfg, &g, &shifted, &srun)?;
        s.insert("shift".into(), json_f64(c));
        summary.insert("shifted".into(), Value::Object(s));
    }

    let summary = Value::Object(summary);
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("serializing summary: {e}")))?;
    fs::write(cfg.out_dir.join("summary.json"), text + "\n")
        .map_err(|e| Error::Config(format!("writing summary: {e}")))?;
    Ok(ExperimentOutcome { converged, summary })
}

fn config_json(cfg: &ExperimentConfig) -> Value {
    let c = &cfg.consensus;
    let eps = match c.epsilon_policy {
        EpsilonPolicy::Fraction(f) => json!({"fraction": json_f64(f)}),
        EpsilonPolicy::Explicit(e) => json!({"explicit": json_f64(e)}),
    };
    json!({
        "epsilon": eps,
        "step_tolerance": json_f64(c.step_tolerance),
        "spread_tolerance": json_f64(c.spread_tolerance),
        "max_iterations": c.max_iterations,
        "allow_unstable_epsilon": c.allow_unstable_epsilon,
    })
}
