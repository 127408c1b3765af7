//! Link-based metrics from node-local consensus.
//!
//! A link metric averages a pairwise function `f(y_i, y_j)` over the edges
//! of the graph. Neither the edge count nor the node count is known to any
//! node, but both cancel out of products of weighted-average-consensus
//! values, so each metric is assembled from a few consensus runs whose
//! inputs are purely local:
//!
//! * total variation `T = (1/M) sum_edges (y_i - y_j)^2` uses three runs
//!   (`alpha1`: `x = y^2, w = d`; `alpha2`: `x = y, w = sum_{N(i)} y_j`;
//!   `alpha3`: `x = y, w = d`) and `T = 2 alpha1 - 2 alpha2 alpha3`;
//! * a polynomial `f = sum c_lk y_i^l y_j^k` is split into terms, each
//!   computed from two runs (`x = y^l, w = sum_{N(i)} y_j^k` and
//!   `x = y^k, w = d`) as `h_lk = alpha_1lk * alpha_2lk * c_lk`.
//!
//! Terms are reported on the per-edge scale, i.e. `f` is symmetrized over
//! the two orientations of every edge, so the TV coefficient set
//! `{(2,0,1), (0,2,1), (1,1,-2)}` reproduces the TV pipeline exactly.

use std::collections::BTreeSet;

use crate::engine::{
    distributed_step_bound, pow, wac_run_with_bound, AttributeVector, ConsensusConfig,
    ConsensusRun, WeightVector,
};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// One monomial `coefficient * y_i^l * y_j^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub l: u32,
    pub k: u32,
    pub coefficient: f64,
}

/// Sparse polynomial `f(y_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    terms: Vec<Term>,
    max_degree: u32,
}

impl MetricSpec {
    /// Terms `(l, k, c_lk)`; duplicate `(l, k)` pairs are rejected.
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Result<Self> {
        let max_degree = terms.iter().map(|&(l, k, _)| l.max(k)).max().unwrap_or(0);
        Self::with_max_degree(max_degree, terms)
    }

    pub fn with_max_degree(max_degree: u32, terms: Vec<(u32, u32, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(terms.len());
        for (l, k, c) in terms {
            if l > max_degree || k > max_degree {
                return Err(Error::MetricSpec(format!(
                    "term ({l}, {k}) exceeds max degree {max_degree}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::MetricSpec(format!("coefficient of ({l}, {k}) is {c}")));
            }
            if !seen.insert((l, k)) {
                return Err(Error::MetricSpec(format!("duplicate term ({l}, {k})")));
            }
            out.push(Term { l, k, coefficient: c });
        }
        Ok(Self {
            terms: out,
            max_degree,
        })
    }

    /// `(y_i - y_j)^2 = y_i^2 + y_j^2 - 2 y_i y_j`.
    pub fn total_variation() -> Self {
        Self::new(vec![(2, 0, 1.0), (0, 2, 1.0), (1, 1, -2.0)]).expect("valid spec")
    }

    /// Reads `l k c_lk` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::MetricSpec(format!("line {}: expected `l k c`, got {line:?}", n + 1));
            let [l, k, c] = fields[..] else {
                return Err(bad());
            };
            terms.push((
                l.parse().map_err(|_| bad())?,
                k.parse().map_err(|_| bad())?,
                c.parse().map_err(|_| bad())?,
            ));
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * pow(a, t.l) * pow(b, t.k))
            .sum()
    }
}

/// Everything a node can know before the first exchange: its own
/// attribute, its degree and its neighbors' attributes (ascending id).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalView {
    pub attribute: f64,
    pub degree: usize,
    pub neighbor_attributes: Vec<f64>,
}

impl LocalView {
    pub fn neighbor_power_sum(&self, k: u32) -> f64 {
        self.neighbor_attributes.iter().map(|&y| pow(y, k)).sum()
    }
}

pub fn local_views(g: &Graph, y: &AttributeVector) -> Vec<LocalView> {
    let yv = y.values();
    (0..g.node_count())
        .map(|i| LocalView {
            attribute: yv[i],
            degree: g.degree(i),
            neighbor_attributes: g.neighbors(i).iter().map(|&j| yv[j]).collect(),
        })
        .collect()
}

/// Per-node initial state and weight of one consensus stage, derived from
/// [`LocalView`]s only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StagePlan {
    pub name: &'static str,
    /// `x_i(0) = y_i^initial_power`.
    pub initial_power: u32,
    pub weight: WeightRule,
}

/// Consensus weight of a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRule {
    /// `w_i = d_i`, stable for any step in `(0, 1)`.
    Degree,
    /// `w_i = sum_{N(i)} y_j^k`; the stable range is agreed on by
    /// min-consensus.
    NeighborPowerSum(u32),
}

impl StagePlan {
    fn new(name: &'static str, initial_power: u32, weight: WeightRule) -> Self {
        Self {
            name,
            initial_power,
            weight,
        }
    }

    /// `(x_i(0), w_i)` for one node.
    pub fn node_inputs(&self, view: &LocalView) -> (f64, f64) {
        let w = match self.weight {
            WeightRule::Degree => view.degree as f64,
            WeightRule::NeighborPowerSum(k) => view.neighbor_power_sum(k),
        };
        (pow(view.attribute, self.initial_power), w)
    }
}

pub fn total_variation_plans() -> [StagePlan; 3] {
    [
        StagePlan::new("stage1", 2, WeightRule::Degree),
        StagePlan::new("stage2", 1, WeightRule::NeighborPowerSum(1)),
        StagePlan::new("stage3", 1, WeightRule::Degree),
    ]
}

pub fn polynomial_term_plans(l: u32, k: u32) -> [StagePlan; 2] {
    [
        StagePlan::new("stage1", l, WeightRule::NeighborPowerSum(k)),
        StagePlan::new("stage2", k, WeightRule::Degree),
    ]
}

/// One executed stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub name: &'static str,
    pub weight: WeightRule,
    pub weights: WeightVector,
    pub run: ConsensusRun,
}

/// Receives `(stage name, k, x(k))` for every iterate of every stage.
pub type StageObserver<'a> = dyn FnMut(&str, usize, &[f64]) + 'a;

/// Like [`StageObserver`], with the term `(l, k)` first.
pub type TermObserver<'a> = dyn FnMut((u32, u32), &str, usize, &[f64]) + 'a;

fn run_stage(
    g: &Graph,
    views: &[LocalView],
    plan: &StagePlan,
    cfg: &ConsensusConfig,
    observer: &mut StageObserver<'_>,
) -> Result<StageRecord> {
    let (x0, w): (Vec<f64>, Vec<f64>) = views.iter().map(|v| plan.node_inputs(v)).unzip();
    let w = WeightVector::new(w)?;
    let bound = match plan.weight {
        WeightRule::Degree => 1.0,
        WeightRule::NeighborPowerSum(_) => distributed_step_bound(g, &w)?,
    };
    let run = wac_run_with_bound(g, &x0, &w, bound, cfg, |k, x| observer(plan.name, k, x))?;
    Ok(StageRecord {
        name: plan.name,
        weight: plan.weight,
        weights: w,
        run,
    })
}

fn check_inputs(g: &Graph, y: &AttributeVector) -> Result<Vec<LocalView>> {
    if y.len() != g.node_count() {
        return Err(Error::LengthMismatch {
            expected: g.node_count(),
            got: y.len(),
        });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(local_views(g, y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvResult {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub total_variation: f64,
    pub stages: Vec<StageRecord>,
}

impl TvResult {
    pub fn converged(&self) -> bool {
        self.stages.iter().all(|s| s.run.converged)
    }
}

pub fn total_variation_pipeline(
    g: &Graph,
    y: &AttributeVector,
    cfg: &ConsensusConfig,
) -> Result<TvResult> {
    total_variation_pipeline_observed(g, y, cfg, &mut |_, _, _| {})
}

/// Runs the three stages in order; a stage that fails to converge is
/// flagged in its record and the remaining stages still run.
pub fn total_variation_pipeline_observed(
    g: &Graph,
    y: &AttributeVector,
    cfg: &ConsensusConfig,
    observer: &mut StageObserver<'_>,
) -> Result<TvResult> {
    let views = check_inputs(g, y)?;
    let stages = total_variation_plans()
        .iter()
        .map(|plan| run_stage(g, &views, plan, cfg, observer))
        .collect::<Result<Vec<_>>>()?;
    let alpha1 = stages[0].run.consensus_value;
    let alpha2 = stages[1].run.consensus_value;
    let alpha3 = stages[2].run.consensus_value;
    Ok(TvResult {
        alpha1,
        alpha2,
        alpha3,
        total_variation: 2.0 * alpha1 - 2.0 * alpha2 * alpha3,
        stages,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyTermResult {
    pub l: u32,
    pub k: u32,
    pub coefficient: f64,
    pub alpha_1lk: f64,
    pub alpha_2lk: f64,
    pub h_lk: f64,
    pub stages: Vec<StageRecord>,
}

pub fn polynomial_term_pipeline(
    g: &Graph,
    y: &AttributeVector,
    l: u32,
    k: u32,
    coefficient: f64,
    cfg: &ConsensusConfig,
) -> Result<PolyTermResult> {
    let views = check_inputs(g, y)?;
    term_pipeline(g, &views, Term { l, k, coefficient }, cfg, &mut |_, _, _| {})
}

fn term_pipeline(
    g: &Graph,
    views: &[LocalView],
    term: Term,
    cfg: &ConsensusConfig,
    observer: &mut StageObserver<'_>,
) -> Result<PolyTermResult> {
    let stages = polynomial_term_plans(term.l, term.k)
        .iter()
        .map(|plan| run_stage(g, views, plan, cfg, observer))
        .collect::<Result<Vec<_>>>()?;
    let alpha_1lk = stages[0].run.consensus_value;
    let alpha_2lk = stages[1].run.consensus_value;
    Ok(PolyTermResult {
        l: term.l,
        k: term.k,
        coefficient: term.coefficient,
        alpha_1lk,
        alpha_2lk,
        h_lk: alpha_1lk * alpha_2lk * term.coefficient,
        stages,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialResult {
    pub value: f64,
    pub terms: Vec<PolyTermResult>,
}

impl PolynomialResult {
    pub fn converged(&self) -> bool {
        self.terms
            .iter()
            .flat_map(|t| &t.stages)
            .all(|s| s.run.converged)
    }
}

pub fn polynomial_metric(
    g: &Graph,
    y: &AttributeVector,
    spec: &MetricSpec,
    cfg: &ConsensusConfig,
) -> Result<PolynomialResult> {
    polynomial_metric_observed(g, y, spec, cfg, &mut |_, _, _, _| {})
}

/// Like [`polynomial_metric`]; the observer also receives the term `(l, k)`.
pub fn polynomial_metric_observed(
    g: &Graph,
    y: &AttributeVector,
    spec: &MetricSpec,
    cfg: &ConsensusConfig,
    observer: &mut TermObserver<'_>,
) -> Result<PolynomialResult> {
    let views = check_inputs(g, y)?;
    let mut terms = Vec::with_capacity(spec.terms().len());
    for &term in spec.terms() {
        let mut obs = |stage: &str, k: usize, x: &[f64]| observer((term.l, term.k), stage, k, x);
        terms.push(term_pipeline(g, &views, term, cfg, &mut obs)?);
    }
    Ok(PolynomialResult {
        value: terms.iter().map(|t| t.h_lk).sum(),
        terms,
    })
}

/// Adds `c > 0` to every attribute.
pub fn shift_attributes(y: &AttributeVector, c: f64) -> Result<AttributeVector> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("shift must be positive, got {c}")));
    }
    AttributeVector::new(y.values().iter().map(|v| v + c).collect())
}
