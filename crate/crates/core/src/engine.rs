//! Matrix-free consensus kernels.
//!
//! The weighted-average-consensus (WAC) iteration drives every node state to
//! `sum(w_i x_i(0)) / sum(w_i)` by repeatedly applying
//!
//! ```text
//! x_i(k+1) = x_i(k) + (eps / w_i) * sum_{j in N(i)} (x_j(k) - x_i(k))
//! ```
//!
//! which converges on a connected graph for `0 < eps < min_i(w_i / d_i)`.
//! Every update reads only round-`k` values (Jacobi style) and accumulates
//! neighbor differences in ascending neighbor id, so traces are
//! reproducible bit for bit regardless of how a round is scheduled.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Rounds with at least this many nodes are updated in parallel.
const PARALLEL_THRESHOLD: usize = 4096;

/// Strictly positive per-node attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeVector(Vec<f64>);

impl AttributeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((node, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveAttribute { node, value });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `y_i^k` per node.
    pub fn powers(&self, k: u32) -> Vec<f64> {
        self.0.iter().map(|y| pow(*y, k)).collect()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn pow(y: f64, k: u32) -> f64 {
    y.powi(k as i32)
}

/// Strictly positive per-node consensus weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((node, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveWeight { node, value });
        }
        Ok(Self(values))
    }

    /// `w_i = d_i`; isolated nodes are rejected.
    pub fn degrees(g: &Graph) -> Result<Self> {
        check_no_isolated(g)?;
        Ok(Self(g.degrees().into_iter().map(|d| d as f64).collect()))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_no_isolated(g: &Graph) -> Result<()> {
    match (0..g.node_count()).find(|&i| g.degree(i) == 0) {
        Some(i) => Err(Error::IsolatedNode(i)),
        None => Ok(()),
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}

/// How a stage picks its step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonPolicy {
    Explicit(f64),
    /// Fraction of the stage's step-size bound.
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusConfig {
    pub epsilon_policy: EpsilonPolicy,
    pub step_tolerance: f64,
    pub spread_tolerance: f64,
    pub max_iterations: usize,
    pub record_trace: bool,
    /// Permit step sizes outside `(0, bound)`.
    pub allow_unstable_epsilon: bool,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            epsilon_policy: EpsilonPolicy::Fraction(0.9),
            step_tolerance: 1e-12,
            spread_tolerance: 1e-10,
            max_iterations: 1_000_000,
            record_trace: false,
            allow_unstable_epsilon: false,
        }
    }
}

impl ConsensusConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [
            ("step_tolerance", self.step_tolerance),
            ("spread_tolerance", self.spread_tolerance),
        ] {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {tol}")));
            }
        }
        match self.epsilon_policy {
            EpsilonPolicy::Fraction(f) if !(f > 0.0 && f.is_finite()) => {
                Err(Error::Config(format!("epsilon fraction must be positive, got {f}")))
            }
            EpsilonPolicy::Fraction(f) if f >= 1.0 && !self.allow_unstable_epsilon => Err(
                Error::Config(format!("epsilon fraction must lie in (0, 1), got {f}")),
            ),
            EpsilonPolicy::Explicit(e) if !e.is_finite() => {
                Err(Error::Config(format!("epsilon must be finite, got {e}")))
            }
            _ => Ok(()),
        }
    }

    /// Step size for a stage whose stability bound is `bound`.
    pub fn resolve_epsilon(&self, bound: f64) -> Result<f64> {
        self.validate()?;
        let eps = match self.epsilon_policy {
            EpsilonPolicy::Explicit(e) => e,
            EpsilonPolicy::Fraction(f) => f * bound,
        };
        if !self.allow_unstable_epsilon && !(eps > 0.0 && eps < bound) {
            return Err(Error::StepSizeOutOfRange {
                epsilon: eps,
                bound,
            });
        }
        Ok(eps)
    }
}

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `max - min` fell to the spread tolerance.
    Spread,
    /// The largest per-node step fell to the step tolerance while the
    /// spread was still above its tolerance.
    StepResidual,
    IterationCap,
    /// A state became non-finite.
    Diverged,
}

/// Outcome of one WAC iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusRun {
    pub final_states: Vec<f64>,
    pub iterations_used: usize,
    /// Set only when the spread reached `spread_tolerance`.
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Arithmetic mean of the final states.
    pub consensus_value: f64,
    pub epsilon: f64,
    /// Step-size bound the stage was run against.
    pub step_bound: f64,
    /// `x(0), x(1), ..., x(K)` when tracing was requested.
    pub trace: Option<Vec<Vec<f64>>>,
    /// `max_i |x_i(k) - x_i(k-1)|` for `k = 1..=K`.
    pub residual_trace: Vec<f64>,
}

impl ConsensusRun {
    pub fn final_spread(&self) -> f64 {
        spread(&self.final_states)
    }
}

pub fn spread(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// Largest stable step size `min_i(w_i / d_i)`.
pub fn max_step_size(w: &WeightVector, g: &Graph) -> Result<f64> {
    check_len(g.node_count(), w.len())?;
    check_no_isolated(g)?;
    Ok(w
        .values()
        .iter()
        .enumerate()
        .map(|(i, wi)| wi / g.degree(i) as f64)
        .fold(f64::INFINITY, f64::min))
}

/// `w_i = sum_{j in N(i)} y_j^k`, summed in ascending neighbor order.
pub fn neighbor_weight_sums(g: &Graph, y: &AttributeVector, k: u32) -> Result<WeightVector> {
    check_len(g.node_count(), y.len())?;
    check_no_isolated(g)?;
    let pw = y.powers(k);
    WeightVector::new(
        (0..g.node_count())
            .map(|i| g.neighbors(i).iter().map(|&j| pw[j]).sum())
            .collect(),
    )
}

/// Target of the WAC iteration, `sum(w_i x_i) / sum(w_i)`.
pub fn exact_consensus_target(x0: &[f64], w: &WeightVector) -> f64 {
    let num: f64 = x0.iter().zip(w.values()).map(|(x, w)| x * w).sum();
    let den: f64 = w.values().iter().sum();
    num / den
}

/// One node's WAC update from its own state and its neighbors' states
/// (ascending neighbor id). `gain` is `eps / w_i`.
#[inline]
pub fn local_update(own: f64, gain: f64, neighbor_states: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    for xj in neighbor_states {
        acc += xj - own;
    }
    own + gain * acc
}

/// `eps / w_i` per node.
pub fn gains(w: &WeightVector, epsilon: f64) -> Vec<f64> {
    w.values().iter().map(|wi| epsilon / wi).collect()
}

/// Explicit WAC iteration state, advanced one round at a time.
pub struct WacStepper<'g> {
    graph: &'g Graph,
    gains: Vec<f64>,
    current: Vec<f64>,
    next: Vec<f64>,
    iteration: usize,
}

impl<'g> WacStepper<'g> {
    pub fn new(graph: &'g Graph, x0: &[f64], w: &WeightVector, epsilon: f64) -> Result<Self> {
        check_len(graph.node_count(), x0.len())?;
        check_len(graph.node_count(), w.len())?;
        Ok(Self {
            graph,
            gains: gains(w, epsilon),
            current: x0.to_vec(),
            next: vec![0.0; x0.len()],
            iteration: 0,
        })
    }

    pub fn states(&self) -> &[f64] {
        &self.current
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Advances one round and returns the largest per-node step.
    pub fn step(&mut self) -> f64 {
        let g = self.graph;
        let cur = &self.current;
        let gains = &self.gains;
        let update = |(i, out): (usize, &mut f64)| {
            *out = local_update(cur[i], gains[i], g.neighbors(i).iter().map(|&j| cur[j]));
        };
        if cur.len() >= PARALLEL_THRESHOLD && rayon::current_num_threads() > 1 {
            self.next.par_iter_mut().enumerate().for_each(update);
        } else {
            self.next.iter_mut().enumerate().for_each(update);
        }
        let residual = cur
            .iter()
            .zip(&self.next)
            .map(|(a, b)| (b - a).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut self.current, &mut self.next);
        self.iteration += 1;
        residual
    }
}

/// Runs WAC with the step-size bound computed centrally from `w` and `g`.
pub fn wac_run(
    g: &Graph,
    x0: &[f64],
    w: &WeightVector,
    cfg: &ConsensusConfig,
) -> Result<ConsensusRun> {
    let bound = max_step_size(w, g)?;
    wac_run_with_bound(g, x0, w, bound, cfg, |_, _| {})
}

/// Runs WAC against a caller-supplied bound (e.g. one agreed on by
/// min-consensus). `observer` sees `(k, x(k))` for every iterate including
/// `x(0)`.
pub fn wac_run_with_bound(
    g: &Graph,
    x0: &[f64],
    w: &WeightVector,
    bound: f64,
    cfg: &ConsensusConfig,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<ConsensusRun> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let epsilon = cfg.resolve_epsilon(bound)?;
    let mut stepper = WacStepper::new(g, x0, w, epsilon)?;
    let mut trace = cfg.record_trace.then(|| vec![x0.to_vec()]);
    let mut residual_trace = Vec::new();
    observer(0, x0);

    let mut stop_reason = if spread(x0) <= cfg.spread_tolerance {
        Some(StopReason::Spread)
    } else {
        None
    };
    while stop_reason.is_none() {
        if stepper.iteration() >= cfg.max_iterations {
            stop_reason = Some(StopReason::IterationCap);
            break;
        }
        let residual = stepper.step();
        let x = stepper.states();
        residual_trace.push(residual);
        observer(stepper.iteration(), x);
        if let Some(t) = trace.as_mut() {
            t.push(x.to_vec());
        }
        if !x.iter().all(|v| v.is_finite()) {
            stop_reason = Some(StopReason::Diverged);
        } else if spread(x) <= cfg.spread_tolerance {
            stop_reason = Some(StopReason::Spread);
        } else if residual <= cfg.step_tolerance {
            stop_reason = Some(StopReason::StepResidual);
        }
    }
    let stop_reason = stop_reason.unwrap_or(StopReason::IterationCap);
    let final_states = stepper.states().to_vec();
    let consensus_value = final_states.iter().sum::<f64>() / final_states.len() as f64;
    Ok(ConsensusRun {
        iterations_used: stepper.iteration(),
        converged: stop_reason == StopReason::Spread,
        stop_reason,
        consensus_value,
        epsilon,
        step_bound: bound,
        final_states,
        trace,
        residual_trace,
    })
}

/// Result of a min-consensus run.
#[derive(Debug, Clone, PartialEq)]
pub struct MinConsensus {
    pub states: Vec<f64>,
    /// Rounds that changed at least one state.
    pub rounds_used: usize,
}

/// `x_i(k+1) = min(x_i(k), min_{j in N(i)} x_j(k))` until no state changes.
pub fn min_consensus(g: &Graph, x0: &[f64], max_rounds: usize) -> Result<MinConsensus> {
    check_len(g.node_count(), x0.len())?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut cur = x0.to_vec();
    let mut next = vec![0.0; cur.len()];
    let mut rounds_used = 0;
    loop {
        for (i, out) in next.iter_mut().enumerate() {
            *out = g.neighbors(i).iter().fold(cur[i], |m, &j| m.min(cur[j]));
        }
        if next == cur {
            return Ok(MinConsensus {
                states: cur,
                rounds_used,
            });
        }
        rounds_used += 1;
        if rounds_used > max_rounds {
            return Err(Error::MinConsensusStalled(max_rounds));
        }
        std::mem::swap(&mut cur, &mut next);
    }
}

/// Agrees on `min_i(w_i / d_i)` by min-consensus over the local ratios.
pub fn distributed_step_bound(g: &Graph, w: &WeightVector) -> Result<f64> {
    check_len(g.node_count(), w.len())?;
    check_no_isolated(g)?;
    let local: Vec<f64> = w
        .values()
        .iter()
        .enumerate()
        .map(|(i, wi)| wi / g.degree(i) as f64)
        .collect();
    let agreed = min_consensus(g, &local, g.node_count())?;
    Ok(agreed.states[0])
}

/// Step-size bound of the neighbor-sum-weighted stage,
/// `min_i (sum_{j in N(i)} y_j) / d_i`, found by min-consensus.
pub fn distributed_delta1(g: &Graph, y: &AttributeVector) -> Result<f64> {
    let w = neighbor_weight_sums(g, y, 1)?;
    distributed_step_bound(g, &w)
}
