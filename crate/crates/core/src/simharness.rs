//! Synchronous message-passing simulator.
//!
//! Each node is an isolated state machine. In every round all nodes first
//! broadcast a message derived from their state, then every node consumes
//! exactly the messages of its graph neighbors (ordered by ascending sender
//! id) and computes its next state. The harness records every delivery so
//! tests can audit that no message ever crossed a non-edge.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::engine::{local_update, WeightVector};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

const PARALLEL_THRESHOLD: usize = 4096;

/// `(sender, receiver)` of one delivered message.
type Delivery = (NodeId, NodeId);

/// Local context a node is started with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeContext {
    pub id: NodeId,
    pub degree: usize,
}

/// Behaviour of one node. The same program instance drives every node;
/// anything node-specific must live in the state.
pub trait NodeProgram: Sync {
    type Input: Sync;
    type State: Clone + PartialEq + Send + Sync;
    type Message: Clone + Send + Sync;

    fn init(&self, ctx: NodeContext, input: &Self::Input) -> Self::State;

    /// Message broadcast to all neighbors at the start of a round.
    fn broadcast(&self, state: &Self::State) -> Self::Message;

    /// Next state from the neighbors' messages, ordered by sender id.
    fn on_round(&self, state: &Self::State, inbox: &[(NodeId, Self::Message)]) -> Self::State;

    fn halted(&self, _state: &Self::State) -> bool {
        false
    }

    /// Stop as soon as a round leaves every state unchanged. The unchanged
    /// round is not recorded.
    fn stop_on_quiescence(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessTrace<S> {
    /// `snapshots[r]` holds all node states after round `r`; index 0 is the
    /// initial state.
    pub snapshots: Vec<Vec<S>>,
    pub rounds_executed: usize,
    /// Every `(sender, receiver)` pair that carried a message.
    pub deliveries: BTreeSet<(NodeId, NodeId)>,
    /// True when the run ended because a round changed nothing.
    pub quiescent: bool,
}

impl<S> HarnessTrace<S> {
    pub fn final_states(&self) -> &[S] {
        self.snapshots.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Checks every recorded delivery against the edge set.
    pub fn locality_violations(&self, g: &Graph) -> Vec<(NodeId, NodeId)> {
        self.deliveries
            .iter()
            .copied()
            .filter(|&(s, r)| !g.has_edge(s, r))
            .collect()
    }
}

pub fn run_synchronous<P: NodeProgram>(
    g: &Graph,
    program: &P,
    inputs: &[P::Input],
    max_rounds: usize,
) -> Result<HarnessTrace<P::State>> {
    let n = g.node_count();
    if inputs.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: inputs.len(),
        });
    }
    if max_rounds == 0 {
        return Err(Error::Config("max_rounds must be at least 1".into()));
    }
    let mut states: Vec<P::State> = (0..n)
        .map(|id| {
            let ctx = NodeContext {
                id,
                degree: g.degree(id),
            };
            program.init(ctx, &inputs[id])
        })
        .collect();
    let mut trace = HarnessTrace {
        snapshots: vec![states.clone()],
        rounds_executed: 0,
        deliveries: BTreeSet::new(),
        quiescent: false,
    };

    while trace.rounds_executed < max_rounds {
        if states.iter().all(|s| program.halted(s)) {
            break;
        }
        let outbox: Vec<P::Message> = states.iter().map(|s| program.broadcast(s)).collect();
        let deliver = |receiver: NodeId| -> (P::State, Vec<(NodeId, NodeId)>) {
            let inbox: Vec<(NodeId, P::Message)> = g
                .neighbors(receiver)
                .iter()
                .map(|&sender| (sender, outbox[sender].clone()))
                .collect();
            let log = inbox.iter().map(|&(s, _)| (s, receiver)).collect();
            (program.on_round(&states[receiver], &inbox), log)
        };
        let results: Vec<(P::State, Vec<Delivery>)> = if n >= PARALLEL_THRESHOLD {
            (0..n).into_par_iter().map(deliver).collect()
        } else {
            (0..n).map(deliver).collect()
        };
        let (next, logs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        trace.deliveries.extend(logs.into_iter().flatten());
        if program.stop_on_quiescence() && next == states {
            trace.quiescent = true;
            break;
        }
        states = next;
        trace.rounds_executed += 1;
        trace.snapshots.push(states.clone());
    }
    Ok(trace)
}

/// Node state of the WAC program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WacNode {
    pub value: f64,
    /// `eps / w_i`, fixed at start.
    pub gain: f64,
}

/// Each node knows only its own weight and the shared step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WacProgram {
    pub epsilon: f64,
}

/// Initial value and weight of one WAC node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WacInput {
    pub x0: f64,
    pub weight: f64,
}

impl NodeProgram for WacProgram {
    type Input = WacInput;
    type State = WacNode;
    type Message = f64;

    fn init(&self, _ctx: NodeContext, input: &WacInput) -> WacNode {
        WacNode {
            value: input.x0,
            gain: self.epsilon / input.weight,
        }
    }

    fn broadcast(&self, state: &WacNode) -> f64 {
        state.value
    }

    fn on_round(&self, state: &WacNode, inbox: &[(NodeId, f64)]) -> WacNode {
        WacNode {
            value: local_update(state.value, state.gain, inbox.iter().map(|&(_, x)| x)),
            gain: state.gain,
        }
    }
}

pub fn make_wac_program(epsilon: f64) -> WacProgram {
    WacProgram { epsilon }
}

/// Pairs initial values with weights for [`WacProgram`].
pub fn wac_inputs(x0: &[f64], w: &WeightVector) -> Vec<WacInput> {
    x0.iter()
        .zip(w.values())
        .map(|(&x0, &weight)| WacInput { x0, weight })
        .collect()
}

/// Min-consensus: every node keeps the minimum of its closed neighborhood.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MinProgram;

pub fn make_min_program() -> MinProgram {
    MinProgram
}

impl NodeProgram for MinProgram {
    type Input = f64;
    type State = f64;
    type Message = f64;

    fn init(&self, _ctx: NodeContext, input: &f64) -> f64 {
        *input
    }

    fn broadcast(&self, state: &f64) -> f64 {
        *state
    }

    fn on_round(&self, state: &f64, inbox: &[(NodeId, f64)]) -> f64 {
        inbox.iter().fold(*state, |m, &(_, x)| m.min(x))
    }

    fn stop_on_quiescence(&self) -> bool {
        true
    }
}
