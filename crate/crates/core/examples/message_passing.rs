//! Runs consensus as explicit per-node programs that only exchange messages
//! with graph neighbors, and shows it matches the vectorized engine.

use linkmetric::engine::wac_run;
use linkmetric::graph::{Graph, NodeId};
use linkmetric::simharness::{
    make_wac_program, run_synchronous, wac_inputs, NodeContext, NodeProgram,
};
use linkmetric::{ConsensusConfig, EpsilonPolicy, WeightVector};

/// Counts hops from node 0: a node adopts one more than its smallest
/// neighbor distance.
struct HopCount;

impl NodeProgram for HopCount {
    type Input = ();
    type State = u32;
    type Message = u32;

    fn init(&self, ctx: NodeContext, _: &()) -> u32 {
        if ctx.id == 0 {
            0
        } else {
            u32::MAX
        }
    }

    fn broadcast(&self, state: &u32) -> u32 {
        *state
    }

    fn on_round(&self, state: &u32, inbox: &[(NodeId, u32)]) -> u32 {
        let best = inbox.iter().map(|&(_, d)| d.saturating_add(1)).min().unwrap_or(u32::MAX);
        (*state).min(best)
    }

    fn stop_on_quiescence(&self) -> bool {
        true
    }
}

fn main() -> linkmetric::Result<()> {
    let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)])?;
    let x0 = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
    let w = WeightVector::degrees(&g)?;

    let sim = run_synchronous(&g, &make_wac_program(0.5), &wac_inputs(&x0, &w), 40)?;
    let cfg = ConsensusConfig {
        epsilon_policy: EpsilonPolicy::Explicit(0.5),
        max_iterations: 40,
        spread_tolerance: 1e-300,
        step_tolerance: 1e-300,
        ..Default::default()
    };
    let run = wac_run(&g, &x0, &w, &cfg)?;
    let sim_values: Vec<f64> = sim.final_states().iter().map(|s| s.value).collect();
    println!("message passing after {} rounds: {sim_values:.6?}", sim.rounds_executed);
    println!("engine after {} iterations:       {:.6?}", run.iterations_used, run.final_states);
    println!("bit-identical: {}", sim_values == run.final_states);
    println!("non-neighbor deliveries: {}", sim.locality_violations(&g).len());

    let hops = run_synchronous(&g, &HopCount, &[(); 6], 10)?;
    println!("hop counts from node 0: {:?} ({} rounds)", hops.final_states(), hops.rounds_executed);
    Ok(())
}
