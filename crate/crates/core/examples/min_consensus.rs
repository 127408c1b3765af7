//! Agreeing on the smallest node value in at most diameter rounds, used to
//! pick a step size every node can accept.

use linkmetric::engine::{distributed_delta1, min_consensus, neighbor_weight_sums, max_step_size};
use linkmetric::synthetic::{generate_attributes, generate_synthetic};

fn main() -> linkmetric::Result<()> {
    let g = generate_synthetic(500, 0.01, 9)?;
    let y = generate_attributes(&g, 5.0, 10)?;
    let diam = g.diameter()?;

    let m = min_consensus(&g, y.values(), g.node_count())?;
    let lo = y.values().iter().copied().fold(f64::INFINITY, f64::min);
    println!("N={} diameter={diam}", g.node_count());
    println!("min value {lo:.6} reached everywhere after {} rounds", m.rounds_used);
    assert!(m.states.iter().all(|&v| v == lo));

    let delta1 = distributed_delta1(&g, &y)?;
    let w = neighbor_weight_sums(&g, &y, 1)?;
    println!("step bound agreed by min-consensus: {delta1:.8}");
    println!("step bound computed centrally:      {:.8}", max_step_size(&w, &g)?);
    Ok(())
}
