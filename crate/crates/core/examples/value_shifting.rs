//! Shifting every attribute by a constant leaves the total variation
//! unchanged but changes how fast the stages converge.

use linkmetric::metrics::{shift_attributes, total_variation_pipeline};
use linkmetric::synthetic::{generate_attributes, generate_synthetic};
use linkmetric::ConsensusConfig;

fn main() -> linkmetric::Result<()> {
    let g = generate_synthetic(300, 0.02, 21)?;
    let y = generate_attributes(&g, 5.0, 22)?;
    let cfg = ConsensusConfig::default();

    println!("{:>8}  {:>16}  iterations per stage", "shift", "T");
    for c in [None, Some(1.0), Some(10.0), Some(100.0)] {
        let ys = match c {
            Some(c) => shift_attributes(&y, c)?,
            None => y.clone(),
        };
        let r = total_variation_pipeline(&g, &ys, &cfg)?;
        let iters: Vec<usize> = r.stages.iter().map(|s| s.run.iterations_used).collect();
        println!("{:>8}  {:>16.10}  {iters:?}", c.unwrap_or(0.0), r.total_variation);
    }
    Ok(())
}
