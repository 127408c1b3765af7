//! Watches every iterate of every stage through an observer and reports
//! how the spread between nodes decays.

use linkmetric::engine::spread;
use linkmetric::metrics::total_variation_pipeline_observed;
use linkmetric::synthetic::{generate_attributes, generate_synthetic};
use linkmetric::ConsensusConfig;

fn main() -> linkmetric::Result<()> {
    let g = generate_synthetic(200, 0.03, 31)?;
    let y = generate_attributes(&g, 5.0, 32)?;

    let mut samples: Vec<(String, usize, f64)> = Vec::new();
    let r = total_variation_pipeline_observed(&g, &y, &ConsensusConfig::default(), &mut |stage, k, x| {
        if k.is_power_of_two() || k == 0 {
            samples.push((stage.to_owned(), k, spread(x)));
        }
    })?;
    for (stage, k, s) in &samples {
        println!("{stage:<7} k={k:<6} spread={s:.3e}");
    }
    for s in &r.stages {
        println!("{} stopped after {} iterations: {:?}", s.name, s.run.iterations_used, s.run.stop_reason);
    }
    Ok(())
}
