//! Predicted versus measured convergence rate of a single consensus stage.

use linkmetric::engine::{exact_consensus_target, max_step_size, wac_run};
use linkmetric::spectral::{empirical_convergence_factor, spectral_report};
use linkmetric::synthetic::{generate_attributes, generate_synthetic};
use linkmetric::{ConsensusConfig, EpsilonPolicy, WeightVector};

fn main() -> linkmetric::Result<()> {
    let g = generate_synthetic(120, 0.05, 5)?;
    let y = generate_attributes(&g, 5.0, 6)?;
    let w = WeightVector::degrees(&g)?;
    let bound = max_step_size(&w, &g)?;
    println!("N={} stability bound={bound}", g.node_count());

    for frac in [0.2, 0.5, 0.9] {
        let eps = frac * bound;
        let rep = spectral_report(&g, &w, eps)?;
        let cfg = ConsensusConfig {
            epsilon_policy: EpsilonPolicy::Explicit(eps),
            record_trace: true,
            ..Default::default()
        };
        let run = wac_run(&g, y.values(), &w, &cfg)?;
        let target = exact_consensus_target(y.values(), &w);
        let measured = empirical_convergence_factor(&run, target)?;
        let n = rep.eigenvalues.len();
        println!(
            "eps={eps:.3}: lambda2={:.6} lambdaN={:.6} rho={:.6} measured={measured:.6} \
             predicted 1e-6 after {:?} iterations, ran {}",
            rep.eigenvalues[1],
            rep.eigenvalues[n - 1],
            rep.rho,
            rep.predicted_iterations(1e-6),
            run.iterations_used
        );
    }
    Ok(())
}
