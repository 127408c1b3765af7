//! A polynomial link metric `f(a, b) = sum c_lk a^l b^k`, one pair of
//! consensus runs per term.

use linkmetric::metrics::polynomial_metric;
use linkmetric::oracle::exact_polynomial_metric;
use linkmetric::synthetic::{generate_synthetic, Rng};
use linkmetric::{AttributeVector, ConsensusConfig, MetricSpec};

fn main() -> linkmetric::Result<()> {
    let g = generate_synthetic(150, 0.04, 11)?;
    // Attributes in [1, 2]: high powers of widely spread values make the
    // neighbor-sum weights uneven and slow the stage down.
    let mut rng = Rng::new(12);
    let y = AttributeVector::new((0..g.node_count()).map(|_| 1.0 + rng.uniform()).collect())?;

    let spec = MetricSpec::parse(
        "# l k c\n\
         1 0 0.5\n\
         0 1 0.5\n\
         2 1 -1.0\n\
         3 3 0.25\n",
    )?;
    let r = polynomial_metric(&g, &y, &spec, &ConsensusConfig::default())?;
    for t in &r.terms {
        let iters: Vec<usize> = t.stages.iter().map(|s| s.run.iterations_used).collect();
        println!(
            "term ({}, {}) c={:+.2}: alpha1={:.8} alpha2={:.8} h={:.8} iterations={iters:?}",
            t.l, t.k, t.coefficient, t.alpha_1lk, t.alpha_2lk, t.h_lk
        );
    }
    let exact = exact_polynomial_metric(&g, &y, &spec)?;
    println!("distributed = {:.10} (converged: {})", r.value, r.converged());
    println!("centralized = {exact:.10}");
    Ok(())
}
