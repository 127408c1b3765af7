#![allow(dead_code)]

use linkmetric::graph::Graph;
use linkmetric::synthetic::{generate_attributes, generate_synthetic, Rng};
use linkmetric::AttributeVector;

/// Seeded connected Erdős–Rényi instance with mean degree about
/// `mean_degree`, node count drawn from `[lo, hi]`, and exponential
/// attributes of mean 5.
pub fn er_instance(seed: u64, lo: usize, hi: usize, mean_degree: f64) -> (Graph, AttributeVector) {
    let mut rng = Rng::new(seed ^ 0x5eed);
    let n = lo + (rng.next_u64() % (hi - lo + 1) as u64) as usize;
    let p = (mean_degree / (n - 1) as f64).min(1.0);
    let g = generate_synthetic(n, p, seed).expect("graph");
    let y = generate_attributes(&g, 5.0, seed.wrapping_mul(31).wrapping_add(7)).expect("attributes");
    (g, y)
}

pub fn attrs(v: &[f64]) -> AttributeVector {
    AttributeVector::new(v.to_vec()).unwrap()
}

pub fn triangle() -> Graph {
    Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

pub fn star(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (0, i))).unwrap()
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}
