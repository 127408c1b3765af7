//! Seeded synthetic inputs.
//!
//! All randomness comes from SplitMix64 (Steele, Lea & Flood), seeded by
//! setting its 64-bit state to the seed. Draws are consumed in a fixed
//! order, so any port that follows the recipe below reproduces graphs and
//! attributes exactly:
//!
//! * uniform: `u = (next_u64() >> 11) * 2^-53`, in `[0, 1)`
//! * Erdős–Rényi: one uniform per pair `(i, j)`, `i < j`, visited in
//!   lexicographic order; the edge is kept when `u < p`
//! * exponential: `-mean * ln(((next_u64() >> 11) + 0.5) * 2^-53)`, one draw
//!   per node in node order, always strictly positive

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::engine::AttributeVector;
use crate::error::{Error, Result};
use crate::graph::Graph;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 stream with the uniform and exponential transforms used
/// throughout the crate.
pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * TWO_POW_NEG_53
    }

    /// Exponential with the given mean; never zero.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        let u = ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53;
        -mean * u.ln()
    }
}

/// Erdős–Rényi `G(n, p)` reduced to its largest connected component.
pub fn generate_synthetic(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("edge probability must lie in (0, 1], got {p}")));
    }
    let mut rng = Rng::new(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.uniform() < p {
                edges.push((i, j));
            }
        }
    }
    let lcc = Graph::from_edges(n, edges)?.largest_connected_component();
    if lcc.node_count() < 2 {
        return Err(Error::EmptyGraph);
    }
    Ok(lcc)
}

/// I.i.d. exponential attributes, one per node of `g` in node order.
pub fn generate_attributes(g: &Graph, mean: f64, seed: u64) -> Result<AttributeVector> {
    exponential_vector(g.node_count(), mean, seed)
}

pub fn exponential_vector(n: usize, mean: f64, seed: u64) -> Result<AttributeVector> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::Config(format!("mean must be positive, got {mean}")));
    }
    let mut rng = Rng::new(seed);
    AttributeVector::new((0..n).map(|_| rng.exponential(mean)).collect())
}
