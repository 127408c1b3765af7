//! Centralized reference values computed directly from the edge set.
//! Nothing here runs a consensus iteration; tests and the experiment
//! runner compare the distributed pipelines against these.

use crate::engine::{pow, AttributeVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::MetricSpec;

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

fn edge_sum(g: &Graph, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for (i, j) in g.edges() {
        acc.add(f(i, j));
    }
    acc.value()
}

fn require_edges(g: &Graph) -> Result<()> {
    if g.edge_count() == 0 {
        Err(Error::EmptyGraph)
    } else {
        Ok(())
    }
}

/// `(1/M) * sum over edges of (y_i - y_j)^2`.
pub fn exact_total_variation(g: &Graph, y: &AttributeVector) -> Result<f64> {
    require_edges(g)?;
    let y = y.values();
    Ok(edge_sum(g, |i, j| (y[i] - y[j]).powi(2)) / g.edge_count() as f64)
}

/// Edge average of `f`, symmetrized per edge as `(f(y_i, y_j) + f(y_j, y_i)) / 2`.
pub fn exact_polynomial_metric(g: &Graph, y: &AttributeVector, spec: &MetricSpec) -> Result<f64> {
    require_edges(g)?;
    let y = y.values();
    let f = |a: f64, b: f64| {
        spec.terms()
            .iter()
            .map(|t| t.coefficient * pow(a, t.l) * pow(b, t.k))
            .sum::<f64>()
    };
    Ok(edge_sum(g, |i, j| 0.5 * (f(y[i], y[j]) + f(y[j], y[i]))) / g.edge_count() as f64)
}

/// Closed-form consensus targets of the three total-variation stages:
///
/// * `alpha1 = sum(d_i y_i^2) / sum(d_i)`
/// * `alpha2 = sum_i sum_j a_ij y_i y_j / sum(d_i y_i)`
/// * `alpha3 = sum(d_i y_i) / sum(d_i)`
pub fn exact_alphas(g: &Graph, y: &AttributeVector) -> Result<(f64, f64, f64)> {
    if let Some(i) = (0..g.node_count()).find(|&i| g.degree(i) == 0) {
        return Err(Error::IsolatedNode(i));
    }
    let yv = y.values();
    let mut deg = CompensatedSum::default();
    let mut dy = CompensatedSum::default();
    let mut dy2 = CompensatedSum::default();
    for (i, &yi) in yv.iter().enumerate() {
        let d = g.degree(i) as f64;
        deg.add(d);
        dy.add(d * yi);
        dy2.add(d * yi * yi);
    }
    let cross = 2.0 * edge_sum(g, |i, j| yv[i] * yv[j]);
    let (deg, dy, dy2) = (deg.value(), dy.value(), dy2.value());
    Ok((dy2 / deg, cross / dy, dy / deg))
}
