//! Convergence-rate analysis of the WAC iteration.
//!
//! `x(k+1) = (I - eps W^-1 L) x(k)` is similar, through `W^{1/2}`, to the
//! symmetric iteration `P = I - eps W^{-1/2} L W^{-1/2}`. The leading
//! eigenvalue of `P` is 1 (eigenvector `W^{1/2} 1`) and the error contracts
//! asymptotically by `rho = max(|lambda_2|, |lambda_N|)` per round.

use crate::engine::{ConsensusRun, WeightVector};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::DenseMatrix;

const MAX_SWEEPS: usize = 100;

/// `I - eps W^{-1/2} L W^{-1/2}`, symmetric by construction.
pub fn normalized_weight_matrix(g: &Graph, w: &WeightVector, epsilon: f64) -> Result<DenseMatrix> {
    let n = g.node_count();
    if w.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: w.len(),
        });
    }
    let wv = w.values();
    let mut p = DenseMatrix::zeros(n);
    for i in 0..n {
        p[(i, i)] = 1.0 - epsilon * g.degree(i) as f64 / wv[i];
        for &j in g.neighbors(i).iter().filter(|&&j| j > i) {
            let v = epsilon / (wv[i] * wv[j]).sqrt();
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    Ok(p)
}

/// Eigenvalues of a symmetric matrix, sorted descending.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(m)?.0)
}

/// Eigenvalues (descending) and matching unit eigenvectors (as columns, one
/// `Vec` per eigenvalue) by cyclic Jacobi rotations.
pub fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.dim();
    let norm = m.frobenius_norm();
    let asym = m.max_asymmetry();
    if asym > 1e-12 * norm.max(1.0) {
        return Err(Error::Asymmetric(asym));
    }
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    let target = 1e-12 * norm;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = order
        .iter()
        .map(|&c| (0..n).map(|r| v[(r, c)]).collect())
        .collect();
    Ok((values, vectors))
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Zeroes `a[p][q]` with one Givens rotation applied on both sides.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.dim();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `max(|lambda_2|, |lambda_N|)` of a descending eigenvalue list.
pub fn convergence_factor(eigenvalues: &[f64]) -> Result<f64> {
    match eigenvalues {
        [_, second, .., last] => Ok(second.abs().max(last.abs())),
        [_, second] => Ok(second.abs()),
        _ => Err(Error::Config(format!(
            "convergence factor needs at least 2 eigenvalues, got {}",
            eigenvalues.len()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub epsilon: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub rho: f64,
}

impl SpectralReport {
    /// Iterations needed to shrink the error by `reduction` (in `(0, 1)`),
    /// `ceil(ln reduction / ln rho)`. `None` unless `0 < rho < 1`.
    pub fn predicted_iterations(&self, reduction: f64) -> Option<u64> {
        (self.rho > 0.0 && self.rho < 1.0)
            .then(|| (reduction.ln() / self.rho.ln()).ceil() as u64)
    }
}

pub fn spectral_report(g: &Graph, w: &WeightVector, epsilon: f64) -> Result<SpectralReport> {
    let p = normalized_weight_matrix(g, w, epsilon)?;
    let eigenvalues = symmetric_eigenvalues(&p)?;
    let rho = convergence_factor(&eigenvalues)?;
    Ok(SpectralReport {
        epsilon,
        eigenvalues,
        rho,
    })
}

/// Per-round error contraction measured on a recorded trace, over the
/// second half of the run.
pub fn empirical_convergence_factor(run: &ConsensusRun, target: f64) -> Result<f64> {
    let k = run.iterations_used;
    empirical_convergence_factor_from(run, target, k.div_ceil(2))
}

/// `(|x(K) - x*| / |x(k0) - x*|)^(1 / (K - k0))` with `x* = target * 1`.
pub fn empirical_convergence_factor_from(
    run: &ConsensusRun,
    target: f64,
    start: usize,
) -> Result<f64> {
    let trace = run
        .trace
        .as_ref()
        .ok_or_else(|| Error::NotEstimable("run has no recorded trace".into()))?;
    let end = trace.len().saturating_sub(1);
    if end < 20 {
        return Err(Error::NotEstimable(format!(
            "need at least 20 iterations, have {end}"
        )));
    }
    if start >= end {
        return Err(Error::NotEstimable(format!(
            "window start {start} is not before the last iteration {end}"
        )));
    }
    let floor = 1e2 * f64::EPSILON * target.abs().max(1.0);
    let error = |x: &[f64]| x.iter().map(|v| (v - target).powi(2)).sum::<f64>().sqrt();
    let errors: Vec<f64> = trace[start..=end].iter().map(|x| error(x)).collect();
    if let Some(e) = errors.iter().find(|&&e| e < floor) {
        return Err(Error::NotEstimable(format!(
            "error norm {e:e} is at rounding level"
        )));
    }
    let ratio = errors[errors.len() - 1] / errors[0];
    Ok(ratio.powf(1.0 / (end - start) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{wac_run, ConsensusConfig, EpsilonPolicy};
    use crate::graph::fixtures::*;

    fn weights(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalized_matrices() {
        let m = normalized_weight_matrix(&path(2), &weights(&[1., 1.]), 0.5).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);

        let g = complete(4);
        let w = weights(&[1., 2., 3., 4.]);
        assert_eq!(normalized_weight_matrix(&g, &w, 0.0).unwrap(), DenseMatrix::identity(4));

        let tri = triangle();
        let eps = 0.37;
        let m = normalized_weight_matrix(&tri, &WeightVector::degrees(&tri).unwrap(), eps).unwrap();
        let l = tri.laplacian();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 } - eps / 2.0 * l[(i, j)];
                assert!((m[(i, j)] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let m = DenseMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let e = symmetric_eigenvalues(&m).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && e[1].abs() < 1e-14);

        assert_eq!(symmetric_eigenvalues(&DenseMatrix::identity(3)).unwrap(), vec![1.0; 3]);

        let tri = triangle();
        let m = normalized_weight_matrix(&tri, &WeightVector::degrees(&tri).unwrap(), 0.9).unwrap();
        let e = symmetric_eigenvalues(&m).unwrap();
        for (got, want) in e.iter().zip([1.0, -0.35, -0.35]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(matches!(symmetric_eigenvalues(&m), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let g = cycle(6);
        let w = weights(&[1.0, 2.5, 3.0, 1.5, 4.0, 2.0]);
        let p = normalized_weight_matrix(&g, &w, 0.4).unwrap();
        let (vals, vecs) = symmetric_eigen(&p).unwrap();
        for (lambda, v) in vals.iter().zip(&vecs) {
            let pv = p.mul_vec(v);
            for (a, b) in pv.iter().zip(v) {
                assert!((a - lambda * b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn convergence_factors() {
        assert_eq!(convergence_factor(&[1.0, 0.5, -0.7]), Ok(0.7));
        assert_eq!(convergence_factor(&[1.0, 0.0]), Ok(0.0));
        assert_eq!(convergence_factor(&[1.0, -0.35, -0.35]), Ok(0.35));
        assert!(convergence_factor(&[1.0]).is_err());
    }

    #[test]
    fn predicted_iterations() {
        let r = SpectralReport {
            epsilon: 0.5,
            eigenvalues: vec![1.0, 0.5],
            rho: 0.5,
        };
        assert_eq!(r.predicted_iterations(1e-3), Some(10));
        let r = SpectralReport { rho: 0.0, ..r };
        assert_eq!(r.predicted_iterations(1e-3), None);
    }

    fn traced(eps: f64) -> ConsensusConfig {
        ConsensusConfig {
            epsilon_policy: EpsilonPolicy::Explicit(eps),
            record_trace: true,
            ..Default::default()
        }
    }

    #[test]
    fn empirical_rate_on_two_nodes() {
        let g = path(2);
        let w = weights(&[1., 1.]);
        let run = wac_run(&g, &[0., 2.], &w, &traced(0.25)).unwrap();
        let rho = empirical_convergence_factor(&run, 1.0).unwrap();
        assert!((rho - 0.5).abs() < 1e-9, "{rho}");

        let run = wac_run(&g, &[0., 2.], &w, &traced(0.5)).unwrap();
        assert_eq!(run.iterations_used, 1);
        assert!(matches!(
            empirical_convergence_factor(&run, 1.0),
            Err(Error::NotEstimable(_))
        ));

        let untraced = wac_run(&g, &[0., 2.], &w, &ConsensusConfig::default()).unwrap();
        assert!(empirical_convergence_factor(&untraced, 1.0).is_err());
    }
}
