mod common;

use common::*;
use linkmetric::metrics::{polynomial_metric, polynomial_term_pipeline, shift_attributes, total_variation_pipeline};
use linkmetric::oracle::{exact_alphas, exact_polynomial_metric, exact_total_variation};
use linkmetric::{ConsensusConfig, MetricSpec};
use proptest::prelude::*;

#[test]
fn tv_pipeline_matches_oracle_and_closed_forms() {
    for seed in 0..25 {
        let (g, y) = er_instance(seed, 20, 200, 5.0);
        let r = total_variation_pipeline(&g, &y, &ConsensusConfig::default()).unwrap();
        let (a1, a2, a3) = exact_alphas(&g, &y).unwrap();
        assert!(rel_err(r.alpha1, a1) < 1e-8);
        assert!(rel_err(r.alpha2, a2) < 1e-8);
        assert!(rel_err(r.alpha3, a3) < 1e-8);
        let tv = exact_total_variation(&g, &y).unwrap();
        assert!(rel_err(r.total_variation, tv) <= 1e-6);
        assert!(r.total_variation >= -1e-9);
    }
}

#[test]
fn polynomial_metric_matches_oracle() {
    let spec = MetricSpec::new(vec![(0, 0, 0.5), (1, 0, 2.0), (2, 1, -0.25), (1, 3, 0.1), (3, 3, 0.01)]).unwrap();
    let mut converged = 0;
    for seed in 0..10 {
        let (g, y) = er_instance(50 + seed, 20, 80, 4.0);
        // High powers of a wide attribute range make the neighbor-sum weights
        // so uneven that mixing crawls; keep values within [1, 3].
        let y = linkmetric::AttributeVector::new(y.values().iter().map(|v| (1.0 + v / 5.0).min(3.0)).collect()).unwrap();
        let got = polynomial_metric(&g, &y, &spec, &ConsensusConfig::default()).unwrap();
        let want = exact_polynomial_metric(&g, &y, &spec).unwrap();
        assert_eq!(got.terms.len(), 5);
        let all_converged = got.terms.iter().flat_map(|t| &t.stages).all(|s| s.run.converged);
        if all_converged {
            assert!(rel_err(got.value, want) < 1e-6, "seed {seed}: {} vs {want}", got.value);
            converged += 1;
        }
    }
    assert!(converged >= 8, "only {converged} instances converged");
}

#[test]
fn asymmetric_terms_are_edge_symmetrized() {
    // f = y_i^2 y_j on a path: the per-edge value is (y_i^2 y_j + y_j^2 y_i) / 2.
    let g = path(3);
    let y = attrs(&[1.0, 2.0, 3.0]);
    let r = polynomial_term_pipeline(&g, &y, 2, 1, 1.0, &ConsensusConfig::default()).unwrap();
    let want = ((2.0 + 4.0) / 2.0 + (12.0 + 18.0) / 2.0) / 2.0;
    assert!((r.h_lk - want).abs() < 1e-9, "{} vs {want}", r.h_lk);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shift_leaves_total_variation_unchanged(seed in 0u64..10_000, c in 0.5f64..50.0) {
        let (g, y) = er_instance(seed, 10, 60, 4.0);
        let shifted = shift_attributes(&y, c).unwrap();
        let a = exact_total_variation(&g, &y).unwrap();
        let b = exact_total_variation(&g, &shifted).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
        let cfg = ConsensusConfig::default();
        let pa = total_variation_pipeline(&g, &y, &cfg).unwrap().total_variation;
        let pb = total_variation_pipeline(&g, &shifted, &cfg).unwrap().total_variation;
        prop_assert!((pa - pb).abs() <= 1e-6 * pa.abs().max(1.0));
        prop_assert!(pa >= -1e-9 && pb >= -1e-9);
    }

    #[test]
    fn tv_spec_oracle_matches_tv_oracle(seed in 0u64..10_000) {
        let (g, y) = er_instance(seed, 5, 100, 4.0);
        let a = exact_polynomial_metric(&g, &y, &MetricSpec::total_variation()).unwrap();
        let b = exact_total_variation(&g, &y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        let (a1, a2, a3) = exact_alphas(&g, &y).unwrap();
        prop_assert!(((2.0 * a1 - 2.0 * a2 * a3) - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}
