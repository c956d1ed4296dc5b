mod common;

use common::{dense_correlation, enumerate_correlations, g_per_angle, h_enumerated, small_scenario, steer};
use proptest::prelude::*;
use umwave::manifold::random_point;
use umwave::objective::{
    beampattern, correlation_entries, g_value, h_value, included_entries, objective, spatial_correlation,
};
use umwave::{Scenario, ScenarioParams};

#[test]
fn g_matches_per_angle_sum() {
    let s = small_scenario(8, 3, vec![-20.0, 10.0], vec![0, 1, 3]);
    for seed in 0..20 {
        let x = random_point(8, 3, seed).unwrap();
        let ours = g_value(&x, &s).unwrap();
        let oracle = g_per_angle(x.entries(), &s);
        assert!((ours - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn g_matches_per_angle_sum_at_reference_scale() {
    let s = Scenario::new(ScenarioParams::reference()).unwrap();
    let x = random_point(128, 8, 3).unwrap();
    let ours = g_value(&x, &s).unwrap();
    let oracle = g_per_angle(x.entries(), &s);
    assert!((ours - oracle).abs() <= 1e-8 * oracle.abs());
}

#[test]
fn h_matches_enumeration() {
    let s = small_scenario(10, 3, vec![-35.0, 0.0, 25.0], vec![0, 1, 2, 5, 9]);
    for seed in 0..20 {
        let x = random_point(10, 3, seed).unwrap();
        let ours = h_value(&x, &s).unwrap();
        let oracle = h_enumerated(x.entries(), &s);
        assert!((ours - oracle).abs() <= 1e-12 * oracle.max(1.0), "{ours} vs {oracle}");
    }
}

#[test]
fn included_entries_enumeration_order_and_count() {
    let s = small_scenario(10, 3, vec![-35.0, 0.0, 25.0], vec![0, 1, 2]);
    let entries = included_entries(&s);
    // K² |Γ| minus the K auto-terms at τ = 0
    assert_eq!(entries.len(), 9 * 3 - 3);
    assert!(!entries.iter().any(|&(i, j, tau)| i == j && tau == 0));
    let x = random_point(10, 3, 1).unwrap();
    let values = correlation_entries(&x, &s).unwrap();
    let oracle = enumerate_correlations(x.entries(), &s);
    for (v, o) in values.iter().zip(&oracle) {
        assert!((v.value - o).norm() < 1e-12);
    }
}

#[test]
fn spatial_correlation_matches_dense_shift() {
    let s = small_scenario(12, 4, vec![-40.0, 15.0], vec![0]);
    for seed in 0..10 {
        let x = random_point(12, 4, seed).unwrap();
        for tau in 0..12 {
            for &(ti, tj) in &[(-40.0, 15.0), (15.0, 15.0), (-7.5, 61.0)] {
                let ours = spatial_correlation(&x, ti, tj, tau, &s).unwrap();
                let oracle = dense_correlation(x.entries(), &steer(ti, 4, 0.5), &steer(tj, 4, 0.5), tau);
                assert!((ours - oracle).norm() < 1e-12, "tau {tau}: {ours} vs {oracle}");
            }
        }
    }
}

#[test]
fn spatial_correlation_rejects_full_length_delay() {
    let s = small_scenario(6, 2, vec![0.0], vec![0]);
    let x = random_point(6, 2, 0).unwrap();
    assert!(spatial_correlation(&x, 0.0, 0.0, 6, &s).is_err());
}

#[test]
fn beampattern_is_zero_lag_autocorrelation() {
    let s = small_scenario(12, 4, vec![-40.0, 15.0], vec![0]);
    let x = random_point(12, 4, 2).unwrap();
    for &t in &[-40.0, 0.0, 33.3, 89.0] {
        let p = beampattern(&x, t, &s).unwrap();
        let z = spatial_correlation(&x, t, t, 0, &s).unwrap();
        assert!((p - z.re).abs() <= 1e-12 * p.max(1.0));
        assert!(z.im.abs() <= 1e-12 * p.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn total_is_weighted_sum(seed in 0u64..5_000, wg in 0.0f64..3.0, wh in 0.0f64..3.0) {
        let s = small_scenario(8, 3, vec![-20.0, 10.0], vec![0, 1, 3])
            .with_weights(umwave::TermWeights { g: wg, h: wh })
            .unwrap();
        let x = random_point(8, 3, seed).unwrap();
        let b = objective(&x, &s).unwrap();
        prop_assert_eq!(b.total, wg * b.g_value + wh * b.h_value);
    }

    #[test]
    fn objective_is_invariant_to_global_phase(seed in 0u64..5_000, phi in -3.2f64..3.2) {
        let s = small_scenario(8, 3, vec![-20.0, 10.0], vec![0, 1, 3]);
        let x = random_point(8, 3, seed).unwrap();
        let a = objective(&x, &s).unwrap();
        let b = objective(&x.rotate_phase(phi), &s).unwrap();
        prop_assert!((a.g_value - b.g_value).abs() <= 1e-9 * a.g_value.abs().max(1.0));
        prop_assert!((a.h_value - b.h_value).abs() <= 1e-9 * a.h_value.max(1.0));
    }

    #[test]
    fn h_is_nonnegative(seed in 0u64..5_000) {
        let s = small_scenario(8, 3, vec![-20.0, 10.0], vec![0, 1, 3]);
        let x = random_point(8, 3, seed).unwrap();
        prop_assert!(h_value(&x, &s).unwrap() >= 0.0);
    }
}
