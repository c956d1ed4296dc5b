mod common;

use common::small_scenario;
use nalgebra::DVector;
use num_complex::Complex64;
use umwave::eval::{ber_monte_carlo, ml_detect, sigma_for_snr_db, snr_db_for_ber, wilson_interval, Symbol};
use umwave::manifold::random_point;
use umwave::objective::{analytic_ber, q_function};

/// Composite Simpson integral of the standard normal density over `[x, x + 12]`.
fn q_by_quadrature(x: f64) -> f64 {
    let (a, b, n) = (x, x + 12.0, 20_000);
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = pdf(a) + pdf(b);
    for k in 1..n {
        let t = a + k as f64 * h;
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * pdf(t);
    }
    acc * h / 3.0
}

#[test]
fn q_function_matches_quadrature() {
    for &x in &[0.0, 0.5, 1.0, 2.0, 3.0, 4.5] {
        let oracle = q_by_quadrature(x);
        assert!((q_function(x) - oracle).abs() < 1e-9 * oracle.max(1e-300) + 1e-15);
    }
    assert!((q_function(1.0) - 0.158655).abs() < 5e-7);
}

#[test]
fn analytic_ber_limits() {
    let s = small_scenario(8, 2, vec![-20.0], vec![0, 1]);
    let x = random_point(8, 2, 1).unwrap();
    assert!((analytic_ber(&x, &s, 1e12).unwrap() - 0.5).abs() < 1e-9);
    assert!(analytic_ber(&x, &s, 1e-3).unwrap() < 1e-300);
    assert!(analytic_ber(&x, &s, 0.0).is_err());
    assert!(analytic_ber(&x, &s, -1.0).is_err());
}

#[test]
fn detector_is_the_likelihood_comparison() {
    let s = small_scenario(6, 2, vec![-20.0], vec![0]);
    let x = random_point(6, 2, 4).unwrap();
    let a = common::steer(s.comm_angle_deg(), 2, 0.5);
    let r = x.entries() * &a;
    let y_plus: DVector<Complex64> = r.clone();
    assert_eq!(ml_detect(&y_plus, &x, s.comm_angle_deg(), &s).unwrap(), Symbol::Plus);
    assert_eq!(ml_detect(&(-&r), &x, s.comm_angle_deg(), &s).unwrap(), Symbol::Minus);
    // a received vector that is closer to −r in Euclidean distance
    let y = &r * Complex64::new(-0.2, 0.0) + DVector::from_element(6, Complex64::new(0.0, 0.3));
    let d_plus = (&y - &r).norm();
    let d_minus = (&y + &r).norm();
    let expected = if d_plus <= d_minus { Symbol::Plus } else { Symbol::Minus };
    assert_eq!(ml_detect(&y, &x, s.comm_angle_deg(), &s).unwrap(), expected);
    let zero = DVector::from_element(6, Complex64::new(0.0, 0.0));
    assert_eq!(ml_detect(&zero, &x, s.comm_angle_deg(), &s).unwrap(), Symbol::Plus);
}

#[test]
fn monte_carlo_agrees_with_analytic_across_seeds() {
    let s = small_scenario(16, 3, vec![-20.0], vec![0, 1]);
    let x = random_point(16, 3, 9).unwrap();
    let trials = 20_000u64;
    let target_snr: Vec<f64> = [0.2, 0.05, 0.01]
        .iter()
        .map(|&b| snr_db_for_ber(&x, &s, b).unwrap())
        .collect();
    let mut within = 0;
    let mut total = 0;
    for seed in 0..20 {
        let curve = ber_monte_carlo(&x, &s, &target_snr, trials, seed).unwrap();
        for (mc, an) in curve.mc_ber.iter().zip(&curve.analytic_ber) {
            total += 1;
            if (mc - an).abs() <= 3.0 * (an * (1.0 - an) / trials as f64).sqrt() {
                within += 1;
            }
        }
    }
    assert!(within as f64 >= 0.95 * total as f64, "{within}/{total}");
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let s = small_scenario(8, 2, vec![-20.0], vec![0]);
    let x = random_point(8, 2, 2).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ber_monte_carlo(&x, &s, &[-3.0, 0.0, 3.0], 5_000, 17).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn snr_inversion_and_sigma() {
    let s = small_scenario(8, 2, vec![-20.0], vec![0]);
    let x = random_point(8, 2, 2).unwrap();
    let snr = snr_db_for_ber(&x, &s, 1e-3).unwrap();
    let ber = analytic_ber(&x, &s, sigma_for_snr_db(&x, snr)).unwrap();
    assert!((ber - 1e-3).abs() < 1e-9);
    // unimodular: ‖X‖² / N = M
    assert!((sigma_for_snr_db(&x, 0.0) - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn wilson_interval_contains_estimate() {
    for &(e, n) in &[(0u64, 100u64), (1, 100), (50, 100), (100, 100), (3, 100_000)] {
        let (lo, hi) = wilson_interval(e, n);
        let p = e as f64 / n as f64;
        assert!(lo <= p && p <= hi);
        assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
    }
}
