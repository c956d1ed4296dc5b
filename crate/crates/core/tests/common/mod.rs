//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the crate's numerical routines; inputs and outputs
//! are plain nalgebra matrices so the oracles can be compared against the
//! library directly.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use umwave::{CMat, Scenario, ScenarioParams, TermWeights};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn steer(theta_deg: f64, m: usize, d_over_lambda: f64) -> DVector<Complex64> {
    let s = theta_deg.to_radians().sin();
    DVector::from_fn(m, |k, _| {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * d_over_lambda * k as f64 * s)
    })
}

/// Real form of a complex column: a `2 × 2N` matrix whose columns are
/// `(Re x_i, Im x_i)` for the first `N` and `(−Im x_i, Re x_i)` for the rest.
pub fn phi_t(x: &DVector<Complex64>) -> DMatrix<f64> {
    let n = x.len();
    let mut y = DMatrix::zeros(2, 2 * n);
    for i in 0..n {
        y[(0, i)] = x[i].re;
        y[(1, i)] = x[i].im;
        y[(0, n + i)] = -x[i].im;
        y[(1, n + i)] = x[i].re;
    }
    y
}

pub fn phi_t_inverse(y: &DMatrix<f64>) -> DVector<Complex64> {
    let n = y.ncols() / 2;
    DVector::from_fn(n, |i, _| c(y[(0, i)], y[(1, i)]))
}

/// `P_Y Z = Z − Y ddiag(Yᵀ Z)`.
pub fn oblique_project(y: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = z.clone();
    for i in 0..y.ncols() {
        let d = y.column(i).dot(&z.column(i));
        for r in 0..y.nrows() {
            out[(r, i)] -= y[(r, i)] * d;
        }
    }
    out
}

/// `(Y + Z) ddiag((Y + Z)ᵀ (Y + Z))^{-1/2}`.
pub fn oblique_retract(y: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut w = y + z;
    for i in 0..w.ncols() {
        let norm = w.column(i).norm();
        w.column_mut(i).scale_mut(1.0 / norm);
    }
    w
}

/// `½ tr(Y₁ᵀ Y₂)`.
pub fn real_form_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    0.5 * a.dot(b)
}

/// Applies a column-wise map of real forms to every column of a complex matrix.
pub fn columnwise<F>(x: &CMat, xi: &CMat, f: F) -> CMat
where
    F: Fn(&DMatrix<f64>, &DMatrix<f64>) -> DMatrix<f64>,
{
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for m in 0..x.ncols() {
        let y = phi_t(&x.column(m).into_owned());
        let z = phi_t(&xi.column(m).into_owned());
        out.set_column(m, &phi_t_inverse(&f(&y, &z)));
    }
    out
}

/// Dense shift with ones at `(k, k + τ)`, so `(S_τ y)[k] = y[k + τ]`.
pub fn shift_matrix(n: usize, tau: usize) -> CMat {
    let mut s = CMat::zeros(n, n);
    for k in 0..n.saturating_sub(tau) {
        s[(k, k + tau)] = c(1.0, 0.0);
    }
    s
}

/// `a_iᴴ Xᴴ S_τ X a_j` by dense matrix products.
pub fn dense_correlation(
    x: &CMat,
    ai: &DVector<Complex64>,
    aj: &DVector<Complex64>,
    tau: usize,
) -> Complex64 {
    let s = shift_matrix(x.nrows(), tau);
    (ai.adjoint() * x.adjoint() * s * x * aj)[(0, 0)]
}

/// `g` summed angle by angle over the scenario's angle sets, on any matrix.
pub fn g_per_angle(x: &CMat, s: &Scenario) -> f64 {
    let m = s.antennas();
    let d = s.d_over_lambda();
    let power = |theta: f64| (x * steer(theta, m, d)).norm_squared();
    let suppressed: f64 = s.suppressed_angles_deg().iter().map(|&t| power(t)).sum();
    let emphasized: f64 = s
        .desired_angles_deg()
        .iter()
        .chain(std::iter::once(&s.comm_angle_deg()))
        .map(|&t| power(t))
        .sum();
    suppressed - emphasized
}

/// Included correlation entries enumerated directly from the definition.
pub fn enumerate_correlations(x: &CMat, s: &Scenario) -> Vec<Complex64> {
    let m = s.antennas();
    let d = s.d_over_lambda();
    let angles = s.desired_angles_deg();
    let mut out = Vec::new();
    for (i, &ti) in angles.iter().enumerate() {
        for (j, &tj) in angles.iter().enumerate() {
            for &tau in s.delays() {
                if i == j && tau == 0 {
                    continue;
                }
                out.push(dense_correlation(x, &steer(ti, m, d), &steer(tj, m, d), tau));
            }
        }
    }
    out
}

pub fn h_enumerated(x: &CMat, s: &Scenario) -> f64 {
    enumerate_correlations(x, s).iter().map(|z| z.norm()).sum()
}

pub fn l2_enumerated(x: &CMat, s: &Scenario) -> f64 {
    enumerate_correlations(x, s).iter().map(|z| z.norm_sqr()).sum()
}

/// Wirtinger gradient `∂f/∂Re + j ∂f/∂Im` by central differences, entrywise.
pub fn fd_gradient<F>(f: F, x: &CMat, step: f64) -> CMat
where
    F: Fn(&CMat) -> f64,
{
    let mut g = CMat::zeros(x.nrows(), x.ncols());
    for idx in 0..x.len() {
        let mut partial = [0.0; 2];
        for (k, dir) in [c(1.0, 0.0), c(0.0, 1.0)].into_iter().enumerate() {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[idx] += dir * step;
            minus[idx] -= dir * step;
            partial[k] = (f(&plus) - f(&minus)) / (2.0 * step);
        }
        g[idx] = c(partial[0], partial[1]);
    }
    g
}

pub fn relative_error(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Minimum of `λᵀ G λ` over the simplex, by exhaustive enumeration of
/// supports, each solved as an equality-constrained least-squares problem.
pub fn min_norm_by_supports(gram: &DMatrix<f64>) -> f64 {
    let k = gram.nrows();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let s = idx.len();
        let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
        let mut rhs = DVector::<f64>::zeros(s + 1);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                kkt[(a, b)] = gram[(i, j)];
            }
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
        }
        rhs[s] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        if (0..s).any(|a| sol[a] < -1e-12 || !sol[a].is_finite()) {
            continue;
        }
        let mut lambda = DVector::<f64>::zeros(k);
        for (a, &i) in idx.iter().enumerate() {
            lambda[i] = sol[a].max(0.0);
        }
        let sum = lambda.sum();
        lambda /= sum;
        let v = (lambda.transpose() * gram * &lambda)[(0, 0)];
        best = best.min(v.max(0.0));
    }
    best.sqrt()
}

/// Minimum of `‖Σ λ_i v_i‖` over a lattice on the simplex with `steps`
/// subdivisions, then over successively finer lattices centred on the best
/// point found so far.
pub fn min_norm_by_simplex_grid(gram: &DMatrix<f64>, steps: usize, refinements: usize) -> f64 {
    let k = gram.nrows();
    let value = |l: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..k {
            for j in 0..k {
                acc += l[i] * l[j] * gram[(i, j)];
            }
        }
        acc
    };
    let mut best = vec![1.0 / k as f64; k];
    let mut best_v = value(&best);

    // coarse pass: all λ = counts / steps with Σ counts = steps
    fn compositions(k: usize, total: usize, prefix: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
        if prefix.len() == k - 1 {
            prefix.push(total);
            out(prefix);
            prefix.pop();
            return;
        }
        for c in 0..=total {
            prefix.push(c);
            compositions(k, total - c, prefix, out);
            prefix.pop();
        }
    }
    compositions(k, steps, &mut Vec::new(), &mut |counts| {
        let l: Vec<f64> = counts.iter().map(|&c| c as f64 / steps as f64).collect();
        let v = value(&l);
        if v < best_v {
            best_v = v;
            best = l;
        }
    });

    // refinement: a box of half-width 2h around the incumbent on the first
    // k − 1 coordinates, h shrinking each pass
    let mut h = 1.0 / steps as f64;
    let half = 8i64;
    for _ in 0..refinements {
        let fine = 2.0 * h / half as f64;
        let center = best.clone();
        let mut offsets = vec![-half; k - 1];
        loop {
            let mut l = vec![0.0; k];
            let mut rest = 1.0;
            let mut ok = true;
            for i in 0..k - 1 {
                l[i] = center[i] + offsets[i] as f64 * fine;
                if l[i] < 0.0 {
                    ok = false;
                }
                rest -= l[i];
            }
            l[k - 1] = rest;
            if ok && rest >= 0.0 {
                let v = value(&l);
                if v < best_v {
                    best_v = v;
                    best = l;
                }
            }
            let mut d = 0;
            while d < k - 1 {
                offsets[d] += 1;
                if offsets[d] <= half {
                    break;
                }
                offsets[d] = -half;
                d += 1;
            }
            if d == k - 1 {
                break;
            }
        }
        h = fine;
    }
    best_v.max(0.0).sqrt()
}

/// Small random scenario with the given sizes.
pub fn small_scenario(n: usize, m: usize, desired: Vec<f64>, delays: Vec<usize>) -> Scenario {
    Scenario::new(ScenarioParams {
        antennas: m,
        samples: n,
        d_over_lambda: 0.5,
        grid_step_deg: 1.0,
        desired_angles_deg: desired,
        comm_angle_deg: 55.0,
        delays,
        mainlobe_halfwidth_deg: Some(3.0),
        weights: TermWeights::default(),
        include_endpoints: false,
    })
    .unwrap()
}
