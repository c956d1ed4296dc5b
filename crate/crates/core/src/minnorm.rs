//! Minimum-norm point of the convex hull of a finite point set (Wolfe's
//! algorithm), expressed entirely through the Gram matrix so it works for any
//! inner-product space.

use nalgebra::{DMatrix, DVector};

const MAX_OUTER: usize = 1000;
const WEIGHT_FLOOR: f64 = 1e-14;

/// Convex weights `λ` minimizing `λᵀ G λ` over the simplex, for a symmetric
/// positive semidefinite Gram matrix `G`.
///
/// Stops when `(Gλ)_j ≥ λᵀGλ − tol` for every `j`, the optimality condition of
/// the minimum-norm point.
pub fn min_norm_weights(gram: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    let k = gram.nrows();
    assert!(k > 0 && gram.ncols() == k, "gram matrix must be square and nonempty");
    let start = (0..k)
        .min_by(|&a, &b| gram[(a, a)].total_cmp(&gram[(b, b)]))
        .unwrap_or(0);
    let mut weights = vec![0.0; k];
    weights[start] = 1.0;
    let mut corral = vec![start];

    for _ in 0..MAX_OUTER {
        let lam = DVector::from_column_slice(&weights);
        let g_lam = gram * &lam;
        let norm_sq = lam.dot(&g_lam);
        let (entering, lowest) = g_lam
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if lowest >= norm_sq - tol || corral.contains(&entering) {
            break;
        }
        corral.push(entering);

        // Minor cycle: move toward the affine minimizer of the corral, dropping
        // points whose weight would turn negative.
        for _ in 0..=k {
            let affine = affine_minimizer(gram, &corral);
            if affine.iter().all(|&w| w > WEIGHT_FLOOR) {
                for (&idx, &w) in corral.iter().zip(affine.iter()) {
                    weights[idx] = w;
                }
                break;
            }
            let mut step = 1.0f64;
            for (&idx, &mu) in corral.iter().zip(affine.iter()) {
                if mu <= WEIGHT_FLOOR {
                    let lam_i = weights[idx];
                    let denom = lam_i - mu;
                    if denom > 0.0 {
                        step = step.min(lam_i / denom);
                    }
                }
            }
            for (&idx, &mu) in corral.iter().zip(affine.iter()) {
                weights[idx] = (1.0 - step) * weights[idx] + step * mu;
            }
            corral.retain(|&idx| {
                if weights[idx] <= WEIGHT_FLOOR {
                    weights[idx] = 0.0;
                    false
                } else {
                    true
                }
            });
            if corral.is_empty() {
                // Numerical breakdown; fall back to the best vertex.
                weights.iter_mut().for_each(|w| *w = 0.0);
                weights[start] = 1.0;
                corral.push(start);
                break;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    weights
}

/// Affine-hull minimizer restricted to `corral`, from the KKT system
/// `[G 1; 1ᵀ 0] [μ; ν] = [0; 1]`.
fn affine_minimizer(gram: &DMatrix<f64>, corral: &[usize]) -> Vec<f64> {
    let s = corral.len();
    if s == 1 {
        return vec![1.0];
    }
    let scale = corral
        .iter()
        .map(|&i| gram[(i, i)].abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut ridge = 0.0;
    loop {
        let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
        for (a, &i) in corral.iter().enumerate() {
            for (b, &j) in corral.iter().enumerate() {
                kkt[(a, b)] = gram[(i, j)] / scale;
            }
            kkt[(a, a)] += ridge;
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(s + 1);
        rhs[s] = 1.0;
        if let Some(sol) = kkt.lu().solve(&rhs) {
            if sol.iter().all(|v| v.is_finite()) {
                return sol.iter().take(s).copied().collect();
            }
        }
        ridge = if ridge == 0.0 { 1e-14 } else { ridge * 100.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_of(points: &[Vec<f64>]) -> DMatrix<f64> {
        let k = points.len();
        DMatrix::from_fn(k, k, |i, j| points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum())
    }

    #[test]
    fn singleton() {
        let w = min_norm_weights(&gram_of(&[vec![3.0, 4.0]]), 1e-12);
        assert_eq!(w, vec![1.0]);
    }

    #[test]
    fn antipodal_pair_contains_origin() {
        let w = min_norm_weights(&gram_of(&[vec![1.0, 2.0], vec![-1.0, -2.0]]), 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn segment_interior_point() {
        // Closest point of segment [(1, 1), (1, -1)] to origin is (1, 0).
        let w = min_norm_weights(&gram_of(&[vec![1.0, 1.0], vec![1.0, -1.0]]), 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vertex_solution_with_redundant_points() {
        let pts = vec![vec![1.0, 0.0], vec![2.0, 1.0], vec![3.0, -1.0], vec![1.0, 0.0]];
        let w = min_norm_weights(&gram_of(&pts), 1e-12);
        let p: Vec<f64> = (0..2).map(|d| pts.iter().zip(&w).map(|(v, l)| v[d] * l).sum()).collect();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }
}
