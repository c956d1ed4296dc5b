//! The ISAC design objective `f = w_g·g + w_h·h` and its Euclidean
//! (sub)gradients.
//!
//! * `g(X) = Σ_{suppressed} P_θ(X) − Σ_{desired ∪ comm} P_θ(X)` with the
//!   beampattern `P_θ(X) = a_θᴴ Xᴴ X a_θ`.
//! * `h(X) = Σ |P_{θiθj,τ}(X)|` over the included correlation entries
//!   `P_{θiθj,τ}(X) = a_iᴴ Xᴴ S_τ X a_j`.
//!
//! Gradients are returned as `2·∂f/∂X*`, so the directional derivative along
//! `V` is `Re tr(Gᴴ V)`.

use nalgebra::DVector;
use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};
use crate::manifold::{CMat, WaveformMatrix};
use crate::scenario::{steering, Scenario, SteeringVector};

/// Below this modulus a correlation entry is treated as sitting on the kink of `|·|`.
pub const KINK_TOL: f64 = 1e-12;

/// Value of one included correlation entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationEntry {
    pub theta_i_deg: f64,
    pub theta_j_deg: f64,
    pub tau: usize,
    pub value: Complex64,
}

/// The two objective terms and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBreakdown {
    pub g_value: f64,
    pub h_value: f64,
    pub total: f64,
}

/// A real-valued function on `UM(N, M)` with a Euclidean (sub)gradient oracle.
pub trait Objective {
    fn dims(&self) -> (usize, usize);

    fn value(&self, x: &WaveformMatrix) -> Result<f64>;

    /// Returns `2·∂f/∂X*`, or an element of the Clarke subdifferential at kinks.
    fn euclidean_gradient(&self, x: &WaveformMatrix) -> Result<CMat>;
}

fn check_dims(x: &WaveformMatrix, scenario: &Scenario) -> Result<()> {
    if x.dims() != scenario.dims() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    Ok(())
}

/// The synthesized signal `X a` toward one direction.
pub(crate) fn synthesize(x: &WaveformMatrix, a: &SteeringVector) -> DVector<Complex64> {
    x.entries() * a
}

/// `Σ_n conj(y_i[n]) · y_j[n + τ]`, which is `y_iᴴ S_τ y_j`.
pub(crate) fn lagged_product(yi: &DVector<Complex64>, yj: &DVector<Complex64>, tau: usize) -> Complex64 {
    let n = yi.len();
    (0..n.saturating_sub(tau))
        .map(|k| yi[k].conj() * yj[k + tau])
        .sum()
}

/// Beampattern `P_θ(X) = ‖X a_θ‖²`.
pub fn beampattern(x: &WaveformMatrix, theta_deg: f64, scenario: &Scenario) -> Result<f64> {
    check_dims(x, scenario)?;
    let a = steering(theta_deg, scenario)?;
    Ok(synthesize(x, &a).norm_squared())
}

/// Spatial correlation `a_iᴴ Xᴴ S_τ X a_j`, with `S_τ` applied as a row shift.
pub fn spatial_correlation(
    x: &WaveformMatrix,
    theta_i_deg: f64,
    theta_j_deg: f64,
    tau: usize,
    scenario: &Scenario,
) -> Result<Complex64> {
    check_dims(x, scenario)?;
    if tau >= x.samples() {
        return Err(invalid(format!(
            "delay {tau} must be at most N - 1 = {}",
            x.samples() - 1
        )));
    }
    let yi = synthesize(x, &steering(theta_i_deg, scenario)?);
    let yj = synthesize(x, &steering(theta_j_deg, scenario)?);
    Ok(lagged_product(&yi, &yj, tau))
}

/// Index triples `(i, j, τ)` entering `h`: all ordered desired-angle pairs and
/// delays except the auto-terms `(i, i, 0)`.
pub fn included_entries(scenario: &Scenario) -> Vec<(usize, usize, usize)> {
    let k = scenario.desired_angles_deg().len();
    let mut out = Vec::with_capacity(k * k * scenario.delays().len());
    for i in 0..k {
        for j in 0..k {
            for &tau in scenario.delays() {
                if i == j && tau == 0 {
                    continue;
                }
                out.push((i, j, tau));
            }
        }
    }
    out
}

/// Synthesized signals toward the desired angles together with the
/// included correlation values.
pub(crate) struct Correlations {
    pub synthesized: Vec<DVector<Complex64>>,
    pub entries: Vec<((usize, usize, usize), Complex64)>,
}

impl Correlations {
    pub fn compute(x: &WaveformMatrix, scenario: &Scenario) -> Self {
        let synthesized: Vec<_> = scenario
            .desired_steering()
            .iter()
            .map(|a| synthesize(x, a))
            .collect();
        let entries = included_entries(scenario)
            .into_iter()
            .map(|(i, j, tau)| {
                let z = lagged_product(&synthesized[i], &synthesized[j], tau);
                ((i, j, tau), z)
            })
            .collect();
        Self { synthesized, entries }
    }

    /// Accumulates `Σ conj(c)·(S_τ y_j) a_iᴴ + c·(S_τᵀ y_i) a_jᴴ` where `c` is
    /// `coeff(z)` for each included entry `z`.
    pub fn gradient<F>(&self, scenario: &Scenario, coeff: F) -> CMat
    where
        F: Fn(Complex64) -> Complex64,
    {
        let n = scenario.samples();
        let k = self.synthesized.len();
        let mut acc = vec![DVector::<Complex64>::zeros(n); k];
        for &((i, j, tau), z) in &self.entries {
            let c = coeff(z);
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let cc = c.conj();
            let (yi, yj) = (&self.synthesized[i], &self.synthesized[j]);
            // (S_τ y_j)[t] = y_j[t + τ]
            for t in 0..n - tau {
                acc[i][t] += cc * yj[t + tau];
            }
            // (S_τᵀ y_i)[t] = y_i[t − τ]
            for t in tau..n {
                acc[j][t] += c * yi[t - tau];
            }
        }
        let mut grad = CMat::zeros(n, scenario.antennas());
        for (w, a) in acc.iter().zip(scenario.desired_steering()) {
            grad += w * a.adjoint();
        }
        grad
    }
}

/// All included correlation entries with their angles.
pub fn correlation_entries(x: &WaveformMatrix, scenario: &Scenario) -> Result<Vec<CorrelationEntry>> {
    check_dims(x, scenario)?;
    let angles = scenario.desired_angles_deg();
    Ok(Correlations::compute(x, scenario)
        .entries
        .into_iter()
        .map(|((i, j, tau), value)| CorrelationEntry {
            theta_i_deg: angles[i],
            theta_j_deg: angles[j],
            tau,
            value,
        })
        .collect())
}

/// `g(X) = Re tr(Xᴴ X Ā)` with the scenario's cached `Ā`.
pub fn g_value(x: &WaveformMatrix, scenario: &Scenario) -> Result<f64> {
    check_dims(x, scenario)?;
    let gram = x.entries().adjoint() * x.entries();
    let a = scenario.combined_matrix();
    // tr(R Ā) = Σ_{pq} R_pq Ā_qp
    let mut acc = 0.0;
    for p in 0..gram.nrows() {
        for q in 0..gram.ncols() {
            acc += (gram[(p, q)] * a[(q, p)]).re;
        }
    }
    Ok(acc)
}

/// `h(X) = ‖c(X)‖₁` over the included correlation entries.
pub fn h_value(x: &WaveformMatrix, scenario: &Scenario) -> Result<f64> {
    check_dims(x, scenario)?;
    Ok(Correlations::compute(x, scenario)
        .entries
        .iter()
        .map(|(_, z)| z.norm())
        .sum())
}

/// `2·X·Ā`.
pub fn grad_g(x: &WaveformMatrix, scenario: &Scenario) -> Result<CMat> {
    check_dims(x, scenario)?;
    Ok(x.entries() * scenario.combined_matrix() * Complex64::new(2.0, 0.0))
}

/// `z/|z|`, or zero at the kink.
fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r < KINK_TOL {
        Complex64::new(0.0, 0.0)
    } else {
        z / r
    }
}

/// Subgradient of `h`; the phase factor `z/|z|` is zero wherever `|z| < 1e-12`.
pub fn subgrad_h(x: &WaveformMatrix, scenario: &Scenario) -> Result<CMat> {
    check_dims(x, scenario)?;
    Ok(Correlations::compute(x, scenario).gradient(scenario, unit_phase))
}

/// Both terms and the weighted total.
pub fn objective(x: &WaveformMatrix, scenario: &Scenario) -> Result<ObjectiveBreakdown> {
    let g = g_value(x, scenario)?;
    let h = h_value(x, scenario)?;
    let w = scenario.weights();
    Ok(ObjectiveBreakdown {
        g_value: g,
        h_value: h,
        total: w.g * g + w.h * h,
    })
}

/// `w_g·∇g + w_h·∂h`.
pub fn euclid_subgrad(x: &WaveformMatrix, scenario: &Scenario) -> Result<CMat> {
    let w = scenario.weights();
    let mut out = CMat::zeros(x.samples(), x.antennas());
    if w.g != 0.0 {
        out += grad_g(x, scenario)? * Complex64::new(w.g, 0.0);
    }
    if w.h != 0.0 {
        out += subgrad_h(x, scenario)? * Complex64::new(w.h, 0.0);
    }
    check_dims(x, scenario)?;
    Ok(out)
}

impl Objective for Scenario {
    fn dims(&self) -> (usize, usize) {
        Scenario::dims(self)
    }

    fn value(&self, x: &WaveformMatrix) -> Result<f64> {
        Ok(objective(x, self)?.total)
    }

    fn euclidean_gradient(&self, x: &WaveformMatrix) -> Result<CMat> {
        euclid_subgrad(x, self)
    }
}

/// Gaussian tail probability `Q(x) = ½·erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Bit error rate of antipodal `±X` signaling toward the comm user,
/// `Q(‖X a_c‖ / σ)`.
pub fn analytic_ber(x: &WaveformMatrix, scenario: &Scenario, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(invalid(format!("noise level sigma must be positive, got {sigma}")));
    }
    check_dims(x, scenario)?;
    let gain = synthesize(x, scenario.comm_steering()).norm();
    Ok(q_function(gain / sigma))
}
