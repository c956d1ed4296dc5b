//! Array geometry, angle sets and delay set that fully determine the design
//! objective.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::manifold::CMat;

/// Complex steering vector of an `M`-element uniform linear array.
pub type SteeringVector = DVector<Complex64>;

const ALIGN_TOL: f64 = 1e-6;

/// Relative weights of the beampattern term `g` and the correlation term `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermWeights {
    pub g: f64,
    pub h: f64,
}

impl Default for TermWeights {
    fn default() -> Self {
        Self { g: 1.0, h: 1.0 }
    }
}

/// Plain description of a scenario, before validation and caching.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub antennas: usize,
    pub samples: usize,
    pub d_over_lambda: f64,
    pub grid_step_deg: f64,
    pub desired_angles_deg: Vec<f64>,
    pub comm_angle_deg: f64,
    pub delays: Vec<usize>,
    /// Defaults to twice the grid step when `None`.
    pub mainlobe_halfwidth_deg: Option<f64>,
    pub weights: TermWeights,
    pub include_endpoints: bool,
}

impl ScenarioParams {
    /// The simulation setup used for the reference figures: 8 antennas, 128
    /// samples, half-wavelength spacing, targets at −30° and 40°, user at −60°,
    /// delays 0..=16 and a 0.1° grid.
    pub fn reference() -> Self {
        Self {
            antennas: 8,
            samples: 128,
            d_over_lambda: 0.5,
            grid_step_deg: 0.1,
            desired_angles_deg: vec![-30.0, 40.0],
            comm_angle_deg: -60.0,
            delays: (0..=16).collect(),
            mainlobe_halfwidth_deg: None,
            weights: TermWeights::default(),
            include_endpoints: false,
        }
    }
}

/// A validated scenario with its precombined beampattern matrix.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Scenario {
    params: ScenarioParams,
    mainlobe_halfwidth_deg: f64,
    suppressed_deg: Vec<f64>,
    desired_steering: Vec<SteeringVector>,
    comm_steering: SteeringVector,
    /// `Σ_{suppressed} a aᴴ − Σ_{desired ∪ comm} a aᴴ`
    combined: CMat,
}

/// Steering vector `a_θ[m] = exp(j·2π·(d/λ)·m·sin θ)` without range checks.
pub(crate) fn steering_unchecked(theta_deg: f64, antennas: usize, d_over_lambda: f64) -> SteeringVector {
    let phase = std::f64::consts::TAU * d_over_lambda * theta_deg.to_radians().sin();
    DVector::from_fn(antennas, |m, _| Complex64::from_polar(1.0, phase * m as f64))
}

fn check_open_angle(theta_deg: f64, what: &str) -> Result<()> {
    if !(theta_deg > -90.0 && theta_deg < 90.0) {
        return Err(invalid(format!(
            "{what} {theta_deg} deg is outside the open interval (-90, 90)"
        )));
    }
    Ok(())
}

/// Angle grid `{-90 + k·step}`; interior points only unless `include_endpoints`.
pub fn angle_grid(step_deg: f64, include_endpoints: bool) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || !step_deg.is_finite() {
        return Err(invalid(format!("grid_step_deg: must be positive, got {step_deg}")));
    }
    let intervals = 180.0 / step_deg;
    let count = intervals.round();
    if (intervals - count).abs() > ALIGN_TOL || count < 2.0 {
        return Err(invalid(format!(
            "grid_step_deg: {step_deg} deg must divide 180 deg into at least two intervals"
        )));
    }
    let count = count as usize;
    let range = if include_endpoints { 0..=count } else { 1..=count - 1 };
    Ok(range.map(|k| k as f64 * step_deg - 90.0).collect())
}

impl Scenario {
    pub fn new(params: ScenarioParams) -> Result<Self> {
        if params.antennas == 0 || params.samples == 0 {
            return Err(invalid("m and n: antenna and sample counts must be >= 1"));
        }
        if !(params.d_over_lambda > 0.0) || !params.d_over_lambda.is_finite() {
            return Err(invalid("d_over_lambda: must be positive"));
        }
        let grid = angle_grid(params.grid_step_deg, false)?;
        let step = params.grid_step_deg;

        let mut special = params.desired_angles_deg.clone();
        special.push(params.comm_angle_deg);
        for (i, &theta) in special.iter().enumerate() {
            let what = if i + 1 == special.len() { "comm_angle_deg:" } else { "desired_angles_deg:" };
            check_open_angle(theta, what)?;
            let k = (theta + 90.0) / step;
            if (k - k.round()).abs() > ALIGN_TOL {
                return Err(invalid(format!(
                    "{what} {theta} deg is not aligned to the {step} deg grid"
                )));
            }
            if special[..i].iter().any(|&o| (o - theta).abs() < step * 0.5) {
                return Err(invalid(format!("{what} {theta} deg is repeated")));
            }
        }

        let mut delays = params.delays.clone();
        delays.sort_unstable();
        delays.dedup();
        if delays.is_empty() {
            return Err(invalid("delays: must contain at least one value"));
        }
        if let Some(&bad) = delays.iter().find(|&&t| t >= params.samples) {
            return Err(invalid(format!(
                "delays: delay {bad} must be at most n - 1 = {}",
                params.samples - 1
            )));
        }

        let halfwidth = params.mainlobe_halfwidth_deg.unwrap_or(2.0 * step);
        if !(halfwidth >= 0.0) || !halfwidth.is_finite() {
            return Err(invalid("mainlobe_halfwidth_deg: must be >= 0"));
        }
        let w = params.weights;
        if !(w.g >= 0.0 && w.h >= 0.0 && w.g.is_finite() && w.h.is_finite()) {
            return Err(invalid("weights: must be finite and non-negative"));
        }

        let guard = halfwidth + ALIGN_TOL;
        let suppressed_deg: Vec<f64> = grid
            .into_iter()
            .filter(|t| special.iter().all(|s| (t - s).abs() > guard))
            .collect();

        let m = params.antennas;
        let dl = params.d_over_lambda;
        let desired_steering: Vec<_> = params
            .desired_angles_deg
            .iter()
            .map(|&t| steering_unchecked(t, m, dl))
            .collect();
        let comm_steering = steering_unchecked(params.comm_angle_deg, m, dl);

        let mut combined = CMat::zeros(m, m);
        for &t in &suppressed_deg {
            let a = steering_unchecked(t, m, dl);
            combined += &a * a.adjoint();
        }
        for a in desired_steering.iter().chain(std::iter::once(&comm_steering)) {
            combined -= a * a.adjoint();
        }

        let params = ScenarioParams { delays, ..params };
        Ok(Self {
            params,
            mainlobe_halfwidth_deg: halfwidth,
            suppressed_deg,
            desired_steering,
            comm_steering,
            combined,
        })
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn antennas(&self) -> usize {
        self.params.antennas
    }

    pub fn samples(&self) -> usize {
        self.params.samples
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.params.samples, self.params.antennas)
    }

    pub fn d_over_lambda(&self) -> f64 {
        self.params.d_over_lambda
    }

    pub fn desired_angles_deg(&self) -> &[f64] {
        &self.params.desired_angles_deg
    }

    pub fn comm_angle_deg(&self) -> f64 {
        self.params.comm_angle_deg
    }

    /// Sorted, deduplicated delay set.
    pub fn delays(&self) -> &[usize] {
        &self.params.delays
    }

    pub fn weights(&self) -> TermWeights {
        self.params.weights
    }

    pub fn mainlobe_halfwidth_deg(&self) -> f64 {
        self.mainlobe_halfwidth_deg
    }

    /// Grid angles whose beampattern is suppressed.
    pub fn suppressed_angles_deg(&self) -> &[f64] {
        &self.suppressed_deg
    }

    /// Desired angles followed by the comm angle.
    pub fn emphasized_angles_deg(&self) -> Vec<f64> {
        let mut out = self.params.desired_angles_deg.clone();
        out.push(self.params.comm_angle_deg);
        out
    }

    /// Output grid for sweeps, honoring `include_endpoints`.
    pub fn sweep_grid(&self) -> Vec<f64> {
        angle_grid(self.params.grid_step_deg, self.params.include_endpoints)
            .expect("grid validated at construction")
    }

    pub fn desired_steering(&self) -> &[SteeringVector] {
        &self.desired_steering
    }

    pub fn comm_steering(&self) -> &SteeringVector {
        &self.comm_steering
    }

    /// The cached Hermitian `M × M` matrix `Ā`.
    pub fn combined_matrix(&self) -> &CMat {
        &self.combined
    }

    /// A copy of this scenario with different term weights.
    pub fn with_weights(&self, weights: TermWeights) -> Result<Self> {
        let mut s = self.clone();
        if !(weights.g >= 0.0 && weights.h >= 0.0 && weights.g.is_finite() && weights.h.is_finite()) {
            return Err(invalid("weights: must be finite and non-negative"));
        }
        s.params.weights = weights;
        Ok(s)
    }
}

/// Steering vector of the scenario's array toward `theta_deg`.
pub fn steering(theta_deg: f64, scenario: &Scenario) -> Result<SteeringVector> {
    check_open_angle(theta_deg, "steering angle")?;
    Ok(steering_unchecked(theta_deg, scenario.antennas(), scenario.d_over_lambda()))
}
