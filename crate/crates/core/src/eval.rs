//! Evaluation of designed waveforms: beampattern sweeps, normalized
//! correlation profiles, bit error rate curves and the comparison baselines.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::manifold::{random_point, CMat, WaveformMatrix};
use crate::objective::{
    analytic_ber, g_value, lagged_product, synthesize, Correlations, Objective,
};
use crate::scenario::{steering, steering_unchecked, Scenario};
use crate::seed::derive_seed;

/// Output values below this level are clipped.
pub const DB_FLOOR: f64 = -300.0;
/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

fn to_db(power_ratio: f64) -> f64 {
    if power_ratio > 0.0 {
        (10.0 * power_ratio.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

/// Beampattern over the scenario grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub angles_deg: Vec<f64>,
    /// Linear beampattern values.
    pub values: Vec<f64>,
    /// `10·log10` of `values`, clipped at [`DB_FLOOR`].
    pub values_db: Vec<f64>,
}

impl SweepSeries {
    /// dB values relative to the series maximum.
    pub fn peak_normalized_db(&self) -> Vec<f64> {
        let peak = self.values.iter().copied().fold(0.0, f64::max);
        self.values.iter().map(|&v| to_db(v / peak)).collect()
    }

    /// Indices of local maxima (at least as large as both neighbors and
    /// strictly larger than one of them).
    pub fn local_maxima(&self) -> Vec<usize> {
        let v = &self.values;
        (0..v.len())
            .filter(|&i| {
                let left = if i > 0 { v[i - 1] } else { f64::NEG_INFINITY };
                let right = if i + 1 < v.len() { v[i + 1] } else { f64::NEG_INFINITY };
                v[i] >= left && v[i] >= right && (v[i] > left || v[i] > right)
            })
            .collect()
    }

    /// Linear beampattern value at the grid angle nearest `theta_deg`.
    pub fn value_near(&self, theta_deg: f64) -> Option<f64> {
        self.angles_deg
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - theta_deg).abs().total_cmp(&(b.1 - theta_deg).abs()))
            .map(|(i, _)| self.values[i])
    }
}

/// Beampattern of `x` over the scenario's sweep grid.
pub fn beampattern_sweep(x: &WaveformMatrix, scenario: &Scenario) -> Result<SweepSeries> {
    if x.dims() != scenario.dims() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    let angles_deg = scenario.sweep_grid();
    let values: Vec<f64> = angles_deg
        .iter()
        .map(|&t| {
            let a = steering_unchecked(t, scenario.antennas(), scenario.d_over_lambda());
            synthesize(x, &a).norm_squared()
        })
        .collect();
    let values_db = values.iter().map(|&v| to_db(v)).collect();
    Ok(SweepSeries {
        angles_deg,
        values,
        values_db,
    })
}

/// Correlation magnitudes for one ordered angle pair across the delay set.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub theta_i_deg: f64,
    pub theta_j_deg: f64,
    pub taus: Vec<usize>,
    pub magnitudes: Vec<f64>,
    /// `20·log10(|P| / P_peak)`.
    pub values_db: Vec<f64>,
}

impl CorrelationSeries {
    /// Whether the auto-term `(θ, θ, 0)` at position `k` is excluded from the
    /// sidelobe set.
    pub fn is_mainlobe(&self, k: usize) -> bool {
        self.theta_i_deg == self.theta_j_deg && self.taus[k] == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    /// Largest zero-lag auto value over the desired angles.
    pub peak: f64,
    pub series: Vec<CorrelationSeries>,
}

impl CorrelationProfile {
    /// Normalized dB values of the sidelobe entries, i.e. everything except
    /// zero-lag auto terms.
    pub fn sidelobe_db(&self) -> Vec<f64> {
        self.series
            .iter()
            .flat_map(|s| {
                (0..s.taus.len())
                    .filter(move |&k| !s.is_mainlobe(k))
                    .map(move |k| s.values_db[k])
            })
            .collect()
    }

    /// Median of [`Self::sidelobe_db`].
    pub fn median_sidelobe_db(&self) -> Option<f64> {
        median(self.sidelobe_db())
    }

    pub fn max_db(&self) -> f64 {
        self.series
            .iter()
            .flat_map(|s| s.values_db.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// `|P_{θiθj,τ}|` over all desired pairs and delays, normalized to the peak
/// zero-lag auto value.
pub fn correlation_profile(x: &WaveformMatrix, scenario: &Scenario) -> Result<CorrelationProfile> {
    if x.dims() != scenario.dims() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    let angles = scenario.desired_angles_deg();
    let synthesized: Vec<_> = scenario.desired_steering().iter().map(|a| synthesize(x, a)).collect();
    let peak = synthesized.iter().map(|y| y.norm_squared()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::InvalidState(
            "correlation profile needs a nonzero peak beampattern at the desired angles".into(),
        ));
    }
    let mut series = Vec::with_capacity(angles.len() * angles.len());
    for (i, yi) in synthesized.iter().enumerate() {
        for (j, yj) in synthesized.iter().enumerate() {
            let magnitudes: Vec<f64> = scenario
                .delays()
                .iter()
                .map(|&tau| lagged_product(yi, yj, tau).norm())
                .collect();
            let values_db = magnitudes
                .iter()
                .map(|&v| (2.0 * to_db(v / peak)).max(DB_FLOOR))
                .collect();
            series.push(CorrelationSeries {
                theta_i_deg: angles[i],
                theta_j_deg: angles[j],
                taus: scenario.delays().to_vec(),
                magnitudes,
                values_db,
            });
        }
    }
    Ok(CorrelationProfile { peak, series })
}

/// Antipodal symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Plus,
    Minus,
}

impl Symbol {
    pub fn sign(self) -> f64 {
        match self {
            Symbol::Plus => 1.0,
            Symbol::Minus => -1.0,
        }
    }
}

/// Maximum-likelihood decision between `±X` from `y = ±X a_c + n`: the sign of
/// `Re((X a_c)ᴴ y)`, ties resolved to `+1`.
pub fn ml_detect(
    y: &DVector<Complex64>,
    x: &WaveformMatrix,
    theta_c_deg: f64,
    scenario: &Scenario,
) -> Result<Symbol> {
    if y.len() != x.samples() {
        return Err(Error::DimensionMismatch {
            expected: (x.samples(), 1),
            actual: (y.len(), 1),
        });
    }
    if x.antennas() != scenario.antennas() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    let reference = synthesize(x, &steering(theta_c_deg, scenario)?);
    Ok(decide(&reference, y))
}

fn decide(reference: &DVector<Complex64>, y: &DVector<Complex64>) -> Symbol {
    let stat: f64 = reference
        .iter()
        .zip(y.iter())
        .map(|(r, v)| (r.conj() * v).re)
        .sum();
    if stat >= 0.0 {
        Symbol::Plus
    } else {
        Symbol::Minus
    }
}

/// Noise standard deviation for a per-sample SNR in dB.
///
/// SNR is the mean transmitted power per sample over the noise variance,
/// `‖X‖_F² / (N σ²)`; for unimodular waveforms this is `M / σ²`, so all
/// waveforms of the same size are compared at equal transmit power.
pub fn sigma_for_snr_db(x: &WaveformMatrix, snr_db: f64) -> f64 {
    let power_per_sample = x.entries().norm_squared() / x.samples() as f64;
    (power_per_sample / 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors >= trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub snr_points_db: Vec<f64>,
    pub sigma: Vec<f64>,
    pub analytic_ber: Vec<f64>,
    pub mc_ber: Vec<f64>,
    pub errors: Vec<u64>,
    pub mc_trials: u64,
    pub wilson_ci: Vec<(f64, f64)>,
}

/// Monte Carlo bit error rate of the matched-filter detector.
///
/// Trial `t` at SNR point `k` draws from its own stream, so the counts do not
/// depend on how the trials are split across threads.
pub fn ber_monte_carlo(
    x: &WaveformMatrix,
    scenario: &Scenario,
    snr_db_list: &[f64],
    trials: u64,
    seed: u64,
) -> Result<BerCurve> {
    if x.dims() != scenario.dims() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    if trials == 0 {
        return Err(invalid("Monte Carlo run needs at least one trial"));
    }
    let reference = synthesize(x, scenario.comm_steering());
    let n = x.samples();
    let mut curve = BerCurve {
        snr_points_db: snr_db_list.to_vec(),
        sigma: Vec::new(),
        analytic_ber: Vec::new(),
        mc_ber: Vec::new(),
        errors: Vec::new(),
        mc_trials: trials,
        wilson_ci: Vec::new(),
    };
    for (k, &snr_db) in snr_db_list.iter().enumerate() {
        let sigma = sigma_for_snr_db(x, snr_db);
        // σ² per real component: the matched-filter statistic then has noise
        // variance ‖X a_c‖²σ², which is what Q(‖X a_c‖/σ) assumes
        let component_sd = sigma;
        let base = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("ber-point-{k}")));
        let errors: u64 = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = base.clone();
                rng.set_stream(t);
                let symbol = if rng.random::<bool>() { Symbol::Plus } else { Symbol::Minus };
                let s = symbol.sign();
                let y = DVector::from_fn(n, |i, _| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    reference[i] * s + Complex64::new(re, im) * component_sd
                });
                u64::from(decide(&reference, &y) != symbol)
            })
            .sum();
        curve.sigma.push(sigma);
        curve.analytic_ber.push(analytic_ber(x, scenario, sigma)?);
        curve.mc_ber.push(errors as f64 / trials as f64);
        curve.errors.push(errors);
        curve.wilson_ci.push(wilson_interval(errors, trials));
    }
    Ok(curve)
}

/// Smallest SNR (dB) at which `Q(‖X a_c‖/σ)` reaches `target_ber`, found by
/// bisection of the analytic curve.
pub fn snr_db_for_ber(x: &WaveformMatrix, scenario: &Scenario, target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 0.5) {
        return Err(invalid("target BER must lie in (0, 0.5)"));
    }
    let (mut lo, mut hi) = (-200.0f64, 200.0f64);
    let ber_at = |snr_db: f64| analytic_ber(x, scenario, sigma_for_snr_db(x, snr_db));
    if ber_at(hi)? > target_ber {
        return Err(Error::InvalidState("target BER not reachable".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ber_at(mid)? > target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Random-phase comparison waveform with the scenario's dimensions.
pub fn random_baseline(scenario: &Scenario, seed: u64) -> Result<WaveformMatrix> {
    random_point(scenario.samples(), scenario.antennas(), seed)
}

/// Squared ℓ2 norm of the included correlation entries, `Σ |P|²`.
pub fn l2_correlation_term(x: &WaveformMatrix, scenario: &Scenario) -> Result<f64> {
    if x.dims() != scenario.dims() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    Ok(Correlations::compute(x, scenario)
        .entries
        .iter()
        .map(|(_, z)| z.norm_sqr())
        .sum())
}

/// `w_g·g + w_h·Σ|P|²`: the design objective with the ℓ1 correlation penalty
/// replaced by the squared ℓ2 norm.
pub fn l2_variant_objective(x: &WaveformMatrix, scenario: &Scenario) -> Result<f64> {
    let w = scenario.weights();
    Ok(w.g * g_value(x, scenario)? + w.h * l2_correlation_term(x, scenario)?)
}

/// Gradient `2·∂/∂X*` of [`l2_correlation_term`].
pub fn l2_correlation_gradient(x: &WaveformMatrix, scenario: &Scenario) -> Result<CMat> {
    if x.dims() != scenario.dims() {
        return Err(Error::DimensionMismatch {
            expected: scenario.dims(),
            actual: x.dims(),
        });
    }
    Ok(Correlations::compute(x, scenario).gradient(scenario, |z| z * 2.0))
}

/// The ℓ2 comparison objective as a solver input.
#[derive(Debug, Clone, Copy)]
pub struct L2Objective<'a> {
    pub scenario: &'a Scenario,
}

impl Objective for L2Objective<'_> {
    fn dims(&self) -> (usize, usize) {
        self.scenario.dims()
    }

    fn value(&self, x: &WaveformMatrix) -> Result<f64> {
        l2_variant_objective(x, self.scenario)
    }

    fn euclidean_gradient(&self, x: &WaveformMatrix) -> Result<CMat> {
        let w = self.scenario.weights();
        let mut out = crate::objective::grad_g(x, self.scenario)? * Complex64::new(w.g, 0.0);
        out += l2_correlation_gradient(x, self.scenario)? * Complex64::new(w.h, 0.0);
        Ok(out)
    }
}
