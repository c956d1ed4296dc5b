//! On-disk formats: scenario JSON, waveform CSV, run manifests and the CSV
//! series written by the command-line tool.
//!
//! Every parser here accepts untrusted text and reports problems as
//! [`Error::Parse`] rather than panicking.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{BerCurve, CorrelationProfile, SweepSeries};
use crate::manifold::{CMat, WaveformMatrix};
use crate::scenario::{Scenario, ScenarioParams, TermWeights};
use crate::solver::{SolveTrace, SolverConfig};

/// Largest modulus deviation accepted when reading a waveform; entries outside
/// the in-memory tolerance are renormalized onto the unit circle.
pub const WAVEFORM_MODULUS_TOL: f64 = 1e-6;
/// Upper bound on `n·m` accepted from files.
pub const MAX_WAVEFORM_ENTRIES: usize = 1 << 24;
/// Upper bound on `180 / grid_step_deg` accepted from files.
pub const MAX_GRID_POINTS: f64 = 1e6;
/// Upper bound on `m` accepted from files; the cached `M × M` angle matrix
/// costs `grid points · m²` to build.
pub const MAX_ANTENNAS: usize = 1024;

/// Delay set as written in a scenario file: an explicit list, or an inclusive
/// range `{"range": [lo, hi]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DelaySpec {
    List(Vec<usize>),
    Range { range: [usize; 2] },
}

impl DelaySpec {
    pub fn expand(&self) -> Result<Vec<usize>> {
        match self {
            DelaySpec::List(v) => Ok(v.clone()),
            DelaySpec::Range { range: [lo, hi] } => {
                if lo > hi {
                    return Err(Error::Parse(format!("delays: empty range [{lo}, {hi}]")));
                }
                if hi - lo > MAX_WAVEFORM_ENTRIES {
                    return Err(Error::Parse("delays: range too large".into()));
                }
                Ok((*lo..=*hi).collect())
            }
        }
    }

    fn compact(delays: &[usize]) -> Self {
        let contiguous = delays.len() > 2 && delays.windows(2).all(|w| w[1] == w[0] + 1);
        if contiguous {
            DelaySpec::Range {
                range: [delays[0], delays[delays.len() - 1]],
            }
        } else {
            DelaySpec::List(delays.to_vec())
        }
    }
}

/// Serialized form of a [`Scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub m: usize,
    pub n: usize,
    pub d_over_lambda: f64,
    pub grid_step_deg: f64,
    pub desired_angles_deg: Vec<f64>,
    pub comm_angle_deg: f64,
    pub delays: DelaySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mainlobe_halfwidth_deg: Option<f64>,
    #[serde(default)]
    pub weights: TermWeights,
    #[serde(default)]
    pub include_endpoints: bool,
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        let p = s.params();
        Self {
            m: p.antennas,
            n: p.samples,
            d_over_lambda: p.d_over_lambda,
            grid_step_deg: p.grid_step_deg,
            desired_angles_deg: p.desired_angles_deg.clone(),
            comm_angle_deg: p.comm_angle_deg,
            delays: DelaySpec::compact(&p.delays),
            mainlobe_halfwidth_deg: Some(s.mainlobe_halfwidth_deg()),
            weights: p.weights,
            include_endpoints: p.include_endpoints,
        }
    }

    pub fn into_scenario(self) -> Result<Scenario> {
        if self.m.saturating_mul(self.n) > MAX_WAVEFORM_ENTRIES {
            return Err(Error::Parse("m, n: waveform size exceeds supported limit".into()));
        }
        if self.m > MAX_ANTENNAS {
            return Err(Error::Parse(format!("m: at most {MAX_ANTENNAS} antennas supported")));
        }
        if self.grid_step_deg > 0.0 && 180.0 / self.grid_step_deg > MAX_GRID_POINTS {
            return Err(Error::Parse("grid_step_deg: grid is too fine".into()));
        }
        let delays = self.delays.expand()?;
        Scenario::new(ScenarioParams {
            antennas: self.m,
            samples: self.n,
            d_over_lambda: self.d_over_lambda,
            grid_step_deg: self.grid_step_deg,
            desired_angles_deg: self.desired_angles_deg,
            comm_angle_deg: self.comm_angle_deg,
            delays,
            mainlobe_halfwidth_deg: self.mainlobe_halfwidth_deg,
            weights: self.weights,
            include_endpoints: self.include_endpoints,
        })
    }
}

/// Parses and validates a scenario JSON document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
    file.into_scenario().map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Parse(msg),
        other => other,
    })
}

/// Canonical pretty-printed JSON for a scenario.
pub fn scenario_to_json(s: &Scenario) -> String {
    let mut out = serde_json::to_string_pretty(&ScenarioFile::from_scenario(s))
        .expect("scenario serializes");
    out.push('\n');
    out
}

/// Hex SHA-256 of the canonical scenario JSON.
pub fn scenario_hash(s: &Scenario) -> String {
    sha256_hex(scenario_to_json(s).as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn comment_block(comments: &[String]) -> String {
    comments.iter().map(|c| format!("# {c}\n")).collect()
}

/// Writes a waveform as CSV: comment lines, a `dims,N,M` header row, then `N`
/// rows of `re_1,im_1,…,re_M,im_M` with 17 significant digits.
pub fn waveform_to_csv(x: &WaveformMatrix, comments: &[String]) -> String {
    let (n, m) = x.dims();
    let mut out = comment_block(comments);
    let _ = writeln!(out, "dims,{n},{m}");
    for r in 0..n {
        let row: Vec<String> = (0..m)
            .flat_map(|c| {
                let z = x.entries()[(r, c)];
                [fmt_f64(z.re), fmt_f64(z.im)]
            })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses the waveform CSV written by [`waveform_to_csv`].
pub fn parse_waveform(text: &str) -> Result<WaveformMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("waveform: missing `dims,N,M` header row".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if fields.len() != 3 || fields[0] != "dims" {
        return Err(Error::Parse(format!(
            "waveform line {hline}: expected `dims,N,M` header row"
        )));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("waveform line {hline}: bad dimension `{s}`")))
    };
    let (n, m) = (parse_dim(fields[1])?, parse_dim(fields[2])?);
    if n == 0 || m == 0 || n.saturating_mul(m) > MAX_WAVEFORM_ENTRIES {
        return Err(Error::Parse(format!(
            "waveform line {hline}: unsupported dimensions {n} x {m}"
        )));
    }

    let mut entries = CMat::zeros(n, m);
    let mut rows = 0usize;
    for (lineno, line) in lines {
        if rows == n {
            return Err(Error::Parse(format!(
                "waveform line {lineno}: more than {n} data rows"
            )));
        }
        let values: Vec<&str> = line.split(',').map(str::trim).collect();
        if values.len() != 2 * m {
            return Err(Error::Parse(format!(
                "waveform line {lineno}: expected {} values, found {}",
                2 * m,
                values.len()
            )));
        }
        for c in 0..m {
            let re = parse_value(values[2 * c], lineno)?;
            let im = parse_value(values[2 * c + 1], lineno)?;
            let z = Complex64::new(re, im);
            let modulus = z.norm();
            if (modulus - 1.0).abs() > WAVEFORM_MODULUS_TOL {
                return Err(Error::Parse(format!(
                    "waveform line {lineno}: antenna {c} has modulus {modulus}, expected 1"
                )));
            }
            entries[(rows, c)] = if (modulus - 1.0).abs() <= crate::manifold::UNIT_MODULUS_TOL {
                z
            } else {
                z / modulus
            };
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!(
            "waveform: header declares {n} rows, found {rows}"
        )));
    }
    WaveformMatrix::new(entries).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_value(s: &str, lineno: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("waveform line {lineno}: bad number `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("waveform line {lineno}: non-finite value")));
    }
    Ok(v)
}

/// Solver trace as CSV. Wall-clock time is left out so the file is reproducible.
pub fn trace_to_csv(trace: &SolveTrace, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    let _ = writeln!(out, "# status {}", trace.status.as_str());
    let _ = writeln!(out, "# initial_objective {}", fmt_f64(trace.initial_objective));
    out.push_str("iteration,objective,direction_norm,alpha,epsilon,event\n");
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration,
            fmt_f64(r.objective),
            fmt_f64(r.direction_norm),
            fmt_f64(r.alpha),
            fmt_f64(r.epsilon),
            r.event.as_str()
        );
    }
    out
}

pub fn sweep_to_csv(sweep: &SweepSeries, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    out.push_str("angle_deg,beampattern,beampattern_db,normalized_db\n");
    for ((a, v), (db, ndb)) in sweep
        .angles_deg
        .iter()
        .zip(&sweep.values)
        .zip(sweep.values_db.iter().zip(sweep.peak_normalized_db()))
    {
        let _ = writeln!(out, "{a:.6},{},{},{}", fmt_f64(*v), fmt_f64(*db), fmt_f64(ndb));
    }
    out
}

pub fn profile_to_csv(profile: &CorrelationProfile, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    let _ = writeln!(out, "# peak {}", fmt_f64(profile.peak));
    out.push_str("theta_i_deg,theta_j_deg,tau,magnitude,normalized_db,sidelobe\n");
    for s in &profile.series {
        for k in 0..s.taus.len() {
            let _ = writeln!(
                out,
                "{:.6},{:.6},{},{},{},{}",
                s.theta_i_deg,
                s.theta_j_deg,
                s.taus[k],
                fmt_f64(s.magnitudes[k]),
                fmt_f64(s.values_db[k]),
                u8::from(!s.is_mainlobe(k))
            );
        }
    }
    out
}

pub fn ber_to_csv(curve: &BerCurve, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    let _ = writeln!(out, "# trials {}", curve.mc_trials);
    out.push_str("snr_db,analytic,mc,ci_lo,ci_hi\n");
    for k in 0..curve.snr_points_db.len() {
        let (lo, hi) = curve.wilson_ci[k];
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(curve.snr_points_db[k]),
            fmt_f64(curve.analytic_ber[k]),
            fmt_f64(curve.mc_ber[k]),
            fmt_f64(lo),
            fmt_f64(hi)
        );
    }
    out
}

/// Solver settings as recorded in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfigRecord {
    pub epsilon0: f64,
    pub epsilon_shrink: f64,
    pub epsilon_min: f64,
    pub sample_count: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub alpha0: f64,
    pub direction_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl From<&SolverConfig> for SolverConfigRecord {
    fn from(c: &SolverConfig) -> Self {
        Self {
            epsilon0: c.epsilon0,
            epsilon_shrink: c.epsilon_shrink,
            epsilon_min: c.epsilon_min,
            sample_count: c.sample_count,
            armijo_c: c.armijo_c,
            backtrack_factor: c.backtrack_factor,
            alpha0: c.alpha0,
            direction_tol: c.direction_tol,
            max_iters: c.max_iters,
            seed: c.seed,
        }
    }
}

/// What was run and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub scenario_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_waveform_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfigRecord>,
    pub seed: u64,
    /// Extra deterministic settings (trials, SNR list, baseline kind, ...).
    #[serde(default)]
    pub settings: serde_json::Map<String, serde_json::Value>,
    pub outputs: Vec<String>,
    pub wall_clock_secs: f64,
}

impl RunManifest {
    /// Hash over everything except wall-clock time; identical for identical runs.
    pub fn identity_hash(&self) -> String {
        let mut copy = self.clone();
        copy.wall_clock_secs = 0.0;
        copy.outputs.clear();
        sha256_hex(serde_json::to_string(&copy).expect("manifest serializes").as_bytes())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn parse_manifest(text: &str) -> Result<RunManifest> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
}
