//! Nonsmooth gradient sampling on `UM(N, M)`.
//!
//! Each iteration samples subgradients in an `ε`-ball around the iterate,
//! transports them to the iterate's tangent space, takes the minimum-norm
//! element of their convex hull as the descent direction, and backtracks along
//! the retraction. The radius shrinks whenever the direction is tiny or the
//! line search fails to find descent.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::manifold::{
    inner, project, random_tangent_with, real_inner, retract, TangentVector, WaveformMatrix,
};
use crate::minnorm::min_norm_weights;
use crate::objective::Objective;

/// Line search gives up below this step length.
pub const MIN_STEP: f64 = 1e-16;
/// Bounds on the transport scaling `β = ‖η‖ / ‖P_X̂ η‖`.
pub const BETA_RANGE: (f64, f64) = (1.0, 10.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Initial sampling radius.
    pub epsilon0: f64,
    /// Radius multiplier applied on each shrink, in (0, 1).
    pub epsilon_shrink: f64,
    /// Stop once the radius drops below this.
    pub epsilon_min: f64,
    /// Subgradients per iteration, including the one at the iterate.
    pub sample_count: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub alpha0: f64,
    /// Direction norm below which the radius is shrunk.
    pub direction_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon0: 1e-1,
            epsilon_shrink: 0.5,
            epsilon_min: 1e-6,
            sample_count: 10,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            alpha0: 1.0,
            direction_tol: 1e-5,
            max_iters: 5000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.epsilon0) && pos(self.epsilon_min) && self.epsilon_min < self.epsilon0) {
            return Err(invalid("need 0 < epsilon_min < epsilon0"));
        }
        if !unit(self.epsilon_shrink) {
            return Err(invalid("epsilon_shrink must lie in (0, 1)"));
        }
        if !unit(self.armijo_c) {
            return Err(invalid("armijo_c must lie in (0, 1)"));
        }
        if !unit(self.backtrack_factor) {
            return Err(invalid("backtrack_factor must lie in (0, 1)"));
        }
        if !pos(self.alpha0) || !pos(self.direction_tol) {
            return Err(invalid("alpha0 and direction_tol must be positive"));
        }
        if self.sample_count == 0 || self.max_iters == 0 {
            return Err(invalid("sample_count and max_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Transported `ε`-subgradients at one iterate.
#[derive(Debug, Clone)]
pub struct SubgradientSet {
    elements: Vec<TangentVector>,
}

impl SubgradientSet {
    pub fn new(elements: Vec<TangentVector>) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("subgradient set must be nonempty"));
        }
        let dims = elements[0].dims();
        if let Some(bad) = elements.iter().find(|e| e.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: bad.dims(),
            });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[TangentVector] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn gram(&self) -> DMatrix<f64> {
        let k = self.elements.len();
        let mut g = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = real_inner(self.elements[i].entries(), self.elements[j].entries());
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// Minimum-norm element of the convex hull of a [`SubgradientSet`].
#[derive(Debug, Clone)]
pub struct MinNormDirection {
    pub direction: TangentVector,
    pub norm: f64,
    /// Convex weights over the set's elements.
    pub weights: Vec<f64>,
}

/// Draws the sampled `ε`-subdifferential at `x`.
///
/// Element 0 is the Riemannian subgradient at `x`. Each further element comes
/// from a point `X̂ = R_X(η)` with `‖η‖` uniform in `[0, ε]`: the Riemannian
/// subgradient at `X̂` is projected onto `T_X` and divided by the clamped
/// `β = ‖η‖ / ‖P_X̂ η‖`.
pub fn sample_subdifferential<O, R>(
    objective: &O,
    x: &WaveformMatrix,
    epsilon: f64,
    config: &SolverConfig,
    rng: &mut R,
) -> Result<SubgradientSet>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if !(epsilon > 0.0) {
        return Err(invalid(format!("sampling radius must be positive, got {epsilon}")));
    }
    let mut elements = Vec::with_capacity(config.sample_count);
    elements.push(project(x, &objective.euclidean_gradient(x)?)?);
    while elements.len() < config.sample_count {
        let radius = epsilon * rng.random::<f64>();
        if radius <= 0.0 {
            continue;
        }
        let eta = random_tangent_with(x, radius, rng)?;
        let x_hat = match retract(x, &eta) {
            Ok(p) => p,
            Err(Error::SingularRetraction { .. }) => continue,
            Err(e) => return Err(e),
        };
        let transported_eta = project(&x_hat, eta.entries())?.norm();
        let beta = if transported_eta > 0.0 {
            (eta.norm() / transported_eta).clamp(BETA_RANGE.0, BETA_RANGE.1)
        } else {
            BETA_RANGE.1
        };
        let riemannian = project(&x_hat, &objective.euclidean_gradient(&x_hat)?)?;
        let v = project(x, riemannian.entries())?;
        elements.push(v.scale(1.0 / beta));
    }
    SubgradientSet::new(elements)
}

/// Minimum-norm point of `conv W` under the manifold metric.
pub fn min_norm_direction(set: &SubgradientSet) -> MinNormDirection {
    let gram = set.gram();
    let scale = (0..gram.nrows()).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    // relative stopping tolerance on the optimality condition
    let tol = 1e-12 * scale;
    let weights = min_norm_weights(&gram, tol);
    let (n, m) = set.elements[0].dims();
    let mut acc = nalgebra::DMatrix::zeros(n, m);
    for (v, &w) in set.elements.iter().zip(&weights) {
        if w != 0.0 {
            acc += v.entries() * num_complex::Complex64::new(w, 0.0);
        }
    }
    let direction = TangentVector::from_projected(acc);
    let norm = direction.norm();
    MinNormDirection { direction, norm, weights }
}

#[derive(Debug, Clone)]
pub enum LineSearch {
    Accepted {
        alpha: f64,
        x_next: WaveformMatrix,
        f_next: f64,
        trials: usize,
    },
    /// No step above [`MIN_STEP`] satisfied the sufficient-decrease test.
    Stalled { trials: usize },
}

/// Armijo backtracking along `α ↦ R_X(−α p)` starting from `config.alpha0`.
pub fn line_search<O: Objective + ?Sized>(
    objective: &O,
    x: &WaveformMatrix,
    f_x: f64,
    p: &TangentVector,
    config: &SolverConfig,
) -> Result<LineSearch> {
    let pp = inner(p, p)?;
    if !(pp > 0.0) {
        return Err(invalid("line search needs a nonzero direction"));
    }
    let mut alpha = config.alpha0;
    let mut trials = 0;
    while alpha >= MIN_STEP {
        trials += 1;
        match retract(x, &p.scale(-alpha)) {
            Ok(candidate) => {
                let f_c = objective.value(&candidate)?;
                if f_c <= f_x - config.armijo_c * alpha * pp {
                    return Ok(LineSearch::Accepted {
                        alpha,
                        x_next: candidate,
                        f_next: f_c,
                        trials,
                    });
                }
            }
            Err(Error::SingularRetraction { .. }) => {}
            Err(e) => return Err(e),
        }
        alpha *= config.backtrack_factor;
    }
    Ok(LineSearch::Stalled { trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationEvent {
    /// An accepted step.
    Step,
    /// Direction below tolerance; radius shrunk.
    Shrink,
    /// Line search failed; radius shrunk.
    Stall,
}

impl IterationEvent {
    pub fn as_str(&self) -> &'static str {
        match self {
            IterationEvent::Step => "step",
            IterationEvent::Shrink => "shrink",
            IterationEvent::Stall => "stall",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective after this iteration.
    pub objective: f64,
    pub direction_norm: f64,
    /// Accepted step length, zero when no step was taken.
    pub alpha: f64,
    /// Sampling radius used at this iteration.
    pub epsilon: f64,
    pub event: IterationEvent,
    /// Seconds since the solve started.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Stalled,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max-iters",
            SolveStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub initial_objective: f64,
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
}

impl SolveTrace {
    pub fn final_objective(&self) -> f64 {
        self.records
            .last()
            .map(|r| r.objective)
            .unwrap_or(self.initial_objective)
    }

    pub fn accepted_steps(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.event == IterationEvent::Step)
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: WaveformMatrix,
    pub trace: SolveTrace,
}

/// Runs the solver from `x0`.
pub fn solve<O: Objective + ?Sized>(
    x0: &WaveformMatrix,
    objective: &O,
    config: &SolverConfig,
) -> Result<Solution> {
    solve_with_callback(x0, objective, config, |_, _| {})
}

/// As [`solve`], invoking `on_iteration` after every iteration with the
/// record and the minimum-norm certificate data.
pub fn solve_with_callback<O, F>(
    x0: &WaveformMatrix,
    objective: &O,
    config: &SolverConfig,
    mut on_iteration: F,
) -> Result<Solution>
where
    O: Objective + ?Sized,
    F: FnMut(&IterationRecord, &IterationDiagnostics),
{
    config.validate()?;
    if x0.dims() != objective.dims() {
        return Err(Error::DimensionMismatch {
            expected: objective.dims(),
            actual: x0.dims(),
        });
    }
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut x = x0.clone();
    let mut f = objective.value(&x)?;
    let initial_objective = f;
    let mut epsilon = config.epsilon0;
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIters;

    for iteration in 0..config.max_iters {
        let set = sample_subdifferential(objective, &x, epsilon, config, &mut rng)?;
        let mn = min_norm_direction(&set);
        let diagnostics = IterationDiagnostics::new(&set, &mn);
        let used_epsilon = epsilon;

        let (event, alpha) = if mn.norm <= config.direction_tol {
            epsilon *= config.epsilon_shrink;
            (IterationEvent::Shrink, 0.0)
        } else {
            match line_search(objective, &x, f, &mn.direction, config)? {
                LineSearch::Accepted { alpha, x_next, f_next, .. } => {
                    x = x_next;
                    f = f_next;
                    (IterationEvent::Step, alpha)
                }
                LineSearch::Stalled { .. } => {
                    epsilon *= config.epsilon_shrink;
                    (IterationEvent::Stall, 0.0)
                }
            }
        };

        let record = IterationRecord {
            iteration,
            objective: f,
            direction_norm: mn.norm,
            alpha,
            epsilon: used_epsilon,
            event,
            elapsed: started.elapsed().as_secs_f64(),
        };
        on_iteration(&record, &diagnostics);
        records.push(record);

        if epsilon < config.epsilon_min {
            status = match event {
                IterationEvent::Stall => SolveStatus::Stalled,
                _ => SolveStatus::Converged,
            };
            break;
        }
    }

    Ok(Solution {
        x,
        trace: SolveTrace {
            initial_objective,
            records,
            status,
        },
    })
}

/// Per-iteration data for auditing the direction subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiagnostics {
    /// `min_i <p, v_i> − ‖p‖²`; nonnegative up to rounding at the minimum-norm point.
    pub certificate_gap: f64,
    /// Largest `‖v_i‖²`, the scale of the subproblem.
    pub scale: f64,
    pub set_size: usize,
}

impl IterationDiagnostics {
    fn new(set: &SubgradientSet, mn: &MinNormDirection) -> Self {
        let pp = mn.norm * mn.norm;
        let mut min_ip = f64::INFINITY;
        let mut scale: f64 = 0.0;
        for v in set.elements() {
            min_ip = min_ip.min(real_inner(mn.direction.entries(), v.entries()));
            scale = scale.max(real_inner(v.entries(), v.entries()));
        }
        Self {
            certificate_gap: min_ip - pp,
            scale,
            set_size: set.len(),
        }
    }
}
