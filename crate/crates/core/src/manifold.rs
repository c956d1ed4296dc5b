//! The unit-modulus manifold `UM(N, M)`: complex `N × M` matrices whose every
//! entry lies on the unit circle.
//!
//! The manifold is a product of `N·M` circles, so every operator acts
//! elementwise:
//!
//! ```text
//! tangent space   T_X = { ξ : Re(ξ ∘ X*) = 0 }
//! metric          <ξ, η> = Re tr(ξᴴ η)
//! projection      P_X ξ = ξ − Re(ξ ∘ X*) ∘ X
//! retraction      R_X(ξ) = (X + ξ) ∘ 1/|X + ξ|
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Dense complex matrix used for points, tangent vectors and Euclidean gradients.
pub type CMat = DMatrix<Complex64>;

/// Modulus tolerance for points on the manifold.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;
/// Tolerance on `Re(ξ ∘ X*)` for tangent vectors.
pub const TANGENCY_TOL: f64 = 1e-10;
/// Below this modulus the retraction normalization is undefined.
pub const SINGULAR_RETRACTION_TOL: f64 = 1e-14;

/// A point of `UM(N, M)`. Row `n` is time sample `n`, column `m` is antenna `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix {
    entries: CMat,
}

impl WaveformMatrix {
    /// Wraps `entries` after checking the unit-modulus constraint.
    pub fn new(entries: CMat) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(invalid("waveform must have N >= 1 and M >= 1"));
        }
        for (idx, z) in entries.iter().enumerate() {
            let dev = (z.norm() - 1.0).abs();
            if !dev.is_finite() || dev > UNIT_MODULUS_TOL {
                let (row, col) = (idx % entries.nrows(), idx / entries.nrows());
                return Err(invalid(format!(
                    "entry ({row}, {col}) has modulus {} (must be 1)",
                    z.norm()
                )));
            }
        }
        Ok(Self { entries })
    }

    /// Builds a waveform from phases in radians, `phases[(n, m)]`.
    pub fn from_phases(phases: &DMatrix<f64>) -> Result<Self> {
        Self::new(phases.map(|p| Complex64::from_polar(1.0, p)))
    }

    /// Every entry equal to one.
    pub fn ones(n: usize, m: usize) -> Result<Self> {
        Self::new(CMat::from_element(n, m, Complex64::new(1.0, 0.0)))
    }

    /// Number of time samples `N`.
    pub fn samples(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of antennas `M`.
    pub fn antennas(&self) -> usize {
        self.entries.ncols()
    }

    /// `(N, M)`.
    pub fn dims(&self) -> (usize, usize) {
        self.entries.shape()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    /// Multiplies every entry by `e^{jφ}`, which stays on the manifold.
    pub fn rotate_phase(&self, phi: f64) -> Self {
        let w = Complex64::from_polar(1.0, phi);
        Self {
            entries: self.entries.map(|z| z * w),
        }
    }

    /// Largest `| |x| − 1 |` over the entries.
    pub fn max_modulus_deviation(&self) -> f64 {
        max_modulus_deviation(&self.entries)
    }
}

pub(crate) fn max_modulus_deviation(entries: &CMat) -> f64 {
    entries
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// A tangent vector at some point of `UM(N, M)`.
///
/// The base point is not stored; operators that take a tangent vector also
/// take the point and check dimensions against it.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    entries: CMat,
}

impl TangentVector {
    /// Wraps `entries` after checking tangency at `base`.
    pub fn new(base: &WaveformMatrix, entries: CMat) -> Result<Self> {
        check_dims(base.dims(), entries.shape())?;
        let residual = tangency_residual(base, &entries);
        if residual > TANGENCY_TOL {
            return Err(invalid(format!(
                "matrix is not tangent at the base point (max |Re(xi conj(x))| = {residual:e})"
            )));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            entries: CMat::zeros(n, m),
        }
    }

    pub(crate) fn from_projected(entries: CMat) -> Self {
        Self { entries }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.entries.shape()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn into_entries(self) -> CMat {
        self.entries
    }

    /// Norm induced by [`inner`].
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.map(|z| z * s),
        }
    }

    /// `Re(ξ ∘ X*)` residual at `base`.
    pub fn tangency_residual(&self, base: &WaveformMatrix) -> f64 {
        tangency_residual(base, &self.entries)
    }
}

fn tangency_residual(base: &WaveformMatrix, entries: &CMat) -> f64 {
    entries
        .iter()
        .zip(base.entries.iter())
        .map(|(xi, x)| (xi * x.conj()).re.abs())
        .fold(0.0, f64::max)
}

fn check_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Real inner product `Re tr(Aᴴ B)` on complex matrices of equal shape.
pub(crate) fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Riemannian metric `<ξ, η> = Re Σ conj(ξ)·η`.
pub fn inner(xi: &TangentVector, eta: &TangentVector) -> Result<f64> {
    check_dims(xi.dims(), eta.dims())?;
    Ok(real_inner(&xi.entries, &eta.entries))
}

/// Orthogonal projection of an arbitrary matrix onto `T_X`.
pub fn project(x: &WaveformMatrix, xi: &CMat) -> Result<TangentVector> {
    check_dims(x.dims(), xi.shape())?;
    let mut out = xi.clone();
    for (o, p) in out.iter_mut().zip(x.entries.iter()) {
        let normal = (*o * p.conj()).re;
        *o -= p * normal;
    }
    Ok(TangentVector { entries: out })
}

/// Riemannian gradient from a Euclidean gradient (`2·∂f/∂X*`).
pub fn rgrad(x: &WaveformMatrix, egrad: &CMat) -> Result<TangentVector> {
    project(x, egrad)
}

/// Elementwise-normalization retraction `R_X(ξ) = (X + ξ) ∘ 1/|X + ξ|`.
pub fn retract(x: &WaveformMatrix, xi: &TangentVector) -> Result<WaveformMatrix> {
    check_dims(x.dims(), xi.dims())?;
    let n = x.samples();
    let mut out = x.entries.clone();
    for (idx, (o, d)) in out.iter_mut().zip(xi.entries.iter()).enumerate() {
        let sum = *o + d;
        let modulus = sum.norm();
        if !(modulus >= SINGULAR_RETRACTION_TOL) {
            return Err(Error::SingularRetraction {
                row: idx % n,
                col: idx / n,
                modulus,
            });
        }
        *o = sum / modulus;
    }
    Ok(WaveformMatrix { entries: out })
}

/// Uniform random phases, deterministic per `seed`.
pub fn random_point(n: usize, m: usize, seed: u64) -> Result<WaveformMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_point_with(n, m, &mut rng)
}

/// Uniform random phases drawn from a caller-owned generator.
pub fn random_point_with<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<WaveformMatrix> {
    if n == 0 || m == 0 {
        return Err(invalid("random_point requires N >= 1 and M >= 1"));
    }
    let entries = CMat::from_fn(n, m, |_, _| {
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(1.0, phase)
    });
    Ok(WaveformMatrix { entries })
}

/// Random tangent vector at `x` with norm exactly `norm` and uniformly
/// distributed direction.
pub fn random_tangent(x: &WaveformMatrix, norm: f64, seed: u64) -> Result<TangentVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tangent_with(x, norm, &mut rng)
}

/// As [`random_tangent`], drawing from a caller-owned generator.
pub fn random_tangent_with<R: Rng + ?Sized>(
    x: &WaveformMatrix,
    norm: f64,
    rng: &mut R,
) -> Result<TangentVector> {
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid(format!("tangent norm must be positive, got {norm}")));
    }
    let (n, m) = x.dims();
    loop {
        let gauss = CMat::from_fn(n, m, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let t = project(x, &gauss)?;
        let len = t.norm();
        if len > 1e-300 {
            return Ok(t.scale(norm / len));
        }
    }
}
