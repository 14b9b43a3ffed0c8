//! Phase-space Gaussian states and the channels acting on them.
//!
//! Quadratures are ordered `(x₁, p₁, x₂, p₂, …)` and normalised so that the
//! vacuum has unit variance in every quadrature. A state is physical when all
//! of its symplectic eigenvalues are at least one.

mod polar;
mod process;
mod symplectic;

pub use polar::{polar_decompose_2x2, PolarParts};
pub use process::{rotation, squeeze, ProcessParams};
pub use symplectic::{bs_symplectic, process_symplectic, symplectic_form, SymplecticOp};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{invalid, Result};

/// Tolerance on the physicality check of constructed states.
pub const PHYSICALITY_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Gaussian state of one or two bosonic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from its first two moments, validating shape, symmetry
    /// and physicality.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 || dim > 4 {
            return Err(invalid(format!("mean length {dim} is not 2 or 4")));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(invalid(format!(
                "covariance is {}x{}, expected {dim}x{dim}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("state moments must be finite"));
        }
        check_symmetric(&cov)?;
        let state = Self::from_parts(mean, cov);
        let nu = state.min_symplectic_eigenvalue();
        if nu < 1.0 - PHYSICALITY_TOL {
            return Err(invalid(format!(
                "state violates the uncertainty relation (symplectic eigenvalue {nu})"
            )));
        }
        Ok(state)
    }

    /// Single-mode state from a 2-vector mean and 2×2 covariance.
    pub fn single_mode(mean: Vector2<f64>, cov: Matrix2<f64>) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(mean.as_slice()),
            DMatrix::from_column_slice(2, 2, cov.as_slice()),
        )
    }

    pub(crate) fn from_parts(mean: DVector<f64>, mut cov: DMatrix<f64>) -> Self {
        // exact symmetry after floating point products
        let n = cov.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
        }
        Self { mean, cov }
    }

    pub fn vacuum() -> Self {
        Self::from_parts(DVector::zeros(2), DMatrix::identity(2, 2))
    }

    /// Thermal state with variance `v` in each quadrature.
    pub fn thermal(v: f64) -> Result<Self> {
        if !(v >= 1.0) || !v.is_finite() {
            return Err(invalid(format!("thermal variance must be >= 1, got {v}")));
        }
        Ok(Self::from_parts(
            DVector::zeros(2),
            DMatrix::identity(2, 2) * v,
        ))
    }

    /// Coherent state of amplitude `r` along the phase-space direction `phase`.
    pub fn coherent(r: f64, phase: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() || !phase.is_finite() {
            return Err(invalid(format!(
                "coherent amplitude must be finite and >= 0, got r={r}, phase={phase}"
            )));
        }
        Ok(Self::from_parts(
            DVector::from_vec(vec![r * phase.cos(), r * phase.sin()]),
            DMatrix::identity(2, 2),
        ))
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mode_mean(&self, mode: usize) -> Vector2<f64> {
        Vector2::new(self.mean[2 * mode], self.mean[2 * mode + 1])
    }

    pub fn mode_cov(&self, mode: usize) -> Matrix2<f64> {
        self.cov.fixed_view::<2, 2>(2 * mode, 2 * mode).into_owned()
    }

    /// Product state `self ⊗ other`; the modes of `self` come first.
    pub fn tensor(&self, other: &GaussianState) -> Result<GaussianState> {
        let n = self.mean.len();
        let m = other.mean.len();
        if n + m > 4 {
            return Err(invalid("at most two modes are supported"));
        }
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n + m, n + m);
        cov.view_mut((0, 0), (n, n)).copy_from(&self.cov);
        cov.view_mut((n, n), (m, m)).copy_from(&other.cov);
        Ok(Self::from_parts(mean, cov))
    }

    /// Marginal state of a single mode.
    pub fn reduce(&self, mode: usize) -> Result<GaussianState> {
        self.check_mode(mode)?;
        let mean = self.mode_mean(mode);
        let cov = self.mode_cov(mode);
        Ok(Self::from_parts(
            DVector::from_column_slice(mean.as_slice()),
            DMatrix::from_column_slice(2, 2, cov.as_slice()),
        ))
    }

    /// Applies an affine symplectic map acting on `modes` (in that order).
    pub fn apply(&self, op: &SymplecticOp, modes: &[usize]) -> Result<GaussianState> {
        if op.n_modes() != modes.len() {
            return Err(invalid(format!(
                "operation acts on {} modes but {} were given",
                op.n_modes(),
                modes.len()
            )));
        }
        for (i, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..i].contains(&m) {
                return Err(invalid(format!("mode {m} listed twice")));
            }
        }
        let full = op.embed(self.n_modes(), modes);
        let mean = full.matrix() * &self.mean + full.displacement();
        let cov = full.matrix() * &self.cov * full.matrix().transpose();
        Ok(Self::from_parts(mean, cov))
    }

    /// Symplectic eigenvalues in ascending order.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        match self.n_modes() {
            1 => vec![self.mode_cov(0).determinant().max(0.0).sqrt()],
            _ => {
                let a = self.mode_cov(0).determinant();
                let b = self.mode_cov(1).determinant();
                let c = self.cov.fixed_view::<2, 2>(0, 2).determinant();
                let delta = a + b + 2.0 * c;
                let det = self.cov.determinant();
                let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
                vec![
                    (0.5 * (delta - disc)).max(0.0).sqrt(),
                    (0.5 * (delta + disc)).max(0.0).sqrt(),
                ]
            }
        }
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= 1.0 - PHYSICALITY_TOL
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(invalid(format!(
                "mode {mode} out of range for a {}-mode state",
                self.n_modes()
            )));
        }
        Ok(())
    }
}

fn check_symmetric(cov: &DMatrix<f64>) -> Result<()> {
    let scale = cov.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let n = cov.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(invalid(format!("covariance not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Loss and thermal noise on one mode: mixes it with a thermal bath of
/// variance `v_c` on a beam splitter of transmittance `t_c`.
pub fn loss_channel(
    state: &GaussianState,
    mode: usize,
    t_c: f64,
    v_c: f64,
) -> Result<GaussianState> {
    if !(t_c > 0.0 && t_c <= 1.0) {
        return Err(invalid(format!(
            "loss transmittance must be in (0, 1], got {t_c}"
        )));
    }
    if !(v_c >= 1.0) || !v_c.is_finite() {
        return Err(invalid(format!("noise variance must be >= 1, got {v_c}")));
    }
    state.check_mode(mode)?;
    let k = t_c.sqrt();
    let dim = state.mean.len();
    let mut scale = DMatrix::identity(dim, dim);
    scale[(2 * mode, 2 * mode)] = k;
    scale[(2 * mode + 1, 2 * mode + 1)] = k;
    let mean = &scale * &state.mean;
    let mut cov = &scale * &state.cov * &scale;
    let added = (1.0 - t_c) * v_c;
    cov[(2 * mode, 2 * mode)] += added;
    cov[(2 * mode + 1, 2 * mode + 1)] += added;
    Ok(GaussianState::from_parts(mean, cov))
}

/// Maps a single-mode covariance onto a physical one by isotropic inflation.
///
/// With `ν = √det Σ`, a covariance with `ν ≥ 1` is returned unchanged;
/// otherwise `Σ + (1 − ν)·I` is returned, whose determinant is at least one.
/// Positive semi-definite input is accepted so that degenerate empirical
/// covariances land on the vacuum floor.
pub fn repair_physicality(cov: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(invalid("covariance has non-finite entries"));
    }
    let scale = cov.abs().max().max(1.0);
    if (cov[(0, 1)] - cov[(1, 0)]).abs() > SYMMETRY_TOL * scale {
        return Err(invalid("covariance is not symmetric"));
    }
    let det = cov.determinant();
    if cov[(0, 0)] < 0.0 || cov[(1, 1)] < 0.0 || det < -SYMMETRY_TOL * scale * scale {
        return Err(invalid("covariance is not positive semi-definite"));
    }
    let nu = det.max(0.0).sqrt();
    if nu >= 1.0 {
        return Ok(*cov);
    }
    Ok(cov + Matrix2::identity() * (1.0 - nu))
}
