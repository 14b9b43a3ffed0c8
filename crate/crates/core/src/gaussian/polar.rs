use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::angle::wrap_pi;
use crate::error::{Error, Result};

/// Result of splitting a 2×2 matrix as `R(Φ)·S` with `S` symmetric positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarParts {
    pub phi: f64,
    /// `ln` of the largest singular value.
    pub w: f64,
    pub alpha: f64,
    /// False when `S` is isotropic and the squeezing axis carries no meaning;
    /// `alpha` is then reported as 0.
    pub axis_defined: bool,
    /// Smallest singular value; equals `e^−w` for a unimodular input.
    pub minor: f64,
}

/// Polar decomposition of a 2×2 matrix with positive determinant into the
/// rotation and squeezing conventions of [`super::process_symplectic`].
///
/// Any real 2×2 matrix splits into a conformal part `ρc·R(Φ)` and an
/// anticonformal part `ρa·R(Φ)·Refl(α)`. With `det B > 0` we have `ρc > ρa`,
/// the orthogonal polar factor is `R(Φ)`, and the positive factor has
/// eigenvalues `ρc ± ρa` with its major axis at `α/2`.
pub fn polar_decompose_2x2(b: &Matrix2<f64>) -> Result<PolarParts> {
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::DecompositionFailed(
            "matrix has non-finite entries".into(),
        ));
    }
    let det = b.determinant();
    if !(det > 0.0) {
        return Err(Error::DecompositionFailed(format!(
            "determinant {det:.3e} is not positive"
        )));
    }
    let e = 0.5 * (b[(0, 0)] + b[(1, 1)]);
    let f = 0.5 * (b[(1, 0)] - b[(0, 1)]);
    let g = 0.5 * (b[(0, 0)] - b[(1, 1)]);
    let h = 0.5 * (b[(0, 1)] + b[(1, 0)]);
    let rho_c = e.hypot(f);
    let rho_a = g.hypot(h);
    let phi = f.atan2(e);
    let major = rho_c + rho_a;
    let w = major.ln().max(0.0);
    let axis_defined = rho_a > 1e-14 * rho_c;
    let alpha = if axis_defined {
        wrap_pi(h.atan2(g) - phi)
    } else {
        0.0
    };
    Ok(PolarParts {
        phi: wrap_pi(phi),
        w,
        alpha,
        axis_defined,
        minor: rho_c - rho_a,
    })
}
