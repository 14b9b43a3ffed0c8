use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::angle::wrap_pi;
use crate::error::{invalid, Result};

/// Phase-space rotation `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Squeezing by `e^w` along the axis at angle `alpha / 2` and by `e^−w`
/// orthogonally to it.
pub fn squeeze(w: f64, alpha: f64) -> Matrix2<f64> {
    let (s, c) = alpha.sin_cos();
    let ch = w.cosh();
    let sh = w.sinh();
    // R(α/2)·diag(e^w, e^−w)·R(α/2)ᵀ written out to avoid half-angle round-off
    Matrix2::new(ch + sh * c, sh * s, sh * s, ch - sh * c)
}

/// Parameters of the unknown single-mode Gaussian process: squeezing, then
/// a phase rotation, then a displacement.
///
/// Angles are kept folded: `phi`, `alpha` and `beta` in `(−π, π]`. The
/// squeezing axis sits at `alpha / 2`, so `alpha` is 2π-periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub phi: f64,
    pub w: f64,
    pub alpha: f64,
    pub d: f64,
    pub beta: f64,
}

impl ProcessParams {
    pub fn new(phi: f64, w: f64, alpha: f64, d: f64, beta: f64) -> Result<Self> {
        if [phi, w, alpha, d, beta].iter().any(|v| !v.is_finite()) {
            return Err(invalid("process parameters must be finite"));
        }
        if w < 0.0 {
            return Err(invalid(format!("squeezing exponent must be >= 0, got {w}")));
        }
        if d < 0.0 {
            return Err(invalid(format!(
                "displacement magnitude must be >= 0, got {d}"
            )));
        }
        Ok(Self {
            phi: wrap_pi(phi),
            w,
            alpha: wrap_pi(alpha),
            d,
            beta: wrap_pi(beta),
        })
    }

    /// Same as [`ProcessParams::new`] with the squeezing given as `q = e^w ≥ 1`.
    pub fn from_q(phi: f64, q: f64, alpha: f64, d: f64, beta: f64) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(invalid(format!(
                "squeezing magnitude q must be >= 1, got {q}"
            )));
        }
        Self::new(phi, q.ln(), alpha, d, beta)
    }

    pub fn identity() -> Self {
        Self {
            phi: 0.0,
            w: 0.0,
            alpha: 0.0,
            d: 0.0,
            beta: 0.0,
        }
    }

    pub fn phase_only(phi: f64) -> Result<Self> {
        Self::new(phi, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn displacement_only(d: f64, beta: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 0.0, d, beta)
    }

    pub fn q(&self) -> f64 {
        self.w.exp()
    }

    /// Linear part `R(Φ)·Sq(w, α)`.
    pub fn linear(&self) -> Matrix2<f64> {
        rotation(self.phi) * squeeze(self.w, self.alpha)
    }

    pub fn displacement(&self) -> Vector2<f64> {
        Vector2::new(self.d * self.beta.cos(), self.d * self.beta.sin())
    }
}
