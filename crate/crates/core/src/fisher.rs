//! Fisher information per measured sample and Cramér-Rao bounds.
//!
//! Information is per joint `(x, p)` sample of the output light.

use std::fmt;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gaussian::{rotation, squeeze, ProcessParams};
use crate::interferometer::{NoiseParams, OutputModel, SetupConfig, Topology};

pub const DEFAULT_STEP: f64 = 1e-5;
const RICHARDSON_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherMethod {
    /// Closed form for the simplistic topology, `T₂/(1 + T₂(V−1))`.
    AnalyticSimplistic,
    /// Closed form for the blocked beam, `T₂/(1 − T₂ + T₂((1−T₁)V + T₁))`.
    AnalyticBlocked,
    /// Closed form for the balanced interferometer, `T`.
    AnalyticInterferometric,
    NumericGaussian,
}

impl FisherMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FisherMethod::AnalyticSimplistic => "analytic_simplistic",
            FisherMethod::AnalyticBlocked => "analytic_blocked",
            FisherMethod::AnalyticInterferometric => "analytic_interferometric",
            FisherMethod::NumericGaussian => "numeric_gaussian",
        }
    }
}

/// Process parameter with respect to which information is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    Phi,
    Q,
    Alpha,
    D,
    Beta,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::Phi,
        Parameter::Q,
        Parameter::Alpha,
        Parameter::D,
        Parameter::Beta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Parameter::Phi => "phi",
            Parameter::Q => "q",
            Parameter::Alpha => "alpha",
            Parameter::D => "d",
            Parameter::Beta => "beta",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| invalid(format!("unknown parameter '{name}'")))
    }

    /// Whether errors in this parameter are measured on the circle.
    pub fn is_angle(&self) -> bool {
        matches!(self, Parameter::Phi | Parameter::Alpha | Parameter::Beta)
    }

    pub fn value(&self, p: &ProcessParams) -> f64 {
        match self {
            Parameter::Phi => p.phi,
            Parameter::Q => p.q(),
            Parameter::Alpha => p.alpha,
            Parameter::D => p.d,
            Parameter::Beta => p.beta,
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub value: f64,
    pub parameter: Parameter,
    pub method: FisherMethod,
    /// Contribution of the mean, `∂μᵀΣ⁻¹∂μ`; absent for closed forms.
    pub mean_term: Option<f64>,
    /// Contribution of the covariance, `½·tr[(Σ⁻¹∂Σ)²]`; absent for closed forms.
    pub cov_term: Option<f64>,
}

/// Displacement information of the topology: the closed form where one
/// exists, the numeric Gaussian value for an unbalanced interferometer.
pub fn fisher_displacement(setup: &SetupConfig) -> Result<FisherResult> {
    setup.validate()?;
    let (t1, t2, v) = (setup.t1, setup.t2, setup.v_thermal);
    let (value, method) = match setup.topology {
        Topology::Simplistic => (
            t2 / (1.0 + t2 * (v - 1.0)),
            FisherMethod::AnalyticSimplistic,
        ),
        Topology::BlockedBeam => (
            t2 / (1.0 - t2 + t2 * ((1.0 - t1) * v + t1)),
            FisherMethod::AnalyticBlocked,
        ),
        Topology::Interferometric if t1 == t2 => (t2, FisherMethod::AnalyticInterferometric),
        Topology::Interferometric => {
            let p = ProcessParams::displacement_only(1.0, 0.0)?;
            return fisher_numeric(setup, &p, None, Parameter::D, DEFAULT_STEP);
        }
    };
    Ok(FisherResult {
        value,
        parameter: Parameter::D,
        method,
        mean_term: None,
        cov_term: None,
    })
}

fn perturbed_moments(
    model: &OutputModel,
    setup: &SetupConfig,
    p: &ProcessParams,
    param: Parameter,
    delta: f64,
) -> (Vector2<f64>, Matrix2<f64>) {
    let (mut phi, mut w, mut alpha, mut d, mut beta) = (p.phi, p.w, p.alpha, p.d, p.beta);
    match param {
        Parameter::Phi => phi += delta,
        // q = e^w may step below 1 here; the map is smooth through w = 0
        Parameter::Q => w = (p.q() + delta).ln(),
        Parameter::Alpha => alpha += delta,
        Parameter::D => d += delta,
        Parameter::Beta => beta += delta,
    }
    let b = rotation(phi) * squeeze(w, alpha);
    let disp = Vector2::new(d * beta.cos(), d * beta.sin());
    (model.mean(&b, &disp, &setup.probe_mean()), model.cov(&b))
}

fn fisher_terms(
    model: &OutputModel,
    setup: &SetupConfig,
    p: &ProcessParams,
    param: Parameter,
    h: f64,
) -> Result<(f64, f64)> {
    let (_, s0) = perturbed_moments(model, setup, p, param, 0.0);
    let (mp, sp) = perturbed_moments(model, setup, p, param, h);
    let (mm, sm) = perturbed_moments(model, setup, p, param, -h);
    let inv = s0
        .try_inverse()
        .ok_or_else(|| invalid("output covariance is singular"))?;
    let dm = (mp - mm) / (2.0 * h);
    let ds = (sp - sm) / (2.0 * h);
    let mean_term = (dm.transpose() * inv * dm)[(0, 0)];
    let a = inv * ds;
    let cov_term = 0.5 * (a * a).trace();
    Ok((mean_term, cov_term))
}

/// Fisher information of one joint sample from the Gaussian output model,
/// `I = ∂μᵀΣ⁻¹∂μ + ½·tr[(Σ⁻¹∂Σ)²]`, by central differences with step `step`
/// and a consistency check against step `step/2`.
pub fn fisher_numeric(
    setup: &SetupConfig,
    process: &ProcessParams,
    noise: Option<&NoiseParams>,
    parameter: Parameter,
    step: f64,
) -> Result<FisherResult> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    if parameter == Parameter::Q && process.q() - step <= 0.0 {
        return Err(invalid(
            "finite-difference step exceeds the squeezing magnitude",
        ));
    }
    let model = OutputModel::new(setup, noise)?;
    let (mean_term, cov_term) = fisher_terms(&model, setup, process, parameter, step)?;
    let (fine_mean, fine_cov) = fisher_terms(&model, setup, process, parameter, step / 2.0)?;
    let coarse = mean_term + cov_term;
    let fine = fine_mean + fine_cov;
    let scale = coarse.abs().max(fine.abs());
    if (coarse - fine).abs() > RICHARDSON_TOL * scale && scale > 1e-12 {
        return Err(Error::NumericFailure { coarse, fine });
    }
    debug_assert!(coarse >= -1e-9);
    Ok(FisherResult {
        value: coarse.max(0.0),
        parameter,
        method: FisherMethod::NumericGaussian,
        mean_term: Some(mean_term),
        cov_term: Some(cov_term),
    })
}

/// Cramér-Rao variance bound `1/(n·I)` for `n` independent samples.
pub fn crb(fi: &FisherResult, n: usize) -> Result<f64> {
    if !(fi.value > 0.0) {
        return Err(Error::Unidentifiable(format!(
            "zero Fisher information for {}",
            fi.parameter
        )));
    }
    if n == 0 {
        return Err(invalid("sample count must be positive"));
    }
    Ok(1.0 / (n as f64 * fi.value))
}

/// Phase information of the interferometric and blocked-beam topologies over
/// a grid of phases, and the phases at which their difference changes sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub phi: Vec<f64>,
    pub interferometric: Vec<f64>,
    pub blocked: Vec<f64>,
    /// Sign changes of `interferometric − blocked`, linearly interpolated.
    pub crossings: Vec<f64>,
}

pub fn compare_blocked_vs_interferometric(
    setup: &SetupConfig,
    phi_grid: &[f64],
) -> Result<CrossingReport> {
    let inter = SetupConfig {
        topology: Topology::Interferometric,
        ..*setup
    };
    let blocked = SetupConfig {
        topology: Topology::BlockedBeam,
        ..*setup
    };
    let mut report = CrossingReport {
        phi: phi_grid.to_vec(),
        interferometric: Vec::with_capacity(phi_grid.len()),
        blocked: Vec::with_capacity(phi_grid.len()),
        crossings: Vec::new(),
    };
    for &phi in phi_grid {
        let p = ProcessParams::phase_only(phi)?;
        report
            .interferometric
            .push(fisher_numeric(&inter, &p, None, Parameter::Phi, DEFAULT_STEP)?.value);
        report
            .blocked
            .push(fisher_numeric(&blocked, &p, None, Parameter::Phi, DEFAULT_STEP)?.value);
    }
    let diff: Vec<f64> = report
        .interferometric
        .iter()
        .zip(&report.blocked)
        .map(|(a, b)| a - b)
        .collect();
    for k in 1..diff.len() {
        let (d0, d1) = (diff[k - 1], diff[k]);
        if d0 == 0.0 {
            report.crossings.push(phi_grid[k - 1]);
        } else if d0 * d1 < 0.0 {
            let t = d0 / (d0 - d1);
            report
                .crossings
                .push(phi_grid[k - 1] + t * (phi_grid[k] - phi_grid[k - 1]));
        }
    }
    Ok(report)
}
