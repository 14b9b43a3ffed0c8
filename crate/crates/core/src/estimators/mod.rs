//! Estimators of the unknown process from measured light moments.
//!
//! Every estimator takes the decoherence channel it should assume. Passing
//! `None` assumes the ideal channel, which is how the naive variants are
//! produced.

mod combine;
mod general;
mod phase;

use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Diagnostics, Error, Result};
use crate::gaussian::ProcessParams;
use crate::interferometer::{NoiseParams, OutputModel, SetupConfig};
use crate::measurement::MomentEstimate;

pub use combine::{attach_jackknife, est_combined, jackknife_key};
pub use general::{
    est_general_cov, est_general_cov_near, est_general_mean, est_noise, NoiseEstimate,
};
pub use phase::{
    est_phase_mean, est_phase_ml, est_phase_ml_from_groups, est_phase_var, phase_uv, UvCoefficients,
};

/// Below this squeezing exponent the squeezing axis is reported as 0.
pub const AXIS_UNDEFINED_BELOW: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DisplacementOnly,
    PhaseVar,
    PhaseMean,
    PhaseMl,
    CovMethod,
    MeanMethod,
    Combined,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::DisplacementOnly => "displacement",
            Method::PhaseVar => "phase_var",
            Method::PhaseMean => "phase_mean",
            Method::PhaseMl => "phase_ml",
            Method::CovMethod => "cov",
            Method::MeanMethod => "mean",
            Method::Combined => "combined",
        }
    }

    /// Process parameters this method estimates, by report name.
    pub fn parameters(&self) -> &'static [&'static str] {
        match self {
            Method::DisplacementOnly => &["d", "beta"],
            Method::PhaseVar | Method::PhaseMean | Method::PhaseMl => &["phi"],
            Method::CovMethod | Method::MeanMethod | Method::Combined => {
                &["phi", "q", "alpha", "d", "beta"]
            }
        }
    }

    /// Whether the method needs the off-diagonal output covariance.
    pub fn needs_covariance(&self) -> bool {
        matches!(self, Method::CovMethod | Method::Combined)
    }

    /// Whether the method consumes the three-probe protocol.
    pub fn needs_probes(&self) -> bool {
        matches!(
            self,
            Method::CovMethod | Method::MeanMethod | Method::Combined
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An estimator name, optionally in its naive (ideal-channel) form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub method: Method,
    pub naive: bool,
}

impl EstimatorSpec {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            naive: false,
        }
    }

    pub fn naive(method: Method) -> Self {
        Self {
            method,
            naive: true,
        }
    }

    pub fn label(&self) -> String {
        if self.naive {
            format!("naive-{}", self.method.name())
        } else {
            self.method.name().to_string()
        }
    }
}

impl std::str::FromStr for EstimatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (naive, base) = match s.strip_prefix("naive-") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let method = match base {
            "displacement" => Method::DisplacementOnly,
            "phase_var" => Method::PhaseVar,
            "phase_mean" => Method::PhaseMean,
            "phase_ml" => Method::PhaseMl,
            "cov" => Method::CovMethod,
            "mean" => Method::MeanMethod,
            "combined" => Method::Combined,
            _ => {
                return Err(Error::InvalidArgument(format!("unknown estimator '{s}'")));
            }
        };
        Ok(Self { method, naive })
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub params: ProcessParams,
    pub method: Method,
    #[serde(default)]
    pub naive: bool,
    pub diagnostics: Diagnostics,
}

impl EstimateReport {
    pub fn new(params: ProcessParams, method: Method) -> Self {
        Self {
            params,
            method,
            naive: false,
            diagnostics: Diagnostics::new(),
        }
    }

    pub fn spec(&self) -> EstimatorSpec {
        EstimatorSpec {
            method: self.method,
            naive: self.naive,
        }
    }

    pub fn flag(&mut self, name: &str) {
        self.diagnostics.insert(name.to_string(), 1.0);
    }

    pub fn has_flag(&self, name: &str) -> bool {
        self.diagnostics.get(name).is_some_and(|v| *v != 0.0)
    }
}

/// Moments measured with the coherent probe at a given phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeMoments {
    pub phase: f64,
    pub moments: MomentEstimate,
}

/// Probe phases of the three-probe protocol around a base phase.
pub fn probe_phases(base: f64) -> [f64; 3] {
    [
        base,
        base + std::f64::consts::PI,
        base + std::f64::consts::FRAC_PI_2,
    ]
}

fn probe_vector(setup: &SetupConfig, phase: f64) -> Vector2<f64> {
    Vector2::new(setup.r_amp * phase.cos(), setup.r_amp * phase.sin())
}

/// Displacement estimate assuming no squeezing and no rotation.
pub fn est_displacement(
    moments: &MomentEstimate,
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    let model = OutputModel::new(setup, noise)?;
    let g = model.displacement_gain;
    if !(g > 0.0) {
        return Err(Error::Unidentifiable(
            "the displacement gain vanishes (T2 = 0)".into(),
        ));
    }
    let probe = setup.probe_mean();
    let baseline = probe * (model.light_via_process + model.light_direct);
    let dv = (moments.mean - baseline) / g;
    let d = dv.norm();
    let beta = dv.y.atan2(dv.x);
    let mut report = EstimateReport::new(
        ProcessParams::new(0.0, 0.0, 0.0, d, beta)?,
        Method::DisplacementOnly,
    );
    report.diagnostics.insert("d_x".into(), dv.x);
    report.diagnostics.insert("d_p".into(), dv.y);
    let n = moments.n_effective.x.min(moments.n_effective.p) as f64;
    let se = (0.5 * moments.cov.trace() / n).sqrt() / g;
    report.diagnostics.insert("d_standard_error".into(), se);
    if d < 3.0 * se {
        report.flag("near_zero_d");
    }
    Ok(report)
}
