//! Run configuration files.
//!
//! A configuration is a TOML document with the sections `setup`, `process`,
//! `noise`, `measurement`, `monte_carlo`, `sweep` and `output`. Unknown keys
//! are rejected and every range check reports the offending field path.

use std::path::{Path, PathBuf};

use lmi_core::harness::{log_grid, SweepAxis};
use lmi_core::{
    EstimatorSpec, MeasurementPlan, MeasurementScheme, MonteCarloConfig, NoiseParams,
    ProcessParams, SetupConfig, Topology,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub setup: SetupSection,
    #[serde(default)]
    pub process: ProcessSection,
    pub noise: Option<NoiseSection>,
    pub measurement: MeasurementSection,
    #[serde(default)]
    pub monte_carlo: MonteCarloSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupSection {
    pub topology: Topology,
    pub t1: f64,
    pub t2: f64,
    pub v_thermal: f64,
    pub r_amp: f64,
    #[serde(default)]
    pub probe_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessSection {
    pub phi: f64,
    pub q: f64,
    pub alpha: f64,
    pub d: f64,
    pub beta: f64,
}

impl Default for ProcessSection {
    fn default() -> Self {
        Self {
            phi: 0.0,
            q: 1.0,
            alpha: 0.0,
            d: 0.0,
            beta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub t_c: f64,
    #[serde(default = "one")]
    pub v_c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    pub scheme: SchemeName,
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Joint,
    Homodyne2,
    Homodyne3,
    Heterodyne,
}

impl From<SchemeName> for MeasurementScheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Joint => MeasurementScheme::Joint,
            SchemeName::Homodyne2 => MeasurementScheme::HomodyneSplit2,
            SchemeName::Homodyne3 => MeasurementScheme::HomodyneSplit3,
            SchemeName::Heterodyne => MeasurementScheme::Heterodyne,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSection {
    pub m_reps: usize,
    pub base_seed: u64,
    pub estimators: Vec<String>,
    pub calibrate: bool,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self {
            m_reps: 100,
            base_seed: 0,
            estimators: Vec::new(),
            calibrate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    pub grid: GridSpec,
}

/// Either an explicit list of values or `"log:lo:hi:n"` / `"lin:lo:hi:n"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Spec(String),
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Spec(s) => parse_grid(s),
        }
    }
}

/// Parses `log:lo:hi:n`, `lin:lo:hi:n` or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{t}' is not a number"))
    };
    match parts.as_slice() {
        [kind @ ("log" | "lin"), lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| format!("'{n}' is not a point count"))?;
            if n == 0 || !(hi >= lo) {
                return Err("grid needs lo <= hi and at least one point".into());
            }
            if *kind == "log" {
                if !(lo > 0.0) {
                    return Err("log grid needs lo > 0".into());
                }
                Ok(log_grid(lo, hi, n))
            } else if n == 1 {
                Ok(vec![lo])
            } else {
                Ok((0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                    .collect())
            }
        }
        [list] if !list.trim().is_empty() => list.split(',').map(num).collect(),
        _ => Err(format!(
            "cannot parse grid '{s}' (expected log:lo:hi:n, lin:lo:hi:n or a list)"
        )),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

pub const PRESETS: [(&str, &str); 6] = [
    ("fig3_left", include_str!("../presets/fig3_left.toml")),
    ("fig3_right", include_str!("../presets/fig3_right.toml")),
    ("fig4_left", include_str!("../presets/fig4_left.toml")),
    ("fig4_right", include_str!("../presets/fig4_right.toml")),
    ("fig5_left", include_str!("../presets/fig5_left.toml")),
    ("fig5_right", include_str!("../presets/fig5_right.toml")),
];

pub fn preset(name: &str) -> Result<RunConfigFile, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Validation(format!(
            "unknown preset '{name}' (available: {})",
            names.join(", ")
        ))
    })?;
    parse(text)
}

pub fn load(path: &Path) -> Result<RunConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfigFile, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Validation(e.to_string()))?;
    let cfg: RunConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!("{path}: {}", e.into_inner().message().trim()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn field(path: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {err}"))
}

impl RunConfigFile {
    pub fn validate(&self) -> Result<(), CliError> {
        self.setup_config()?;
        self.process_params()?;
        self.noise_params()?;
        self.plan()?;
        self.estimators()?;
        if self.monte_carlo.m_reps < 2 {
            return Err(field("monte_carlo.m_reps", "must be at least 2"));
        }
        if let Some(s) = &self.sweep {
            self.sweep_axis(&s.axis)?;
            s.grid.values().map_err(|e| field("sweep.grid", e))?;
        }
        Ok(())
    }

    pub fn setup_config(&self) -> Result<SetupConfig, CliError> {
        let s = &self.setup;
        for (name, v) in [("t1", s.t1), ("t2", s.t2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(field(
                    &format!("setup.{name}"),
                    format!("{v} is outside [0, 1]"),
                ));
            }
        }
        if !(s.v_thermal >= 1.0) {
            return Err(field(
                "setup.v_thermal",
                format!("{} is below the vacuum level 1", s.v_thermal),
            ));
        }
        if !(s.r_amp >= 0.0 && s.r_amp.is_finite()) {
            return Err(field(
                "setup.r_amp",
                format!("{} must be finite and non-negative", s.r_amp),
            ));
        }
        if !s.probe_phase.is_finite() {
            return Err(field("setup.probe_phase", "must be finite"));
        }
        let setup = SetupConfig::new(s.topology, s.t1, s.t2, s.v_thermal, s.r_amp)
            .map_err(|e| field("setup", e))?;
        Ok(setup.with_probe_phase(s.probe_phase))
    }

    pub fn process_params(&self) -> Result<ProcessParams, CliError> {
        let p = &self.process;
        if !(p.q > 0.0 && p.q.is_finite()) {
            return Err(field("process.q", format!("{} must be positive", p.q)));
        }
        if !(p.d >= 0.0 && p.d.is_finite()) {
            return Err(field(
                "process.d",
                format!("{} must be finite and non-negative", p.d),
            ));
        }
        for (name, v) in [("phi", p.phi), ("alpha", p.alpha), ("beta", p.beta)] {
            if !v.is_finite() {
                return Err(field(&format!("process.{name}"), "must be finite"));
            }
        }
        ProcessParams::from_q(p.phi, p.q, p.alpha, p.d, p.beta).map_err(|e| field("process", e))
    }

    pub fn noise_params(&self) -> Result<Option<NoiseParams>, CliError> {
        let Some(n) = &self.noise else {
            return Ok(None);
        };
        if !(n.t_c > 0.0 && n.t_c <= 1.0) {
            return Err(field("noise.t_c", format!("{} is outside (0, 1]", n.t_c)));
        }
        if !(n.v_c >= 1.0 && n.v_c.is_finite()) {
            return Err(field(
                "noise.v_c",
                format!("{} is below the vacuum level 1", n.v_c),
            ));
        }
        NoiseParams::new(n.t_c, n.v_c)
            .map(Some)
            .map_err(|e| field("noise", e))
    }

    pub fn plan(&self) -> Result<MeasurementPlan, CliError> {
        let m = &self.measurement;
        MeasurementPlan::new(m.scheme.into(), m.n_samples, m.seed)
            .map_err(|e| field("measurement.n_samples", e))
    }

    pub fn estimators(&self) -> Result<Vec<EstimatorSpec>, CliError> {
        self.monte_carlo
            .estimators
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.parse()
                    .map_err(|e| field(&format!("monte_carlo.estimators[{i}]"), e))
            })
            .collect()
    }

    pub fn sweep_axis(&self, axis: &str) -> Result<SweepAxis, CliError> {
        axis.parse().map_err(|e| field("sweep.axis", e))
    }

    pub fn monte_carlo(&self) -> Result<MonteCarloConfig, CliError> {
        let estimators = self.estimators()?;
        if estimators.is_empty() {
            return Err(field(
                "monte_carlo.estimators",
                "at least one estimator is required",
            ));
        }
        let cfg = MonteCarloConfig {
            setup: self.setup_config()?,
            process: self.process_params()?,
            noise: self.noise_params()?,
            plan: self.plan()?,
            m_reps: self.monte_carlo.m_reps,
            base_seed: self.monte_carlo.base_seed,
            estimators,
            calibrate: self.monte_carlo.calibrate,
            analytic_moments: false,
        };
        cfg.validate().map_err(|e| field("monte_carlo", e))?;
        Ok(cfg)
    }

    /// Applies command-line overrides; `seed` sets both the measurement seed
    /// and the Monte-Carlo base seed.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        m_reps: Option<usize>,
        n_samples: Option<usize>,
    ) -> Result<(), CliError> {
        if let Some(s) = seed {
            self.measurement.seed = s;
            self.monte_carlo.base_seed = s;
        }
        if let Some(m) = m_reps {
            self.monte_carlo.m_reps = m;
        }
        if let Some(n) = n_samples {
            self.measurement.n_samples = n;
        }
        self.validate()
    }
}
