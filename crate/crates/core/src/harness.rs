//! Monte-Carlo benchmarking of the estimators.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::circular_diff;
use crate::error::{invalid, Diagnostics, Error, Result};
use crate::estimators::{
    attach_jackknife, est_combined, est_displacement, est_general_cov, est_general_cov_near,
    est_general_mean, est_noise, est_phase_mean, est_phase_ml_from_groups, est_phase_var,
    probe_phases, EstimateReport, EstimatorSpec, Method, ProbeMoments,
};
use crate::fisher::Parameter;
use crate::gaussian::ProcessParams;
use crate::interferometer::{forward, NoiseParams, SetupConfig};
use crate::measurement::{
    child_seed, jackknife_variance, realization_seed, sample, GroupKind, GroupMoments,
    MeasurementPlan, MomentEstimate, SampleSummary,
};

/// Fraction of failed realizations above which a cell is unreliable.
pub const UNRELIABLE_FAILURE_RATE: f64 = 0.05;

const PROBE_TAG: u64 = 1;
const CALIBRATION_TAG: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub setup: SetupConfig,
    pub process: ProcessParams,
    pub noise: Option<NoiseParams>,
    pub plan: MeasurementPlan,
    pub m_reps: usize,
    pub base_seed: u64,
    pub estimators: Vec<EstimatorSpec>,
    /// Non-naive estimators use a per-realization calibration of the channel
    /// instead of the true channel.
    #[serde(default)]
    pub calibrate: bool,
    /// Feed the estimators exact output moments instead of sampled ones.
    #[serde(default)]
    pub analytic_moments: bool,
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        self.plan.validate()?;
        if self.m_reps < 2 {
            return Err(invalid(format!(
                "m_reps must be at least 2, got {}",
                self.m_reps
            )));
        }
        if self.estimators.is_empty() {
            return Err(invalid("no estimators requested"));
        }
        if self.needs_probes() {
            MeasurementPlan {
                n_samples: self.plan.n_samples / 3,
                ..self.plan
            }
            .validate()?;
        }
        Ok(())
    }

    fn needs_probes(&self) -> bool {
        self.calibrate || self.estimators.iter().any(|e| e.method.needs_probes())
    }

    fn needs_single_run(&self) -> bool {
        self.estimators.iter().any(|e| !e.method.needs_probes())
    }
}

/// One measurement run: moments, per-group statistics and, for sampled
/// data, the block summary used for jackknife resampling.
#[derive(Debug, Clone)]
struct Run {
    phase: f64,
    moments: MomentEstimate,
    groups: Vec<GroupMoments>,
    summary: Option<SampleSummary>,
}

fn measure(
    setup: &SetupConfig,
    process: &ProcessParams,
    noise: Option<&NoiseParams>,
    plan: &MeasurementPlan,
    analytic: bool,
) -> Result<Run> {
    let state = forward(setup, process, noise)?;
    if analytic {
        let moments = MomentEstimate::exact(&state)?;
        let groups = vec![GroupMoments {
            kind: GroupKind::Joint,
            n: plan.n_samples,
            mean: moments.mean,
            scatter: moments.cov,
        }];
        return Ok(Run {
            phase: setup.probe_phase,
            moments,
            groups,
            summary: None,
        });
    }
    let summary = SampleSummary::new(&sample(&state, plan)?);
    Ok(Run {
        phase: setup.probe_phase,
        moments: summary.moments()?,
        groups: summary.group_moments(),
        summary: Some(summary),
    })
}

fn probe_runs(
    cfg: &MonteCarloConfig,
    process: &ProcessParams,
    seed: u64,
    tag: u64,
) -> Result<Vec<Run>> {
    let plan = MeasurementPlan {
        n_samples: cfg.plan.n_samples / 3,
        ..cfg.plan
    };
    probe_phases(cfg.setup.probe_phase)
        .iter()
        .enumerate()
        .map(|(i, &phase)| {
            let setup = cfg.setup.with_probe_phase(phase);
            let plan = plan.with_seed(child_seed(seed, tag + i as u64));
            measure(
                &setup,
                process,
                cfg.noise.as_ref(),
                &plan,
                cfg.analytic_moments,
            )
        })
        .collect()
}

fn probe_moments(runs: &[Run]) -> Vec<ProbeMoments> {
    runs.iter()
        .map(|r| ProbeMoments {
            phase: r.phase,
            moments: r.moments,
        })
        .collect()
}

/// Leave-one-block-out probe moments, or none for exact data.
fn jackknife_probes(runs: &[Run]) -> Result<Vec<Vec<ProbeMoments>>> {
    let summaries: Option<Vec<&SampleSummary>> = runs.iter().map(|r| r.summary.as_ref()).collect();
    let Some(summaries) = summaries else {
        return Ok(Vec::new());
    };
    let blocks = summaries.iter().map(|s| s.n_jackknife()).min().unwrap_or(0);
    let per_probe: Vec<Vec<MomentEstimate>> = summaries
        .iter()
        .map(|s| s.jackknife_moments())
        .collect::<Result<_>>()?;
    Ok((0..blocks)
        .map(|b| {
            runs.iter()
                .zip(&per_probe)
                .map(|(r, jk)| ProbeMoments {
                    phase: r.phase,
                    moments: jk[b],
                })
                .collect()
        })
        .collect())
}

fn with_zero_jackknife(mut report: EstimateReport) -> EstimateReport {
    let params = report.params;
    attach_jackknife(&mut report, &[params, params]);
    report
}

fn combined_estimate(
    runs: &[Run],
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    let probes = probe_moments(runs);
    let cov = est_general_cov(&probes, setup, noise)?;
    let mean = est_general_mean(&probes, setup, noise)?;
    let replicates = jackknife_probes(runs)?;
    if replicates.is_empty() {
        return est_combined(&with_zero_jackknife(cov), &with_zero_jackknife(mean));
    }
    let mut cov_reps = Vec::with_capacity(replicates.len());
    let mut mean_reps = Vec::with_capacity(replicates.len());
    for rep in &replicates {
        cov_reps.push(est_general_cov_near(rep, setup, noise, &cov.params)?.params);
        mean_reps.push(est_general_mean(rep, setup, noise)?.params);
    }
    let mut cov = cov;
    let mut mean = mean;
    attach_jackknife(&mut cov, &cov_reps);
    attach_jackknife(&mut mean, &mean_reps);
    est_combined(&cov, &mean)
}

/// Outcome of one estimator on one realization.
pub type Outcome = (EstimatorSpec, Result<EstimateReport>);

/// Simulates one realization with the given seed and applies every
/// requested estimator.
pub fn estimate_once(cfg: &MonteCarloConfig, seed: u64) -> Result<Vec<Outcome>> {
    cfg.validate()?;
    let single = if cfg.needs_single_run() {
        Some(measure(
            &cfg.setup,
            &cfg.process,
            cfg.noise.as_ref(),
            &cfg.plan.with_seed(seed),
            cfg.analytic_moments,
        )?)
    } else {
        None
    };
    let probes = if cfg.needs_probes() {
        Some(probe_runs(cfg, &cfg.process, seed, PROBE_TAG)?)
    } else {
        None
    };
    let calibrated: Option<Result<NoiseParams>> =
        (cfg.calibrate && cfg.estimators.iter().any(|e| !e.naive)).then(|| {
            let runs = probe_runs(cfg, &ProcessParams::identity(), seed, CALIBRATION_TAG)?;
            Ok(est_noise(&probe_moments(&runs), &cfg.setup)?.noise)
        });

    let outcomes = cfg
        .estimators
        .iter()
        .map(|spec| {
            let noise: Result<Option<NoiseParams>> = if spec.naive {
                Ok(None)
            } else {
                match &calibrated {
                    Some(Ok(n)) => Ok(Some(*n)),
                    Some(Err(e)) => Err(e.clone()),
                    None => Ok(cfg.noise),
                }
            };
            let result = noise.and_then(|noise| {
                apply(
                    spec.method,
                    &cfg.setup,
                    noise.as_ref(),
                    single.as_ref(),
                    probes.as_deref(),
                )
            });
            let result = result.map(|mut r| {
                r.naive = spec.naive;
                r
            });
            (*spec, result)
        })
        .collect();
    Ok(outcomes)
}

fn apply(
    method: Method,
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
    single: Option<&Run>,
    probes: Option<&[Run]>,
) -> Result<EstimateReport> {
    let single = || single.ok_or_else(|| Error::InsufficientData("no single-probe run".into()));
    let probes = || probes.ok_or_else(|| Error::InsufficientData("no probe runs".into()));
    match method {
        Method::DisplacementOnly => est_displacement(&single()?.moments, setup, noise),
        Method::PhaseVar => est_phase_var(&single()?.moments, setup, noise),
        Method::PhaseMean => est_phase_mean(&single()?.moments, setup, noise),
        Method::PhaseMl => est_phase_ml_from_groups(&single()?.groups, setup, noise),
        Method::CovMethod => est_general_cov(&probe_moments(probes()?), setup, noise),
        Method::MeanMethod => est_general_mean(&probe_moments(probes()?), setup, noise),
        Method::Combined => combined_estimate(probes()?, setup, noise),
    }
}

/// Error of an estimate against the truth, on the circle for angles.
pub fn parameter_error(param: Parameter, estimate: &ProcessParams, truth: &ProcessParams) -> f64 {
    let (e, t) = (param.value(estimate), param.value(truth));
    if param.is_angle() {
        circular_diff(e, t, 2.0 * PI)
    } else {
        e - t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseCell {
    pub estimator: EstimatorSpec,
    pub parameter: Parameter,
    pub mse: f64,
    /// Standard error of `mse` over the realizations.
    pub mse_standard_error: f64,
    pub bias: f64,
    pub variance: f64,
    /// Realizations that produced an estimate.
    pub n_ok: usize,
    pub failures: usize,
    /// Realizations whose estimator clamped an out-of-range statistic.
    pub clamps: usize,
    pub unreliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub cells: Vec<MseCell>,
    pub config: MonteCarloConfig,
    /// Most frequent failure message per estimator label.
    pub failure_reasons: BTreeMap<String, String>,
    pub wall_time_s: f64,
}

impl MseReport {
    pub fn cell(&self, estimator: &str, parameter: Parameter) -> Option<&MseCell> {
        self.cells
            .iter()
            .find(|c| c.estimator.label() == estimator && c.parameter == parameter)
    }

    pub fn mse(&self, estimator: &str, parameter: Parameter) -> Option<f64> {
        self.cell(estimator, parameter).map(|c| c.mse)
    }
}

fn parameters_of(method: Method) -> Vec<Parameter> {
    method
        .parameters()
        .iter()
        .map(|n| Parameter::from_name(n).expect("method parameters are valid names"))
        .collect()
}

/// Runs `m_reps` independent realizations and reports the mean squared
/// error of every estimator and parameter.
pub fn run_mc(cfg: &MonteCarloConfig) -> Result<MseReport> {
    cfg.validate()?;
    let start = Instant::now();
    let outcomes: Vec<Vec<Outcome>> = (1..=cfg.m_reps as u64)
        .into_par_iter()
        .map(|k| estimate_once(cfg, realization_seed(cfg.base_seed, k)))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut failure_reasons = BTreeMap::new();
    for (idx, spec) in cfg.estimators.iter().enumerate() {
        let results: Vec<&Result<EstimateReport>> = outcomes.iter().map(|o| &o[idx].1).collect();
        let ok: Vec<&EstimateReport> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let failures = results.len() - ok.len();
        let clamps = ok.iter().filter(|r| r.has_flag("clamped")).count();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for e in results.iter().filter_map(|r| r.as_ref().err()) {
            *counts.entry(e.to_string()).or_default() += 1;
        }
        if let Some((msg, _)) = counts.into_iter().max_by_key(|(_, n)| *n) {
            failure_reasons.insert(spec.label(), msg);
        }
        for param in parameters_of(spec.method) {
            let errors: Vec<f64> = ok
                .iter()
                .map(|r| parameter_error(param, &r.params, &cfg.process))
                .collect();
            let n = errors.len() as f64;
            let (mse, mse_standard_error, bias, variance) = if errors.is_empty() {
                (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
            } else {
                let bias = errors.iter().sum::<f64>() / n;
                let variance = errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / n;
                let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
                let spread = errors.iter().map(|e| (e * e - mse).powi(2)).sum::<f64>() / n;
                (mse, (spread / n).sqrt(), bias, variance)
            };
            cells.push(MseCell {
                estimator: *spec,
                parameter: param,
                mse,
                mse_standard_error,
                bias,
                variance,
                n_ok: ok.len(),
                failures,
                clamps,
                unreliable: failures as f64 > UNRELIABLE_FAILURE_RATE * cfg.m_reps as f64,
            });
        }
    }
    Ok(MseReport {
        cells,
        config: cfg.clone(),
        failure_reasons,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "r")]
    R,
    #[serde(rename = "V")]
    V,
    #[serde(rename = "T")]
    T,
    #[serde(rename = "loss")]
    Loss,
    #[serde(rename = "Phi")]
    Phi,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::R => "r",
            SweepAxis::V => "V",
            SweepAxis::T => "T",
            SweepAxis::Loss => "loss",
            SweepAxis::Phi => "Phi",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(SweepAxis::R),
            "V" | "v" => Ok(SweepAxis::V),
            "T" | "t" => Ok(SweepAxis::T),
            "loss" => Ok(SweepAxis::Loss),
            "Phi" | "phi" => Ok(SweepAxis::Phi),
            _ => Err(invalid(format!(
                "unknown sweep axis '{s}' (expected r, V, T, loss or Phi)"
            ))),
        }
    }
}

/// Copy of `cfg` with the swept quantity set to `value`. A `T` value sets
/// both transmittances; a `loss` value sets `t_c = 1 − loss` and keeps the
/// configured bath variance.
pub fn apply_axis(cfg: &MonteCarloConfig, axis: SweepAxis, value: f64) -> Result<MonteCarloConfig> {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::R => c.setup.r_amp = value,
        SweepAxis::V => c.setup.v_thermal = value,
        SweepAxis::T => {
            c.setup.t1 = value;
            c.setup.t2 = value;
        }
        SweepAxis::Loss => {
            let v_c = cfg.noise.map_or(1.0, |n| n.v_c);
            c.noise = Some(NoiseParams::new(1.0 - value, v_c)?);
        }
        SweepAxis::Phi => {
            let p = cfg.process;
            c.process = ProcessParams::new(value, p.w, p.alpha, p.d, p.beta)?;
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: MseReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

/// One Monte-Carlo report per grid value, all with the same base seed.
pub fn sweep(cfg: &MonteCarloConfig, axis: SweepAxis, grid: &[f64]) -> Result<SweepTable> {
    let points = grid
        .iter()
        .map(|&value| {
            Ok(SweepPoint {
                value,
                report: run_mc(&apply_axis(cfg, axis, value)?)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable { axis, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub estimator: String,
    pub parameter: Parameter,
    /// `c` in `MSE ∼ T^(−c)`.
    pub exponent: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub unreliable: bool,
}

/// Least-squares slope and R² of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientData("need at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(invalid("log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok((slope, r2))
}

/// Small-transmittance regime used for exponent fits.
pub const EXPONENT_T_MAX: f64 = 0.1;

/// Fits `MSE ∼ T^(−c)` per estimator and parameter over the points with
/// `T ≤ 0.1`; fits with R² < 0.9 are flagged unreliable.
pub fn fit_exponent(table: &SweepTable) -> Result<Vec<ExponentFit>> {
    if table.axis != SweepAxis::T {
        return Err(invalid("exponent fits need a T sweep"));
    }
    let pts: Vec<&SweepPoint> = table
        .points
        .iter()
        .filter(|p| p.value <= EXPONENT_T_MAX + 1e-12)
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "exponent fit needs at least 4 points with T <= {EXPONENT_T_MAX}, got {}",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.value).collect();
    let mut fits = Vec::new();
    for cell in &pts[0].report.cells {
        let label = cell.estimator.label();
        let ys: Vec<f64> = pts
            .iter()
            .map(|p| p.report.mse(&label, cell.parameter).unwrap_or(f64::NAN))
            .collect();
        let fit = log_log_slope(&xs, &ys);
        let (exponent, r_squared) = fit.map(|(s, r2)| (-s, r2)).unwrap_or((f64::NAN, f64::NAN));
        fits.push(ExponentFit {
            estimator: label,
            parameter: cell.parameter,
            exponent,
            r_squared,
            n_points: xs.len(),
            unreliable: !(r_squared >= 0.9),
        });
    }
    Ok(fits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RCrit {
    Found { r: f64, bracket: (f64, f64) },
    NotFound,
}

fn phase_mse_gap(cfg: &MonteCarloConfig, r: f64) -> Result<f64> {
    let report = run_mc(&apply_axis(cfg, SweepAxis::R, r)?)?;
    let var = report
        .mse("phase_var", Parameter::Phi)
        .ok_or_else(|| invalid("phase_var missing"))?;
    let mean = report
        .mse("phase_mean", Parameter::Phi)
        .ok_or_else(|| invalid("phase_mean missing"))?;
    Ok(var.ln() - mean.ln())
}

/// Amplitude at which the variance-based and mean-based phase estimators
/// have equal Monte-Carlo MSE: a sign change on a log-spaced grid of
/// `n_grid` points refined by bisection in `ln r`. Every evaluation reuses
/// the same base seed.
pub fn find_r_crit(cfg: &MonteCarloConfig, r_lo: f64, r_hi: f64, n_grid: usize) -> Result<RCrit> {
    if !(r_lo > 0.0 && r_hi > r_lo) || n_grid < 2 {
        return Err(invalid(
            "r range must satisfy 0 < r_lo < r_hi with at least 2 grid points",
        ));
    }
    let mut cfg = cfg.clone();
    cfg.estimators = vec![
        EstimatorSpec::new(Method::PhaseVar),
        EstimatorSpec::new(Method::PhaseMean),
    ];
    let grid = log_grid(r_lo, r_hi, n_grid);
    let mut prev = (grid[0], phase_mse_gap(&cfg, grid[0])?);
    for &r in &grid[1..] {
        let gap = phase_mse_gap(&cfg, r)?;
        if prev.1.signum() != gap.signum() {
            let (mut lo, mut hi) = (prev, (r, gap));
            for _ in 0..12 {
                let mid = (lo.0 * hi.0).sqrt();
                let g = phase_mse_gap(&cfg, mid)?;
                if g.signum() == lo.1.signum() {
                    lo = (mid, g);
                } else {
                    hi = (mid, g);
                }
                if hi.0 / lo.0 < 1.001 {
                    break;
                }
            }
            let t = lo.1 / (lo.1 - hi.1);
            let r = (lo.0.ln() + t * (hi.0.ln() - lo.0.ln())).exp();
            return Ok(RCrit::Found {
                r,
                bracket: (lo.0, hi.0),
            });
        }
        prev = (r, gap);
    }
    Ok(RCrit::NotFound)
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub estimate: NoiseParams,
    pub t_c_standard_error: f64,
    /// Absent when the bath variance is unobservable at this loss.
    pub v_c_standard_error: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Estimates the decoherence channel from a three-probe run with the process
/// switched off; `true_noise` drives the simulation only.
pub fn calibrate(
    setup: &SetupConfig,
    plan: &MeasurementPlan,
    true_noise: Option<&NoiseParams>,
) -> Result<CalibrationReport> {
    let cfg = MonteCarloConfig {
        setup: *setup,
        process: ProcessParams::identity(),
        noise: true_noise.copied(),
        plan: *plan,
        m_reps: 2,
        base_seed: plan.seed,
        estimators: vec![EstimatorSpec::new(Method::MeanMethod)],
        calibrate: false,
        analytic_moments: false,
    };
    cfg.validate()?;
    let runs = probe_runs(&cfg, &ProcessParams::identity(), plan.seed, CALIBRATION_TAG)?;
    let est = est_noise(&probe_moments(&runs), setup)?;
    let reps = jackknife_probes(&runs)?;
    let mut tcs = Vec::with_capacity(reps.len());
    let mut vcs = Vec::with_capacity(reps.len());
    for rep in &reps {
        let e = est_noise(rep, setup)?;
        let raw = |key: &str, clamped: f64| e.diagnostics.get(key).copied().unwrap_or(clamped);
        tcs.push(raw("raw_t_c", e.noise.t_c));
        vcs.push(raw("raw_v_c", e.noise.v_c));
    }
    Ok(CalibrationReport {
        estimate: est.noise,
        t_c_standard_error: jackknife_variance(&tcs, None).sqrt(),
        v_c_standard_error: (!est.diagnostics.contains_key("v_c_unobservable"))
            .then(|| jackknife_variance(&vcs, None).sqrt()),
        diagnostics: est.diagnostics,
    })
}

/// Physical covariance after repair of a raw estimate; exposed for the
/// physicality checks.
pub fn repaired(cov: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    crate::gaussian::repair_physicality(cov)
}
