use std::io::Write;

use lmi_core::fisher::{crb, fisher_displacement, fisher_numeric, DEFAULT_STEP};
use lmi_core::harness::{
    calibrate, estimate_once, sweep, CalibrationReport, SweepAxis, SweepTable,
};
use lmi_core::interferometer::forward;
use lmi_core::measurement::sample;
use lmi_core::{EstimateReport, GaussianState, Parameter, Topology};
use serde::{Deserialize, Serialize};

use crate::config::RunConfigFile;
use crate::CliError;

pub const SWEEP_HEADER: [&str; 10] = [
    "axis",
    "value",
    "estimator",
    "parameter",
    "mse",
    "bias",
    "variance",
    "n_samples",
    "m_reps",
    "seed",
];

pub const FISHER_HEADER: [&str; 8] = [
    "topology",
    "parameter",
    "method",
    "value",
    "mean_term",
    "cov_term",
    "n_samples",
    "crb",
];

pub const SAMPLES_HEADER: [&str; 4] = ["shot", "angle", "x", "p"];

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    pub n_samples: usize,
    pub seed: u64,
}

/// Forward-model output state; optionally the sampled shots as CSV.
pub fn simulate<W: Write>(
    cfg: &RunConfigFile,
    samples_out: Option<W>,
) -> Result<StateDump, CliError> {
    let state: GaussianState = forward(
        &cfg.setup_config()?,
        &cfg.process_params()?,
        cfg.noise_params()?.as_ref(),
    )?;
    let plan = cfg.plan()?;
    if let Some(out) = samples_out {
        let shots = sample(&state, &plan)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SAMPLES_HEADER)?;
        for (i, angle, x, p) in shots.records() {
            let angle = if angle.is_nan() {
                String::new()
            } else {
                num(angle)
            };
            w.write_record([i.to_string(), angle, num(x), num(p)])?;
        }
        w.flush()?;
    }
    let (m, c) = (state.mean(), state.cov());
    Ok(StateDump {
        mean: [m[0], m[1]],
        cov: [[c[(0, 0)], c[(0, 1)]], [c[(1, 0)], c[(1, 1)]]],
        n_samples: plan.n_samples,
        seed: plan.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutput {
    pub estimator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<EstimateReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One simulated data set and every configured estimator applied to it.
pub fn estimate(cfg: &RunConfigFile) -> Result<Vec<EstimateOutput>, CliError> {
    let mc = cfg.monte_carlo()?;
    let outcomes = estimate_once(&mc, cfg.measurement.seed)?;
    Ok(outcomes
        .into_iter()
        .map(|(spec, result)| match result {
            Ok(report) => EstimateOutput {
                estimator: spec.label(),
                report: Some(report),
                error: None,
            },
            Err(e) => EstimateOutput {
                estimator: spec.label(),
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

/// Displacement information of every topology at the configured interface
/// parameters, then the numeric information of each process parameter for
/// the configured topology.
pub fn fisher(cfg: &RunConfigFile, out: &mut dyn Write) -> Result<(), CliError> {
    let setup = cfg.setup_config()?;
    let process = cfg.process_params()?;
    let noise = cfg.noise_params()?;
    let n = cfg.measurement.n_samples;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FISHER_HEADER)?;
    for topology in [
        Topology::Simplistic,
        Topology::BlockedBeam,
        Topology::Interferometric,
    ] {
        let s = lmi_core::SetupConfig { topology, ..setup };
        let fi = fisher_displacement(&s)?;
        w.write_record([
            topology.name().to_string(),
            fi.parameter.name().to_string(),
            fi.method.name().to_string(),
            num(fi.value),
            opt(fi.mean_term),
            opt(fi.cov_term),
            n.to_string(),
            num(crb(&fi, n)?),
        ])?;
    }
    for param in Parameter::ALL {
        let fi = fisher_numeric(&setup, &process, noise.as_ref(), param, DEFAULT_STEP)?;
        let bound = crb(&fi, n).unwrap_or(f64::INFINITY);
        w.write_record([
            setup.topology.name().to_string(),
            fi.parameter.name().to_string(),
            fi.method.name().to_string(),
            num(fi.value),
            opt(fi.mean_term),
            opt(fi.cov_term),
            n.to_string(),
            num(bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_sweep(
    cfg: &RunConfigFile,
    axis: SweepAxis,
    grid: &[f64],
) -> Result<SweepTable, CliError> {
    Ok(sweep(&cfg.monte_carlo()?, axis, grid)?)
}

/// Writes a sweep table in the fixed CSV schema.
pub fn write_sweep_csv(table: &SweepTable, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for point in &table.points {
        let cfg = &point.report.config;
        for cell in &point.report.cells {
            w.write_record([
                table.axis.name().to_string(),
                num(point.value),
                cell.estimator.label(),
                cell.parameter.name().to_string(),
                num(cell.mse),
                num(cell.bias),
                num(cell.variance),
                cfg.plan.n_samples.to_string(),
                cfg.m_reps.to_string(),
                cfg.base_seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Cells of a sweep that failed too often to be trusted.
pub fn unreliable_cells(table: &SweepTable) -> Vec<String> {
    table
        .points
        .iter()
        .flat_map(|p| {
            p.report
                .cells
                .iter()
                .filter(|c| c.unreliable)
                .map(move |c| {
                    format!(
                        "{}={}: {} {} failed in {} of {} realizations",
                        table.axis,
                        p.value,
                        c.estimator.label(),
                        c.parameter.name(),
                        c.failures,
                        p.report.config.m_reps
                    )
                })
        })
        .collect()
}

pub fn run_calibrate(cfg: &RunConfigFile) -> Result<CalibrationReport, CliError> {
    Ok(calibrate(
        &cfg.setup_config()?,
        &cfg.plan()?,
        cfg.noise_params()?.as_ref(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    #[test]
    fn estimate_json_round_trips() {
        let mut cfg = preset("fig4_left").unwrap();
        cfg.monte_carlo.estimators = vec!["cov".into(), "mean".into(), "combined".into()];
        cfg.apply_overrides(Some(3), None, Some(30_000)).unwrap();
        let reports = estimate(&cfg).unwrap();
        assert!(reports.iter().all(|r| r.report.is_some()));
        let text = serde_json::to_string_pretty(&reports).unwrap();
        let back: Vec<EstimateOutput> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, reports);
    }

    #[test]
    fn sweep_csv_header_is_fixed() {
        let mut cfg = preset("fig3_left").unwrap();
        cfg.apply_overrides(None, Some(2), Some(300)).unwrap();
        let table = run_sweep(&cfg, SweepAxis::R, &[10.0]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "axis,value,estimator,parameter,mse,bias,variance,n_samples,m_reps,seed"
        );
        assert_eq!(text.lines().count(), 3);
    }
}
