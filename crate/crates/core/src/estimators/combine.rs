use std::f64::consts::PI;

use super::{EstimateReport, Method};
use crate::angle::circular_diff;
use crate::error::{Error, Result};
use crate::gaussian::ProcessParams;
use crate::measurement::jackknife_variance;

const PARAMS: [(&str, bool); 5] = [
    ("phi", true),
    ("w", false),
    ("alpha", true),
    ("d", false),
    ("beta", true),
];

const DISCREPANCY_LIMIT: f64 = 5.0;

fn get(p: &ProcessParams, name: &str) -> f64 {
    match name {
        "phi" => p.phi,
        "w" => p.w,
        "alpha" => p.alpha,
        "d" => p.d,
        "beta" => p.beta,
        _ => unreachable!("unknown parameter {name}"),
    }
}

/// Diagnostic key under which the jackknife variance of `param` is stored.
pub fn jackknife_key(param: &str) -> String {
    format!("jk_var_{param}")
}

/// Stores per-parameter jackknife variances of leave-one-block-out
/// re-estimates in the report diagnostics.
pub fn attach_jackknife(report: &mut EstimateReport, replicates: &[ProcessParams]) {
    for (name, angular) in PARAMS {
        let values: Vec<f64> = replicates.iter().map(|p| get(p, name)).collect();
        let period = angular.then_some(2.0 * PI);
        report
            .diagnostics
            .insert(jackknife_key(name), jackknife_variance(&values, period));
    }
}

fn variance(report: &EstimateReport, name: &str) -> Result<f64> {
    report
        .diagnostics
        .get(&jackknife_key(name))
        .copied()
        .filter(|v| v.is_finite() && *v >= 0.0)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "report from the {} method lacks a jackknife variance for {name}",
                report.method
            ))
        })
}

/// Inverse-variance weighted combination of the covariance-method and
/// mean-method reports. Angles are averaged on the circle. A parameter whose
/// two estimates differ by more than five combined standard errors raises
/// the `inconsistent` flag.
pub fn est_combined(cov: &EstimateReport, mean: &EstimateReport) -> Result<EstimateReport> {
    let mut values = [0.0; 5];
    let mut out = EstimateReport::new(cov.params, Method::Combined);
    let mut worst: f64 = 0.0;
    for (k, (name, angular)) in PARAMS.iter().enumerate() {
        let (vi, vii) = (variance(cov, name)?, variance(mean, name)?);
        let (xi, xii) = (get(&cov.params, name), get(&mean.params, name));
        let diff = if *angular {
            circular_diff(xii, xi, 2.0 * PI)
        } else {
            xii - xi
        };
        let weight_ii = match (vi > 0.0, vii > 0.0) {
            (true, true) => vi / (vi + vii),
            (false, false) => 0.5,
            (true, false) => 1.0,
            (false, true) => 0.0,
        };
        values[k] = xi + weight_ii * diff;
        let combined_var = if vi > 0.0 && vii > 0.0 {
            vi * vii / (vi + vii)
        } else {
            0.0
        };
        out.diagnostics.insert(jackknife_key(name), combined_var);
        let sigma = (vi + vii).sqrt();
        let z = if sigma > 0.0 {
            diff.abs() / sigma
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        out.diagnostics.insert(format!("discrepancy_{name}"), z);
        worst = worst.max(z);
    }
    out.params = ProcessParams::new(
        values[0],
        values[1].max(0.0),
        values[2],
        values[3].max(0.0),
        values[4],
    )?;
    out.diagnostics.insert("max_discrepancy".into(), worst);
    if worst > DISCREPANCY_LIMIT {
        out.flag("inconsistent");
    }
    Ok(out)
}
