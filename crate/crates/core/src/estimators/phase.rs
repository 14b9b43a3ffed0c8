use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{EstimateReport, Method};
use crate::angle::wrap_pi;
use crate::error::{Error, Result};
use crate::gaussian::{rotation, ProcessParams};
use crate::interferometer::{NoiseParams, OutputModel, SetupConfig};
use crate::measurement::{GroupKind, GroupMoments, MomentEstimate, SampleSummary};
use crate::optimize::golden_section;

const ML_GRID: usize = 64;
const ML_MAX_ITER: u64 = 200;

/// Phase dependence of the output variance, `Var(x_o) = u + v·cos Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvCoefficients {
    pub u: f64,
    pub v: f64,
}

impl UvCoefficients {
    pub fn variance(&self, phi: f64) -> f64 {
        self.u + self.v * phi.cos()
    }
}

/// `u` and `v` for the assumed channel. On the ideal channel these are
/// `u = 1 − T₁ − T₂ + 2T₁T₂ + T₁V + T₂V − 2T₁T₂V` and
/// `v = 2(1 − V)·√((1−T₁)(1−T₂)T₁T₂)`.
pub fn phase_uv(setup: &SetupConfig, noise: Option<&NoiseParams>) -> Result<UvCoefficients> {
    let (a, b, c) = OutputModel::new(setup, noise)?.cov_coefficients();
    Ok(UvCoefficients {
        u: a + c,
        v: 2.0 * b,
    })
}

fn phase_report(phi: f64, method: Method) -> Result<EstimateReport> {
    Ok(EstimateReport::new(ProcessParams::phase_only(phi)?, method))
}

/// Phase from the mean output variance, with the arccos branch chosen by the
/// output mean when the probe is bright enough to tell.
pub fn est_phase_var(
    moments: &MomentEstimate,
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    let uv = phase_uv(setup, noise)?;
    if uv.v.abs() < 1e-12 {
        return Err(Error::Unidentifiable(
            "the output variance does not depend on the phase (v = 0)".into(),
        ));
    }
    let var = 0.5 * (moments.cov[(0, 0)] + moments.cov[(1, 1)]);
    let arg = (var - uv.u) / uv.v;
    let clamped = !(-1.0..=1.0).contains(&arg);
    let magnitude = arg.clamp(-1.0, 1.0).acos();

    let model = OutputModel::new(setup, noise)?;
    let probe = setup.probe_mean();
    let predict = |phi: f64| model.light_transfer(&rotation(phi)) * probe;
    let mut sign_resolved = setup.r_amp > 0.0 && model.light_via_process > 0.0;
    let phi = if sign_resolved {
        let plus = (predict(magnitude) - moments.mean).norm_squared();
        let minus = (predict(-magnitude) - moments.mean).norm_squared();
        if plus == minus && magnitude > 0.0 && magnitude < PI {
            sign_resolved = false;
        }
        if minus < plus {
            -magnitude
        } else {
            magnitude
        }
    } else {
        magnitude
    };

    let mut report = phase_report(phi, Method::PhaseVar)?;
    report.diagnostics.insert("arccos_argument".into(), arg);
    if clamped {
        report.flag("clamped");
    }
    if !sign_resolved {
        report.flag("sign_unresolved");
    }
    Ok(report)
}

/// Phase from the direction of the process-borne part of the output mean.
pub fn est_phase_mean(
    moments: &MomentEstimate,
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    if !(setup.r_amp > 0.0) {
        return Err(Error::Unidentifiable(
            "the mean carries no phase when r = 0".into(),
        ));
    }
    let model = OutputModel::new(setup, noise)?;
    if !(model.light_via_process > 0.0) {
        return Err(Error::Unidentifiable(
            "the probe light does not pass through the process".into(),
        ));
    }
    let y = moments.mean - setup.probe_mean() * model.light_direct;
    let phi = wrap_pi(y.y.atan2(y.x) - setup.probe_phase);
    phase_report(phi, Method::PhaseMean)
}

/// Maximum-likelihood phase from a measurement record.
pub fn est_phase_ml(
    summary: &SampleSummary,
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    est_phase_ml_from_groups(&summary.group_moments(), setup, noise)
}

fn group_log_likelihood(g: &GroupMoments, mu: &Vector2<f64>, cov: &Matrix2<f64>) -> f64 {
    let n = g.n as f64;
    match g.kind {
        GroupKind::Homodyne(theta) => {
            let e = Vector2::new(theta.cos(), theta.sin());
            let m = e.dot(mu);
            let var = (cov * e).dot(&e);
            let dev = g.mean.x - m;
            -0.5 * n * (var.ln() + (g.scatter[(0, 0)] + dev * dev) / var)
        }
        GroupKind::Heterodyne | GroupKind::Joint => {
            let c = if g.kind == GroupKind::Heterodyne {
                cov + Matrix2::identity()
            } else {
                *cov
            };
            let det = c.determinant();
            let inv = Matrix2::new(c[(1, 1)], -c[(0, 1)], -c[(1, 0)], c[(0, 0)]) / det;
            let dev = g.mean - mu;
            let s = g.scatter + dev * dev.transpose();
            -0.5 * n * (det.ln() + (inv * s).trace())
        }
    }
}

/// Maximum-likelihood phase from per-group sufficient statistics: a 64-point
/// grid over `(−π, π]` followed by golden-section refinement.
pub fn est_phase_ml_from_groups(
    groups: &[GroupMoments],
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    if groups.is_empty() {
        return Err(Error::InsufficientData("no measurement groups".into()));
    }
    let model = OutputModel::new(setup, noise)?;
    let probe = setup.probe_mean();
    let neg_ll = |phi: f64| -> f64 {
        let b = rotation(phi);
        let mu = model.light_transfer(&b) * probe;
        let cov = model.cov(&b);
        -groups
            .iter()
            .map(|g| group_log_likelihood(g, &mu, &cov))
            .sum::<f64>()
    };
    let step = 2.0 * PI / ML_GRID as f64;
    let (best_k, _) = (0..ML_GRID)
        .map(|k| (k, neg_ll(-PI + step * (k + 1) as f64)))
        .fold(
            (0, f64::INFINITY),
            |acc, (k, v)| if v < acc.1 { (k, v) } else { acc },
        );
    let centre = -PI + step * (best_k + 1) as f64;
    let min = golden_section(&neg_ll, centre - step, centre + step, 1e-10, ML_MAX_ITER)?;
    let mut report = phase_report(min.x, Method::PhaseMl)?;
    report
        .diagnostics
        .insert("iterations".into(), min.iterations as f64);
    report
        .diagnostics
        .insert("neg_log_likelihood".into(), min.f);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{forward, Topology};
    use crate::measurement::{sample, MeasurementPlan, MeasurementScheme};

    fn fig3() -> SetupConfig {
        SetupConfig::new(Topology::Interferometric, 0.1, 0.1, 100.0, 100.0).unwrap()
    }

    fn exact(setup: &SetupConfig, phi: f64) -> MomentEstimate {
        MomentEstimate::exact(
            &forward(setup, &ProcessParams::phase_only(phi).unwrap(), None).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn uv_examples() {
        let uv = phase_uv(&fig3(), None).unwrap();
        assert!((uv.u - 18.82).abs() < 1e-12);
        assert!((uv.v + 17.82).abs() < 1e-12);
        let flat = phase_uv(
            &SetupConfig::new(Topology::Interferometric, 0.1, 0.1, 1.0, 1.0).unwrap(),
            None,
        )
        .unwrap();
        assert!(flat.v.abs() < 1e-15);
        let no_t1 = phase_uv(
            &SetupConfig::new(Topology::Interferometric, 0.0, 0.1, 100.0, 1.0).unwrap(),
            None,
        )
        .unwrap();
        assert!(no_t1.v.abs() < 1e-15);
        assert!((no_t1.u - (0.9 + 0.1 * 100.0)).abs() < 1e-12);
    }

    #[test]
    fn uv_stays_physical() {
        for &(t1, t2, v) in &[
            (0.1, 0.1, 100.0),
            (0.5, 0.3, 2.0),
            (0.9, 0.9, 1000.0),
            (0.01, 0.99, 50.0),
        ] {
            let s = SetupConfig::new(Topology::Interferometric, t1, t2, v, 1.0).unwrap();
            let uv = phase_uv(&s, None).unwrap();
            for k in 0..100 {
                let phi = -PI + k as f64 * 0.0628;
                assert!(uv.variance(phi) >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn exact_inversions() {
        for &phi in &[0.7, -0.7, 2.0, -2.5, 3.0] {
            let m = exact(&fig3(), phi);
            let var = est_phase_var(&m, &fig3(), None).unwrap();
            assert!(
                (var.params.phi - phi).abs() < 1e-6,
                "{phi} {}",
                var.params.phi
            );
            let mean = est_phase_mean(&m, &fig3(), None).unwrap();
            assert!((mean.params.phi - phi).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_estimator_uses_full_circle_near_pi() {
        let m = exact(&fig3(), 3.0);
        let naive_arctan = (m.mean.y / (m.mean.x - 90.0)).atan();
        assert!((naive_arctan - 3.0).abs() > 1.0);
        assert!((est_phase_mean(&m, &fig3(), None).unwrap().params.phi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn variance_estimator_clamps() {
        let mut m = exact(&fig3(), 0.0);
        let uv = phase_uv(&fig3(), None).unwrap();
        // push the arccos argument to 1.02
        let target = uv.u + 1.02 * uv.v;
        m.cov = Matrix2::identity() * target;
        let r = est_phase_var(&m, &fig3(), None).unwrap();
        assert_eq!(r.params.phi, 0.0);
        assert!(r.has_flag("clamped"));
        assert!((r.diagnostics["arccos_argument"] - 1.02).abs() < 1e-12);
        assert!(!r.params.phi.is_nan());
    }

    #[test]
    fn variance_estimator_without_probe_reports_magnitude() {
        let s = fig3();
        let dark = SetupConfig { r_amp: 0.0, ..s };
        let r = est_phase_var(&exact(&dark, -0.7), &dark, None).unwrap();
        assert!((r.params.phi - 0.7).abs() < 1e-6);
        assert!(r.has_flag("sign_unresolved"));
        assert!(matches!(
            est_phase_mean(&exact(&dark, 0.7), &dark, None),
            Err(Error::Unidentifiable(_))
        ));
        let flat = SetupConfig {
            v_thermal: 1.0,
            ..s
        };
        assert!(matches!(
            est_phase_var(&exact(&flat, 0.7), &flat, None),
            Err(Error::Unidentifiable(_))
        ));
    }

    #[test]
    fn probe_phase_is_accounted_for() {
        let s = fig3().with_probe_phase(1.1);
        let m = exact(&s, -0.4);
        assert!((est_phase_mean(&m, &s, None).unwrap().params.phi + 0.4).abs() < 1e-9);
        assert!((est_phase_var(&m, &s, None).unwrap().params.phi + 0.4).abs() < 1e-6);
    }

    fn exact_groups(setup: &SetupConfig, phi: f64, kind: GroupKind, n: usize) -> Vec<GroupMoments> {
        let m = exact(setup, phi);
        let mut scatter = m.cov;
        if kind == GroupKind::Heterodyne {
            scatter += Matrix2::identity();
        }
        vec![GroupMoments {
            kind,
            n,
            mean: m.mean,
            scatter,
        }]
    }

    #[test]
    fn ml_recovers_phase_from_exact_statistics() {
        for &phi in &[0.7, -2.0, 3.1, 0.0] {
            for kind in [GroupKind::Joint, GroupKind::Heterodyne] {
                let g = exact_groups(&fig3(), phi, kind, 100_000);
                let r = est_phase_ml_from_groups(&g, &fig3(), None).unwrap();
                assert!(crate::angle::circular_diff(r.params.phi, phi, 2.0 * PI).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn ml_on_homodyne_groups() {
        let s = fig3();
        let m = exact(&s, 0.7);
        let groups: Vec<GroupMoments> = [0.0, std::f64::consts::FRAC_PI_2]
            .iter()
            .map(|&th| {
                let e = Vector2::new(f64::cos(th), f64::sin(th));
                GroupMoments {
                    kind: GroupKind::Homodyne(th),
                    n: 50_000,
                    mean: Vector2::new(e.dot(&m.mean), 0.0),
                    scatter: Matrix2::new((m.cov * e).dot(&e), 0.0, 0.0, 0.0),
                }
            })
            .collect();
        let r = est_phase_ml_from_groups(&groups, &s, None).unwrap();
        assert!((r.params.phi - 0.7).abs() < 1e-6);
    }

    #[test]
    fn ml_on_sampled_data_is_close() {
        let s = fig3();
        let st = forward(&s, &ProcessParams::phase_only(0.7).unwrap(), None).unwrap();
        let plan = MeasurementPlan::new(MeasurementScheme::Joint, 100_000, 3).unwrap();
        let summary = SampleSummary::new(&sample(&st, &plan).unwrap());
        let r = est_phase_ml(&summary, &s, None).unwrap();
        // CRB standard deviation is about 0.0007 here
        assert!((r.params.phi - 0.7).abs() < 0.005);
    }
}
