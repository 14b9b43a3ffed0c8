use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::{probe_vector, EstimateReport, Method, ProbeMoments, AXIS_UNDEFINED_BELOW};
use crate::angle::wrap_pi;
use crate::error::{Diagnostics, Error, Result};
use crate::gaussian::{polar_decompose_2x2, rotation, squeeze, ProcessParams};
use crate::interferometer::{NoiseParams, OutputModel, SetupConfig};
use crate::optimize::nelder_mead;

const W_MAX: f64 = 3.0;
const SEEDS: usize = 8;
const NM_TOL: f64 = 1e-20;
const NM_MAX_ITER: u64 = 2000;

fn params_from_linear(
    b: &Matrix2<f64>,
    d: &Vector2<f64>,
    report: &mut Diagnostics,
) -> Result<ProcessParams> {
    let polar = polar_decompose_2x2(b)?;
    let mut alpha = polar.alpha;
    if polar.w < AXIS_UNDEFINED_BELOW || !polar.axis_defined {
        alpha = 0.0;
        report.insert("axis_undefined".into(), 1.0);
    }
    ProcessParams::new(polar.phi, polar.w, alpha, d.norm(), d.y.atan2(d.x))
}

fn check_probes(probes: &[ProbeMoments]) -> Result<()> {
    if probes.is_empty() {
        return Err(Error::InsufficientData("no probe moments supplied".into()));
    }
    Ok(())
}

/// Displacement implied by each probe for a candidate linear part.
fn probe_displacements(
    b: &Matrix2<f64>,
    probes: &[ProbeMoments],
    setup: &SetupConfig,
    model: &OutputModel,
) -> Vec<Vector2<f64>> {
    let al = model.light_transfer(b);
    probes
        .iter()
        .map(|p| (p.moments.mean - al * probe_vector(setup, p.phase)) / model.displacement_gain)
        .collect()
}

/// Exact solutions `B` with `det B = 1` of `a·BBᵀ + b·(B + Bᵀ) + c·I = Σ`.
///
/// Writing `X = B + κI` with `κ = b/a` turns the equation into
/// `XXᵀ = P = (Σ − cI + (b²/a)·I)/a`, so `X = P^½·O` with `O` orthogonal.
/// The unit-determinant condition fixes `O` up to at most two rotations and
/// two reflections.
fn closed_form_roots(sigma: &Matrix2<f64>, model: &OutputModel) -> Vec<Matrix2<f64>> {
    let (a, b, c) = model.cov_coefficients();
    if !(a > 0.0) {
        return Vec::new();
    }
    let kappa = b / a;
    if kappa.abs() < 1e-9 {
        return Vec::new();
    }
    let p = (sigma - Matrix2::identity() * c + Matrix2::identity() * (b * b / a)) / a;
    let eig = p.symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !(*v > 0.0)) {
        return Vec::new();
    }
    let root = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let det_root = root.determinant();
    let mut out = Vec::new();
    let mut push = |o: Matrix2<f64>| {
        let bm = root * o - Matrix2::identity() * kappa;
        if bm.determinant() > 0.0 {
            out.push(bm);
        }
    };

    let cos_rot = (det_root + kappa * kappa - 1.0) / (kappa * root.trace());
    if cos_rot.abs() <= 1.0 + 1e-12 {
        let theta = cos_rot.clamp(-1.0, 1.0).acos();
        push(rotation(theta));
        push(rotation(-theta));
    }

    let ca = root[(0, 0)] - root[(1, 1)];
    let cb = 2.0 * root[(0, 1)];
    let rhs = (kappa * kappa - 1.0 - det_root) / kappa;
    let amp = ca.hypot(cb);
    if amp > 0.0 && (rhs / amp).abs() <= 1.0 + 1e-12 {
        let base = cb.atan2(ca);
        let spread = (rhs / amp).clamp(-1.0, 1.0).acos();
        for theta in [base + spread, base - spread] {
            let (s, co) = theta.sin_cos();
            push(Matrix2::new(co, s, s, -co));
        }
    }
    out
}

fn linear_of(x: &[f64]) -> Matrix2<f64> {
    rotation(x[0]) * squeeze(x[1], x[2])
}

fn relative_residual(sigma: &Matrix2<f64>, model: &OutputModel, b: &Matrix2<f64>) -> f64 {
    (model.cov(b) - sigma).norm() / sigma.norm()
}

fn fit_objective<'a>(
    sigma: &'a Matrix2<f64>,
    model: &'a OutputModel,
) -> impl Fn(&[f64]) -> f64 + 'a {
    let scale = sigma.norm_squared();
    move |x: &[f64]| {
        let over = (x[1].abs() - W_MAX).max(0.0);
        (model.cov(&linear_of(x)) - sigma).norm_squared() / scale + 1e6 * over * over
    }
}

fn pooled_covariance(probes: &[ProbeMoments]) -> Result<Matrix2<f64>> {
    if let Some(p) = probes.iter().find(|p| !p.moments.has_covariance()) {
        return Err(Error::InsufficientData(format!(
            "the probe at phase {:.4} has no off-diagonal covariance estimate",
            p.phase
        )));
    }
    let total: f64 = probes.iter().map(|p| weight(p)).sum();
    Ok(probes.iter().fold(Matrix2::zeros(), |acc, p| {
        acc + p.moments.cov * (weight(p) / total)
    }))
}

fn weight(p: &ProbeMoments) -> f64 {
    match p.moments.min_count() {
        usize::MAX => 1.0,
        n => n as f64,
    }
}

fn min_count(probes: &[ProbeMoments]) -> usize {
    probes
        .iter()
        .map(|p| p.moments.min_count())
        .min()
        .unwrap_or(0)
}

/// Largest relative residual accepted from the covariance fit.
fn rejection_threshold(probes: &[ProbeMoments]) -> f64 {
    let n = min_count(probes);
    if n == usize::MAX {
        1e-6
    } else {
        (8.0 * (2.0 / n as f64).sqrt()).max(1e-6)
    }
}

struct Candidate {
    b: Matrix2<f64>,
    residual: f64,
}

fn search_candidates(sigma: &Matrix2<f64>, model: &OutputModel) -> Result<(Vec<Candidate>, u64)> {
    let objective = fit_objective(sigma, model);
    let mut candidates: Vec<Candidate> = closed_form_roots(sigma, model)
        .into_iter()
        .map(|b| Candidate {
            residual: relative_residual(sigma, model, &b),
            b,
        })
        .collect();

    let mut grid = Vec::new();
    for i in 0..8 {
        for &w in &[0.25, 0.75, 1.5, 2.5] {
            for j in 0..8 {
                let x = [
                    -PI + (i as f64 + 0.5) * PI / 4.0,
                    w,
                    -PI + (j as f64 + 0.5) * PI / 4.0,
                ];
                grid.push((objective(&x), x));
            }
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut iterations = 0;
    for (_, seed) in grid.iter().take(SEEDS) {
        let m = nelder_mead(&objective, seed, &[0.2, 0.2, 0.2], NM_TOL, NM_MAX_ITER)?;
        iterations += m.iterations;
        // polish from the best vertex
        let m = nelder_mead(&objective, &m.x, &[0.01, 0.01, 0.01], NM_TOL, NM_MAX_ITER)?;
        iterations += m.iterations;
        if m.x[1].abs() > W_MAX + 1e-9 {
            continue;
        }
        let b = linear_of(&m.x);
        candidates.push(Candidate {
            residual: relative_residual(sigma, model, &b),
            b,
        });
    }

    let mut distinct: Vec<Candidate> = Vec::new();
    for c in candidates {
        match distinct
            .iter_mut()
            .find(|d| (d.b - c.b).norm() < 1e-6 * (1.0 + c.b.norm()))
        {
            Some(d) if c.residual < d.residual => *d = c,
            Some(_) => {}
            None => distinct.push(c),
        }
    }
    Ok((distinct, iterations))
}

fn spread(ds: &[Vector2<f64>]) -> f64 {
    let mean = ds.iter().sum::<Vector2<f64>>() / ds.len() as f64;
    ds.iter().map(|d| (d - mean).norm_squared()).sum::<f64>() / ds.len() as f64
}

/// Covariance method: fit the process squeezing and rotation to the output
/// covariance, then read the displacement off the remaining mean.
///
/// The covariance alone admits several exact solutions. Among the fits whose
/// residual is close to the best one, the solution whose implied displacement
/// agrees best across the supplied probes is chosen.
pub fn est_general_cov(
    probes: &[ProbeMoments],
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    check_probes(probes)?;
    let model = OutputModel::new(setup, noise)?;
    if !(model.displacement_gain > 0.0) {
        return Err(Error::Unidentifiable(
            "the displacement gain vanishes (T2 = 0)".into(),
        ));
    }
    let sigma = pooled_covariance(probes)?;
    let threshold = rejection_threshold(probes);
    let (candidates, iterations) = search_candidates(&sigma, &model)?;
    let best_residual = candidates
        .iter()
        .map(|c| c.residual)
        .fold(f64::INFINITY, f64::min);
    if !best_residual.is_finite() {
        let mut diagnostics = Diagnostics::new();
        diagnostics.insert("iterations".into(), iterations as f64);
        return Err(Error::EstimationFailed {
            reason: "no admissible covariance fit".into(),
            diagnostics,
        });
    }
    if best_residual > threshold {
        return Err(Error::FitRejected {
            residual: best_residual,
            threshold,
        });
    }
    let keep = best_residual + 0.25 * threshold;
    let scored: Vec<(f64, f64, &Candidate, Vec<Vector2<f64>>)> = candidates
        .iter()
        .filter(|c| c.residual <= keep)
        .map(|c| {
            let ds = probe_displacements(&c.b, probes, setup, &model);
            (spread(&ds), c.residual, c, ds)
        })
        .collect();
    let (best_spread, residual, chosen, ds) = scored
        .iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)))
        .expect("at least the best candidate is kept");

    let d = ds.iter().sum::<Vector2<f64>>() / ds.len() as f64;
    let mut report = EstimateReport::new(ProcessParams::identity(), Method::CovMethod);
    report.params = params_from_linear(&chosen.b, &d, &mut report.diagnostics)?;
    report.diagnostics.insert("residual".into(), *residual);
    report.diagnostics.insert("threshold".into(), threshold);
    report
        .diagnostics
        .insert("branches".into(), scored.len() as f64);
    report
        .diagnostics
        .insert("probe_spread".into(), *best_spread);
    report
        .diagnostics
        .insert("iterations".into(), iterations as f64);
    Ok(report)
}

/// Covariance method restricted to the solution branch around `start`; used to
/// re-evaluate the fit on resampled data.
pub fn est_general_cov_near(
    probes: &[ProbeMoments],
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
    start: &ProcessParams,
) -> Result<EstimateReport> {
    check_probes(probes)?;
    let model = OutputModel::new(setup, noise)?;
    let sigma = pooled_covariance(probes)?;
    let objective = fit_objective(&sigma, &model);
    let x0 = [start.phi, start.w.max(0.05), start.alpha];
    let m = nelder_mead(&objective, &x0, &[0.01, 0.01, 0.01], NM_TOL, NM_MAX_ITER)?;
    let b = linear_of(&m.x);
    let ds = probe_displacements(&b, probes, setup, &model);
    let d = ds.iter().sum::<Vector2<f64>>() / ds.len() as f64;
    let mut report = EstimateReport::new(ProcessParams::identity(), Method::CovMethod);
    report.params = params_from_linear(&b, &d, &mut report.diagnostics)?;
    report
        .diagnostics
        .insert("residual".into(), relative_residual(&sigma, &model, &b));
    Ok(report)
}

/// Output-mean response `M̂` and offset `K̂` from the three-probe protocol
/// at phases `ψ`, `ψ + π`, `ψ + π/2`.
fn probe_response(
    probes: &[ProbeMoments],
    setup: &SetupConfig,
) -> Result<(Matrix2<f64>, Vector2<f64>)> {
    if probes.len() != 3 {
        return Err(Error::InsufficientData(format!(
            "the mean method needs three probes, got {}",
            probes.len()
        )));
    }
    let base = probes[0].phase;
    let expected = super::probe_phases(base);
    for (p, e) in probes.iter().zip(expected) {
        if wrap_pi(p.phase - e).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "probe phases must be ψ, ψ+π, ψ+π/2; got {:.6} where {:.6} was expected",
                p.phase, e
            )));
        }
    }
    let r = setup.r_amp;
    if !(r > 0.0) {
        return Err(Error::Unidentifiable("the mean method needs r > 0".into()));
    }
    let (ma, mb, mc) = (
        probes[0].moments.mean,
        probes[1].moments.mean,
        probes[2].moments.mean,
    );
    let k = (ma + mb) / 2.0;
    let c1 = (ma - mb) / (2.0 * r);
    let c2 = (mc - k) / r;
    let response = Matrix2::from_columns(&[c1, c2]) * rotation(-base);
    Ok((response, k))
}

/// Mean method: invert the linear response of the output mean measured with
/// three probe phases.
pub fn est_general_mean(
    probes: &[ProbeMoments],
    setup: &SetupConfig,
    noise: Option<&NoiseParams>,
) -> Result<EstimateReport> {
    let model = OutputModel::new(setup, noise)?;
    let (response, k) = probe_response(probes, setup)?;
    if !(model.light_via_process > 0.0) {
        return Err(Error::Unidentifiable(
            "the probe light does not pass through the process".into(),
        ));
    }
    let b = (response - Matrix2::identity() * model.light_direct) / model.light_via_process;
    let d = k / model.displacement_gain;
    let mut report = EstimateReport::new(ProcessParams::identity(), Method::MeanMethod);
    report.params = params_from_linear(&b, &d, &mut report.diagnostics)?;
    report.diagnostics.insert("det_b".into(), b.determinant());
    Ok(report)
}

/// Channel parameters recovered with the process switched off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub noise: NoiseParams,
    pub diagnostics: Diagnostics,
}

/// Estimates the loss and bath variance from three-probe data taken with
/// the identity process: the mean gain gives `t_c` and the excess output
/// variance gives `v_c`.
pub fn est_noise(probes: &[ProbeMoments], setup: &SetupConfig) -> Result<NoiseEstimate> {
    let (response, _) = probe_response(probes, setup)?;
    let ideal = OutputModel::new(setup, None)?;
    if !(ideal.light_via_process > 0.0) {
        return Err(Error::Unidentifiable(
            "the probe light does not pass through the lossy matter".into(),
        ));
    }
    let gain = 0.5 * response.trace();
    let sqrt_tc = (gain - ideal.light_direct) / ideal.light_via_process;
    let raw_tc = sqrt_tc * sqrt_tc;
    if !(sqrt_tc > 0.0) || raw_tc > 1.1 {
        return Err(Error::CalibrationFailed(format!(
            "measured gain {gain:.6} implies t_c = {}",
            if sqrt_tc > 0.0 { raw_tc } else { f64::NAN }
        )));
    }
    let t_c = raw_tc.min(1.0);
    let mut diagnostics = Diagnostics::new();
    diagnostics.insert("raw_t_c".into(), raw_tc);

    let lossy = OutputModel::new(setup, Some(&NoiseParams { t_c, v_c: 1.0 }))?;
    let var = probes
        .iter()
        .map(|p| 0.5 * p.moments.cov.trace())
        .sum::<f64>()
        / probes.len() as f64;
    let base = (lossy.light_via_process + lossy.light_direct).powi(2)
        + lossy.v_thermal * (lossy.matter_via_process + lossy.matter_direct).powi(2);
    let lever = setup.t2 * (1.0 - t_c);
    let v_c = if lever > 1e-9 {
        let raw = (var - base) / lever;
        diagnostics.insert("raw_v_c".into(), raw);
        raw.max(1.0)
    } else {
        diagnostics.insert("v_c_unobservable".into(), 1.0);
        1.0
    };
    Ok(NoiseEstimate {
        noise: NoiseParams::new(t_c, v_c)?,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::circular_diff;
    use crate::estimators::probe_phases;
    use crate::interferometer::{forward, Topology};
    use crate::measurement::MomentEstimate;
    use proptest::prelude::*;

    fn fig4() -> (SetupConfig, ProcessParams) {
        (
            SetupConfig::new(Topology::Interferometric, 0.1, 0.1, 100.0, 100.0).unwrap(),
            ProcessParams::from_q(0.7, 2.0, -0.3, 4.0, 0.5).unwrap(),
        )
    }

    fn exact_probes(
        setup: &SetupConfig,
        p: &ProcessParams,
        noise: Option<&NoiseParams>,
        base: f64,
    ) -> Vec<ProbeMoments> {
        probe_phases(base)
            .iter()
            .map(|&phase| ProbeMoments {
                phase,
                moments: MomentEstimate::exact(
                    &forward(&setup.with_probe_phase(phase), p, noise).unwrap(),
                )
                .unwrap(),
            })
            .collect()
    }

    fn assert_close(a: &ProcessParams, b: &ProcessParams, tol: f64) {
        let tau = 2.0 * PI;
        assert!(
            circular_diff(a.phi, b.phi, tau).abs() < tol,
            "phi {a:?} vs {b:?}"
        );
        assert!((a.w - b.w).abs() < tol, "w {a:?} vs {b:?}");
        assert!(
            circular_diff(a.alpha, b.alpha, tau).abs() < tol,
            "alpha {a:?} vs {b:?}"
        );
        assert!((a.d - b.d).abs() < tol, "d {a:?} vs {b:?}");
        assert!(
            circular_diff(a.beta, b.beta, tau).abs() < tol,
            "beta {a:?} vs {b:?}"
        );
    }

    #[test]
    fn closed_form_roots_reproduce_covariance() {
        let (s, p) = fig4();
        let model = OutputModel::new(&s, None).unwrap();
        let sigma = model.cov(&p.linear());
        let roots = closed_form_roots(&sigma, &model);
        assert_eq!(roots.len(), 4);
        for b in &roots {
            assert!((b.determinant() - 1.0).abs() < 1e-9);
            assert!((model.cov(b) - sigma).norm() < 1e-9 * sigma.norm());
        }
        assert!(roots.iter().any(|b| (b - p.linear()).norm() < 1e-9));
    }

    #[test]
    fn both_methods_recover_figure_point_exactly() {
        let (s, p) = fig4();
        let probes = exact_probes(&s, &p, None, 0.0);
        let cov = est_general_cov(&probes, &s, None).unwrap();
        assert_close(&cov.params, &p, 1e-6);
        let mean = est_general_mean(&probes, &s, None).unwrap();
        assert_close(&mean.params, &p, 1e-12);
    }

    #[test]
    fn methods_handle_loss_and_base_phase() {
        let (s, p) = fig4();
        let noise = NoiseParams::new(0.7, 1.2).unwrap();
        let probes = exact_probes(&s, &p, Some(&noise), 0.9);
        assert_close(
            &est_general_mean(&probes, &s, Some(&noise)).unwrap().params,
            &p,
            1e-10,
        );
        assert_close(
            &est_general_cov(&probes, &s, Some(&noise)).unwrap().params,
            &p,
            1e-6,
        );
    }

    #[test]
    fn mean_method_displacement_ignores_linear_part() {
        let s = fig4().0;
        for &(phi, q, alpha) in &[(0.7, 2.0, -0.3), (-2.0, 1.0, 0.0), (3.0, 5.0, 1.2)] {
            let p = ProcessParams::from_q(phi, q, alpha, 4.0, 0.5).unwrap();
            let r = est_general_mean(&exact_probes(&s, &p, None, 0.0), &s, None).unwrap();
            assert!((r.params.d - 4.0).abs() < 1e-12);
            assert!((r.params.beta - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unsqueezed_process_has_undefined_axis() {
        let s = fig4().0;
        let p = ProcessParams::new(0.7, 0.0, 0.0, 4.0, 0.5).unwrap();
        let r = est_general_mean(&exact_probes(&s, &p, None, 0.0), &s, None).unwrap();
        assert!(r.has_flag("axis_undefined"));
        assert_eq!(r.params.alpha, 0.0);
    }

    #[test]
    fn mean_method_input_validation() {
        let (s, p) = fig4();
        let probes = exact_probes(&s, &p, None, 0.0);
        assert!(matches!(
            est_general_mean(&probes[..2], &s, None),
            Err(Error::InsufficientData(_))
        ));
        let mut shuffled = probes.clone();
        shuffled.swap(1, 2);
        assert!(matches!(
            est_general_mean(&shuffled, &s, None),
            Err(Error::InvalidArgument(_))
        ));
        let dark = SetupConfig { r_amp: 0.0, ..s };
        assert!(matches!(
            est_general_mean(&exact_probes(&dark, &p, None, 0.0), &dark, None),
            Err(Error::Unidentifiable(_))
        ));
    }

    #[test]
    fn mean_method_rejects_reflections() {
        let (s, p) = fig4();
        let mut probes = exact_probes(&s, &p, None, 0.0);
        // mirror the response so that det B < 0
        for pr in probes.iter_mut() {
            pr.moments.mean.y = 2.0 * probes_baseline_y(&s, pr.phase) - pr.moments.mean.y;
        }
        assert!(matches!(
            est_general_mean(&probes, &s, None),
            Err(Error::DecompositionFailed(_))
        ));
    }

    fn probes_baseline_y(s: &SetupConfig, phase: f64) -> f64 {
        let model = OutputModel::new(s, None).unwrap();
        (probe_vector(s, phase) * model.light_direct).y
    }

    #[test]
    fn cov_method_rejects_mismatched_model() {
        let (s, p) = fig4();
        let mut probes = exact_probes(&s, &p, None, 0.0);
        for pr in probes.iter_mut() {
            pr.moments.cov = Matrix2::identity() * 0.05;
        }
        match est_general_cov(&probes, &s, None) {
            Err(Error::FitRejected {
                residual,
                threshold,
            }) => assert!(residual > threshold),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cov_method_requires_full_covariance() {
        let (s, p) = fig4();
        let mut probes = exact_probes(&s, &p, None, 0.0);
        probes[0].moments.n_effective.xp = 0;
        assert!(matches!(
            est_general_cov(&probes, &s, None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn near_fit_stays_on_branch() {
        let (s, p) = fig4();
        let probes = exact_probes(&s, &p, None, 0.0);
        let start = ProcessParams::from_q(0.72, 2.05, -0.28, 4.0, 0.5).unwrap();
        let r = est_general_cov_near(&probes, &s, None, &start).unwrap();
        assert_close(&r.params, &p, 1e-6);
    }

    #[test]
    fn noise_calibration_exact() {
        let s = fig4().0;
        for &(tc, vc) in &[(1.0, 1.0), (0.8, 1.2), (0.5, 3.0)] {
            let noise = NoiseParams::new(tc, vc).unwrap();
            let probes = exact_probes(&s, &ProcessParams::identity(), Some(&noise), 0.0);
            let est = est_noise(&probes, &s).unwrap();
            assert!((est.noise.t_c - tc).abs() < 1e-10);
            assert!((est.noise.v_c - vc).abs() < 1e-8);
        }
    }

    #[test]
    fn noise_calibration_fails_on_unphysical_gain() {
        let s = fig4().0;
        let mut probes = exact_probes(&s, &ProcessParams::identity(), None, 0.0);
        for pr in probes.iter_mut() {
            pr.moments.mean *= 1.5;
        }
        assert!(matches!(
            est_noise(&probes, &s),
            Err(Error::CalibrationFailed(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_inversion_over_parameter_space(
            phi in -3.1..3.1f64, w in 0.05..2.0f64, alpha in -3.1..3.1f64,
            d in 0.5..8.0f64, beta in -3.1..3.1f64,
            t in 0.05..0.5f64, v in 5.0..300.0f64,
        ) {
            let s = SetupConfig::new(Topology::Interferometric, t, t, v, 50.0).unwrap();
            let p = ProcessParams::new(phi, w, alpha, d, beta).unwrap();
            let probes = exact_probes(&s, &p, None, 0.0);
            let mean = est_general_mean(&probes, &s, None).unwrap();
            prop_assert!((mean.params.linear() - p.linear()).norm() < 1e-9);
            let cov = est_general_cov(&probes, &s, None).unwrap();
            prop_assert!((cov.params.linear() - p.linear()).norm() < 1e-6, "{:?} vs {:?}", cov.params, p);
            prop_assert!((cov.params.d - d).abs() < 1e-6);
        }
    }
}
