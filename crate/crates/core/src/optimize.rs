//! Thin wrappers around the argmin derivative-free minimisers.

use argmin::core::{CostFunction, Executor, State, TerminationReason};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::neldermead::NelderMead;

use crate::error::{Diagnostics, Error, Result};

struct Objective<F>(F);

impl<F: Fn(f64) -> f64> CostFunction for Objective<F> {
    type Param = f64;
    type Output = f64;

    fn cost(&self, x: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(*x))
    }
}

struct ObjectiveNd<F>(F);

impl<F: Fn(&[f64]) -> f64> CostFunction for ObjectiveNd<F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.0)(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum<P> {
    pub x: P,
    pub f: f64,
    pub iterations: u64,
    pub converged: bool,
}

fn failure(reason: impl Into<String>, iterations: u64) -> Error {
    let mut diagnostics = Diagnostics::new();
    diagnostics.insert("iterations".into(), iterations as f64);
    Error::EstimationFailed {
        reason: reason.into(),
        diagnostics,
    }
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`,
/// to an absolute bracket width of about `tol·(hi − lo)`.
///
/// Fails if the bracket has not shrunk within `max_iter` iterations.
pub fn golden_section<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: u64,
) -> Result<Minimum<f64>> {
    if !(hi > lo) {
        return Err(failure("empty search interval", 0));
    }
    // argmin's stopping rule is relative to |x|; searching t ∈ [1, 2] makes it
    // effectively absolute.
    let width = hi - lo;
    let solver = GoldenSectionSearch::new(1.0, 2.0)
        .and_then(|s| s.with_tolerance(tol / 3.0))
        .map_err(|e| failure(e.to_string(), 0))?;
    let res = Executor::new(Objective(|t: f64| f(lo + width * (t - 1.0))), solver)
        .configure(|s| s.param(1.5).max_iters(max_iter))
        .run()
        .map_err(|e| failure(e.to_string(), 0))?;
    let state = res.state();
    let iterations = state.get_iter();
    if state.get_termination_reason() != Some(&TerminationReason::SolverConverged) {
        return Err(failure(
            format!("golden-section search did not converge in {max_iter} iterations"),
            iterations,
        ));
    }
    let t = *state
        .get_best_param()
        .ok_or_else(|| failure("no best point", iterations))?;
    Ok(Minimum {
        x: lo + width * (t - 1.0),
        f: state.get_best_cost(),
        iterations,
        converged: true,
    })
}

/// Downhill-simplex minimisation started from an axis-aligned simplex around
/// `start` with per-coordinate `step`. Stops when the spread of simplex
/// values falls below `f_tol` or after `max_iter` iterations.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    step: &[f64],
    f_tol: f64,
    max_iter: u64,
) -> Result<Minimum<Vec<f64>>> {
    let mut simplex = vec![start.to_vec()];
    for (k, h) in step.iter().enumerate() {
        let mut v = start.to_vec();
        v[k] += h;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(f_tol)
        .map_err(|e| failure(e.to_string(), 0))?;
    let res = Executor::new(ObjectiveNd(f), solver)
        .configure(|s| s.max_iters(max_iter))
        .run()
        .map_err(|e| failure(e.to_string(), 0))?;
    let state = res.state();
    let iterations = state.get_iter();
    let x = state
        .get_best_param()
        .cloned()
        .ok_or_else(|| failure("no best point", iterations))?;
    Ok(Minimum {
        x,
        f: state.get_best_cost(),
        iterations,
        converged: state.get_termination_reason() == Some(&TerminationReason::SolverConverged),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex_near_zero() {
        let m = golden_section(|x| (x - 1e-7).powi(2), -1.0, 1.0, 1e-10, 200).unwrap();
        assert!((m.x - 1e-7).abs() < 1e-9);
        assert!(m.iterations < 200);
    }

    #[test]
    fn golden_section_reports_non_convergence() {
        let err = golden_section(|x| x * x, -1.0, 1.0, 1e-14, 5).unwrap_err();
        match err {
            Error::EstimationFailed { diagnostics, .. } => {
                assert_eq!(diagnostics["iterations"], 5.0)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], 1e-16, 5000).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5);
    }
}
