//! Angle folding and circular distances.

use std::f64::consts::PI;

/// Folds an angle into `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    wrap_period(angle, 2.0 * PI)
}

/// Folds `angle` into `(-period/2, period/2]`.
pub fn wrap_period(angle: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    if angle > -half && angle <= half {
        return angle;
    }
    let mut a = (angle + half).rem_euclid(period) - half;
    if a <= -half {
        a += period;
    }
    a
}

/// Signed shortest distance `a - b` on a circle of the given period.
pub fn circular_diff(a: f64, b: f64, period: f64) -> f64 {
    wrap_period(a - b, period)
}
