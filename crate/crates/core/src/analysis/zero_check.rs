use serde::{Deserialize, Serialize};

use crate::equations::EquationId;
use crate::numdiff;
use crate::ode::{detect_zeros, Trajectory, ZeroRecord};

/// Finite-difference step for second derivatives at zeros.
const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZeroCheckTolerances {
    /// Bound on `|s'(a)|` at zeros of full-equation solutions.
    pub slope: f64,
    /// Bound on `|σ''(a)|` at zeros of half-equation solutions.
    pub curvature: f64,
}

impl Default for ZeroCheckTolerances {
    fn default() -> Self {
        Self {
            slope: 1e-8,
            curvature: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroCheck {
    pub zero: ZeroRecord,
    /// `y'(a)` from dense output.
    pub slope: f64,
    /// `y''(a)` from finite differences of dense output.
    pub curvature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroViolation {
    /// Full equation: `s'(a)` must vanish at a zero.
    NonzeroSlope { a: f64, slope: f64 },
    /// Full equation: a solution cannot change sign at an isolated zero.
    SignChange { a: f64 },
    /// Full equation: `s''(a) = 0` at an isolated zero does not arise.
    FlatZero { a: f64, curvature: f64 },
    /// Half equation: `σ''(a)` must vanish at a zero.
    NonzeroCurvature { a: f64, curvature: f64 },
    /// Half equation: a non-trivial solution cannot touch zero without crossing.
    TangentialZero { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub equation: EquationId,
    pub tolerances: ZeroCheckTolerances,
    pub checks: Vec<ZeroCheck>,
    pub violations: Vec<ZeroViolation>,
}

impl ZeroReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the local structure forced at every zero of a solution of `eq`.
pub fn zero_structure_check(
    traj: &Trajectory,
    eq: EquationId,
    tol: &ZeroCheckTolerances,
) -> ZeroReport {
    let (lo, hi) = traj.t_range();
    let y = |t: f64| traj.eval(t.clamp(lo, hi)).map(|p| p.0).unwrap_or(f64::NAN);
    let trivial = traj.max_abs_y() <= traj.control().atol;

    let mut checks = Vec::new();
    let mut violations = Vec::new();
    for zero in detect_zeros(traj) {
        let a = zero.a;
        let slope = traj.eval(a).map(|p| p.1).unwrap_or(zero.v_at_a);
        let curvature = numdiff::second_derivative(y, a, FD_STEP, lo, hi);
        checks.push(ZeroCheck {
            zero,
            slope,
            curvature,
        });

        if eq.is_half() {
            if !(curvature.abs() < tol.curvature) {
                violations.push(ZeroViolation::NonzeroCurvature { a, curvature });
            }
            if !zero.sign_change && !trivial {
                violations.push(ZeroViolation::TangentialZero { a });
            }
        } else {
            if !(slope.abs() < tol.slope) {
                violations.push(ZeroViolation::NonzeroSlope { a, slope });
            }
            if zero.sign_change {
                violations.push(ZeroViolation::SignChange { a });
            }
            // the curvature must be nonzero with the sign of s beside the zero
            let side = side_sign(traj, a);
            if !(curvature * side > tol.curvature) {
                violations.push(ZeroViolation::FlatZero { a, curvature });
            }
        }
    }

    ZeroReport {
        equation: eq,
        tolerances: *tol,
        checks,
        violations,
    }
}

/// Sign of `y` at the nearest node away from `a`.
fn side_sign(traj: &Trajectory, a: f64) -> f64 {
    traj.samples()
        .iter()
        .filter(|n| n.y != 0.0)
        .min_by(|p, q| (p.t - a).abs().total_cmp(&(q.t - a).abs()))
        .map_or(0.0, |n| n.y.signum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{Sample, StepControl, Termination};

    fn sampled(f: impl Fn(f64) -> [f64; 3], t0: f64, t1: f64, n: usize) -> Trajectory {
        let samples = (0..=n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n as f64;
                let [y, v, a] = f(t);
                Sample::new(t, y, v, a)
            })
            .collect();
        Trajectory::new(samples, Termination::ReachedEnd, StepControl::default()).unwrap()
    }

    #[test]
    fn zero_free_report_is_empty() {
        let traj = sampled(|t| [2.0 + t.sin(), t.cos(), -t.sin()], 0.0, 5.0, 50);
        let r = zero_structure_check(&traj, EquationId::Phalf, &Default::default());
        assert!(r.checks.is_empty() && r.is_clean());
    }

    #[test]
    fn full_equation_flags_sign_changes_and_slopes() {
        let traj = sampled(|t| [t, 1.0, 0.0], -1.0, 1.0, 21);
        let r = zero_structure_check(&traj, EquationId::P, &Default::default());
        assert_eq!(r.checks.len(), 1);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ZeroViolation::SignChange { .. })));
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ZeroViolation::NonzeroSlope { .. })));
    }

    #[test]
    fn flat_zero_is_flagged() {
        let traj = sampled(
            |t| [t.powi(4), 4.0 * t.powi(3), 12.0 * t * t],
            -1.0,
            1.0,
            20,
        );
        let r = zero_structure_check(&traj, EquationId::P, &Default::default());
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ZeroViolation::FlatZero { .. })));
    }

    #[test]
    fn half_equation_flags_tangential_zero() {
        let traj = sampled(|t| [t * t, 2.0 * t, 2.0], -1.0, 1.0, 20);
        let r = zero_structure_check(&traj, EquationId::Phalf, &Default::default());
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ZeroViolation::TangentialZero { .. })));
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, ZeroViolation::NonzeroCurvature { .. })));
    }
}
