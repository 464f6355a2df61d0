//! Maps between solutions: squares, square roots and the two symmetries.
//!
//! Every map acts on node data `(t, y, y', y'')` directly, so the output is
//! again a [`Trajectory`] with consistent dense output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::EquationId;
use crate::numdiff;
use crate::ode::{detect_zeros, hermite, OdeError, Sample, Trajectory, ZeroRecord};

/// Step used for the Richardson estimate of `s''(a)` (paired with `h / 2`).
pub const ZERO_CURVATURE_STEP: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("trajectory is not strictly positive: s = {s:e} at t = {t}")]
    NotStrictlyPositive { t: f64, s: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("found {count} zeros; split the trajectory and root each piece")]
    UnsupportedMultipleZeros { count: usize },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

/// Which branch of `±√s` to take on each side of an isolated zero.
///
/// The signs always differ: taking the same sign on both sides gives a
/// function with a corner at the zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedSqrtPlan {
    pub zero: ZeroRecord,
    left_sign: Sign,
    right_sign: Sign,
}

impl SignedSqrtPlan {
    /// `left_sign` applies for `t <= a`, its opposite for `t >= a`.
    pub fn new(zero: ZeroRecord, left_sign: Sign) -> Self {
        Self {
            zero,
            left_sign,
            right_sign: left_sign.flipped(),
        }
    }

    pub fn left_sign(&self) -> Sign {
        self.left_sign
    }

    pub fn right_sign(&self) -> Sign {
        self.right_sign
    }
}

/// `s = σ²`, `s' = 2σσ'`, `s'' = 2σ'² + 2σσ''` at every node.
pub fn square_trajectory(sigma: &Trajectory) -> Trajectory {
    let samples = sigma
        .samples()
        .iter()
        .map(|n| {
            Sample::new(
                n.t,
                n.y * n.y,
                2.0 * n.y * n.v,
                2.0 * n.v * n.v + 2.0 * n.y * n.a,
            )
        })
        .collect();
    sigma
        .with_samples(samples, sigma.termination())
        .expect("squaring preserves the sample grid")
}

fn root_node(n: &Sample, sign: f64) -> Sample {
    let sigma = sign * n.y.sqrt();
    let sigma_dot = n.v / (2.0 * sigma);
    let sigma_ddot = (n.a - 2.0 * sigma_dot * sigma_dot) / (2.0 * sigma);
    Sample::new(n.t, sigma, sigma_dot, sigma_ddot)
}

/// `σ = +√s`, `σ' = s'/(2σ)` at every node of a strictly positive trajectory.
pub fn sqrt_positive(s: &Trajectory) -> Result<Trajectory, TransformError> {
    if let Some(n) = s.samples().iter().find(|n| !(n.y > 0.0)) {
        return Err(TransformError::NotStrictlyPositive { t: n.t, s: n.y });
    }
    let samples = s.samples().iter().map(|n| root_node(n, 1.0)).collect();
    Ok(s.with_samples(samples, s.termination())?)
}

/// `s''(a)`: the node value when `a` is a node, otherwise a Richardson
/// finite-difference estimate on the dense output.
fn curvature_at(s: &Trajectory, a: f64) -> Result<f64, TransformError> {
    let tol = 1e-12 * a.abs().max(1.0);
    if let Some(n) = s.samples().iter().find(|n| (n.t - a).abs() <= tol) {
        return Ok(n.a);
    }
    let (lo, hi) = s.t_range();
    let y = |t: f64| s.eval(t.clamp(lo, hi)).map(|p| p.0).unwrap_or(f64::NAN);
    Ok(numdiff::second_derivative(
        y,
        a,
        ZERO_CURVATURE_STEP,
        lo,
        hi,
    ))
}

/// Sign-mixed square root of a nonnegative trajectory with one isolated zero.
///
/// Nodes at `t < a` take `left_sign·√s`, nodes at `t > a` take
/// `right_sign·√s`, and a node with `σ = 0` and `σ'' = 0` is inserted at the
/// zero. When `a` lies between two root nodes the zero is refined on their
/// interpolant and `σ'` read off it there; otherwise `σ'(a) = √(s''(a)/2)`.
pub fn signed_sqrt_at_zero(
    s: &Trajectory,
    plan: &SignedSqrtPlan,
) -> Result<Trajectory, TransformError> {
    if let Some(n) = s.samples().iter().find(|n| n.y < 0.0) {
        return Err(TransformError::InvalidInput(format!(
            "s changes sign (s = {:e} at t = {}); a solution cannot change sign at an isolated zero",
            n.y, n.t
        )));
    }
    let zeros = detect_zeros(s);
    if zeros.iter().any(|z| z.sign_change) {
        return Err(TransformError::InvalidInput(
            "s changes sign at a zero".into(),
        ));
    }
    if zeros.len() > 1 {
        return Err(TransformError::UnsupportedMultipleZeros { count: zeros.len() });
    }
    let a = plan.zero.a;
    let scale = a.abs().max(1.0);
    match zeros.first() {
        None => {
            return Err(TransformError::InvalidInput(format!(
                "no zero of s found near a = {a}"
            )))
        }
        Some(z) if (z.a - a).abs() > 1e-8 * scale => {
            return Err(TransformError::InvalidInput(format!(
                "plan zero a = {a} does not match the detected zero at {}",
                z.a
            )))
        }
        Some(_) => {}
    }

    let right = plan.right_sign().value();
    let left = plan.left_sign().value();

    // nodes this close to a lose all digits in σ'' = (s'' - 2σ'^2)/(2σ)
    let exclusion = 1e-7 * scale;
    let roots: Vec<Sample> = s
        .samples()
        .iter()
        .filter(|n| (n.t - a).abs() > exclusion)
        .map(|n| root_node(n, if n.t < a { left } else { right }))
        .collect();
    let dir = s.direction();
    let split = roots.partition_point(|n| (n.t - a) * dir < 0.0);

    // when a is bracketed, the zero and σ'(a) come from the interpolant
    // between the neighbouring root nodes; otherwise σ'(a) = √(s''(a)/2)
    let (a, slope) = if split > 0 && split < roots.len() {
        let (l, r) = (&roots[split - 1], &roots[split]);
        let exact = s.samples().iter().any(|n| n.t == a && n.y == 0.0);
        let root = if exact {
            a
        } else {
            crate::ode::bisect_root(|t| hermite(l, r, t).y, l.t, r.t)
        };
        (root, hermite(l, r, root).v)
    } else {
        let curvature = curvature_at(s, a)?;
        if !(curvature >= 0.0) {
            return Err(TransformError::InvalidInput(format!(
                "s''(a) = {curvature:e} is negative at a nonnegative zero"
            )));
        }
        (a, right * (0.5 * curvature).sqrt())
    };
    let mut samples = roots;
    samples.insert(split, Sample::new(a, 0.0, slope, 0.0));
    Ok(s.with_samples(samples, s.termination())?)
}

/// `y -> -y`; `P` and `P̄` swap, the half-equations map to themselves.
pub fn negate_dependent(traj: &Trajectory, eq: EquationId) -> (Trajectory, EquationId) {
    let samples = traj
        .samples()
        .iter()
        .map(|n| Sample::new(n.t, -n.y, -n.v, -n.a))
        .collect();
    let out = traj
        .with_samples(samples, traj.termination())
        .expect("negation preserves the sample grid");
    (out, eq.negated())
}

/// `t -> -t`; `P ↔ P̄` and `P½ ↔ P̄½`. Samples are reversed so the output
/// runs along the reflected direction of travel.
pub fn reverse_time(traj: &Trajectory, eq: EquationId) -> (Trajectory, EquationId) {
    let samples = traj
        .samples()
        .iter()
        .map(|n| Sample::new(-n.t, n.y, -n.v, n.a))
        .collect();
    let out = traj
        .with_samples(samples, traj.termination().time_reversed())
        .expect("reflection preserves monotonicity");
    (out, eq.time_reversed())
}
