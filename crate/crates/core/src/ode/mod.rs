//! Adaptive integration of scalar second-order equations `y'' = f(t, y, y')`.
//!
//! Solutions are stored as a [`Trajectory`]: the accepted step nodes together
//! with the acceleration at each node, which is enough to evaluate a quintic
//! Hermite interpolant between any two neighbouring nodes.

mod dense;
mod dopri;
mod zeros;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dense::hermite;
pub use dopri::{integrate, integrate_with_deadline};
pub(crate) use zeros::bisect_root;
pub use zeros::{detect_zeros, ZeroRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("field is not finite at the initial state (t={t}, y={y}, v={v})")]
    NonFiniteField { t: f64, y: f64, v: f64 },
    #[error("t={t} lies outside the covered range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("compute budget exceeded")]
    BudgetExceeded,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

/// A point `(t, y, y')` of the phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub y: f64,
    pub v: f64,
}

impl State {
    pub fn new(t: f64, y: f64, v: f64) -> Self {
        Self { t, y, v }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.y.is_finite() && self.v.is_finite()
    }
}

/// Integration interval from `t0` to `t1`; `t1 < t0` integrates backward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub t0: f64,
    pub t1: f64,
}

impl Span {
    pub fn new(t0: f64, t1: f64) -> Result<Self, OdeError> {
        let span = Self { t0, t1 };
        span.validate()?;
        Ok(span)
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        if !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(OdeError::InvalidInput(format!(
                "span endpoints must be finite, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if self.t0 == self.t1 {
            return Err(OdeError::InvalidInput("span must have t0 != t1".into()));
        }
        Ok(())
    }

    /// `+1.0` for forward spans, `-1.0` for backward ones.
    pub fn direction(&self) -> f64 {
        if self.t1 >= self.t0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn lo(&self) -> f64 {
        self.t0.min(self.t1)
    }

    pub fn hi(&self) -> f64 {
        self.t0.max(self.t1)
    }

    pub fn length(&self) -> f64 {
        (self.t1 - self.t0).abs()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo() && t <= self.hi()
    }
}

/// Error tolerances, step bounds and termination thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub blowup_bound: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-13,
            h_max: 0.25,
            blowup_bound: 1e3,
            max_steps: 10_000_000,
        }
    }
}

impl StepControl {
    pub const MIN_RTOL: f64 = 1e-14;

    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OdeError> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("h_init", self.h_init),
            ("h_min", self.h_min),
            ("h_max", self.h_max),
            ("blowup_bound", self.blowup_bound),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(OdeError::InvalidInput(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if self.rtol < Self::MIN_RTOL {
            return Err(OdeError::InvalidInput(format!(
                "rtol must be >= {:e}, got {:e}",
                Self::MIN_RTOL,
                self.rtol
            )));
        }
        if !(self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return Err(OdeError::InvalidInput(format!(
                "need h_min <= h_init <= h_max, got {} / {} / {}",
                self.h_min, self.h_init, self.h_max
            )));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidInput("max_steps must be > 0".into()));
        }
        Ok(())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Termination {
    ReachedEnd,
    /// `t_est` is the singularity time extrapolated from the last node.
    BlowUp {
        t_est: f64,
    },
    StepUnderflow {
        t: f64,
    },
    MaxSteps,
}

impl Termination {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Termination::BlowUp { .. })
    }

    /// The same termination seen under `t -> -t`.
    pub fn time_reversed(self) -> Self {
        match self {
            Termination::BlowUp { t_est } => Termination::BlowUp { t_est: -t_est },
            Termination::StepUnderflow { t } => Termination::StepUnderflow { t: -t },
            other => other,
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::ReachedEnd => write!(f, "ReachedEnd"),
            Termination::BlowUp { t_est } => write!(f, "BlowUp(t_est={t_est})"),
            Termination::StepUnderflow { t } => write!(f, "StepUnderflow(t={t})"),
            Termination::MaxSteps => write!(f, "MaxSteps"),
        }
    }
}

/// An accepted node: state plus the acceleration `y''` there.
///
/// `(y, v, a)` at both ends of a step determine the quintic Hermite
/// interpolant used for dense output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub y: f64,
    pub v: f64,
    pub a: f64,
}

impl Sample {
    pub fn new(t: f64, y: f64, v: f64, a: f64) -> Self {
        Self { t, y, v, a }
    }

    pub fn state(&self) -> State {
        State::new(self.t, self.y, self.v)
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite() && self.y.is_finite() && self.v.is_finite() && self.a.is_finite()
    }
}

/// Immutable sampled solution with dense output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
    termination: Termination,
    control: StepControl,
}

impl Trajectory {
    /// Builds a trajectory from nodes ordered along the direction of travel.
    pub fn new(
        samples: Vec<Sample>,
        termination: Termination,
        control: StepControl,
    ) -> Result<Self, OdeError> {
        if samples.is_empty() {
            return Err(OdeError::InvalidTrajectory("no samples".into()));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(OdeError::InvalidTrajectory(format!(
                "non-finite sample at t={}",
                bad.t
            )));
        }
        if samples.len() > 1 {
            let dir = (samples[1].t - samples[0].t).signum();
            let monotone = samples.windows(2).all(|w| (w[1].t - w[0].t) * dir > 0.0);
            if !monotone {
                return Err(OdeError::InvalidTrajectory(
                    "sample times must be strictly monotone".into(),
                ));
            }
        }
        Ok(Self {
            samples,
            termination,
            control,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn control(&self) -> &StepControl {
        &self.control
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        &self.samples[self.samples.len() - 1]
    }

    /// `+1.0` if time increases along the samples, `-1.0` otherwise.
    pub fn direction(&self) -> f64 {
        if self.samples.len() < 2 || self.last().t >= self.first().t {
            1.0
        } else {
            -1.0
        }
    }

    /// Covered interval as `(min t, max t)`.
    pub fn t_range(&self) -> (f64, f64) {
        let (a, b) = (self.first().t, self.last().t);
        (a.min(b), a.max(b))
    }

    pub fn covers(&self, t: f64) -> bool {
        let (lo, hi) = self.t_range();
        t >= lo && t <= hi
    }

    pub fn max_abs_y(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.y.abs()))
    }

    /// Index `i` of the segment `[samples[i], samples[i + 1]]` containing `t`.
    fn segment(&self, t: f64) -> Result<usize, OdeError> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) {
            return Err(OdeError::OutOfRange { t, lo, hi });
        }
        let n = self.samples.len();
        if n == 1 {
            return Ok(0);
        }
        let dir = self.direction();
        // first node strictly past t along the direction of travel
        let idx = self.samples.partition_point(|s| (s.t - t) * dir <= 0.0);
        Ok(idx.saturating_sub(1).min(n - 2))
    }

    /// Dense output `(y, v)` at `t`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64), OdeError> {
        let s = self.eval_sample(t)?;
        Ok((s.y, s.v))
    }

    /// Dense output including the interpolated acceleration.
    pub fn eval_sample(&self, t: f64) -> Result<Sample, OdeError> {
        let i = self.segment(t)?;
        if self.samples.len() == 1 {
            return Ok(self.samples[0]);
        }
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        if t == s0.t {
            return Ok(*s0);
        }
        if t == s1.t {
            return Ok(*s1);
        }
        Ok(hermite(s0, s1, t))
    }

    /// Replaces the node data while keeping the termination and control.
    pub(crate) fn with_samples(
        &self,
        samples: Vec<Sample>,
        termination: Termination,
    ) -> Result<Self, OdeError> {
        Self::new(samples, termination, self.control)
    }
}

/// Dense output at `t`; see [`Trajectory::eval`].
pub fn eval_dense(traj: &Trajectory, t: f64) -> Result<(f64, f64), OdeError> {
    traj.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear() -> Trajectory {
        integrate(
            |_, _, _| 0.0,
            State::new(0.0, 1.0, 2.0),
            Span::new(0.0, 1.0).unwrap(),
            &StepControl::default(),
        )
        .unwrap()
    }

    #[test]
    fn span_rejects_degenerate() {
        assert!(Span::new(1.0, 1.0).is_err());
        assert!(Span::new(0.0, f64::NAN).is_err());
        assert_eq!(Span::new(0.0, -3.0).unwrap().direction(), -1.0);
    }

    #[test]
    fn control_validation() {
        assert!(StepControl::default().validate().is_ok());
        let mut c = StepControl::default();
        c.rtol = 1e-15;
        assert!(c.validate().is_err());
        let mut c = StepControl::default();
        c.h_init = 1.0;
        assert!(c.validate().is_err());
        let mut c = StepControl::default();
        c.max_steps = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn eval_at_node_is_exact() {
        let traj = linear();
        for s in traj.samples() {
            let (y, v) = traj.eval(s.t).unwrap();
            assert_eq!((y, v), (s.y, s.v));
        }
    }

    #[test]
    fn eval_midpoint_of_linear_motion() {
        let traj = linear();
        let samples = traj.samples();
        for w in samples.windows(2) {
            let tm = 0.5 * (w[0].t + w[1].t);
            let (y, v) = traj.eval(tm).unwrap();
            assert!((y - (1.0 + 2.0 * tm)).abs() < 1e-14);
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_out_of_range() {
        let traj = linear();
        assert!(matches!(traj.eval(1.5), Err(OdeError::OutOfRange { .. })));
        assert!(traj.eval(-1e-9).is_err());
    }

    #[test]
    fn eval_backward_trajectory() {
        let traj = integrate(
            |_, y, _| -y,
            State::new(0.0, 0.0, 1.0),
            Span::new(0.0, -2.0).unwrap(),
            &StepControl::default(),
        )
        .unwrap();
        assert_eq!(traj.direction(), -1.0);
        let (y, v) = traj.eval(-1.3).unwrap();
        assert!((y - (-1.3f64).sin()).abs() < 1e-8);
        assert!((v - (-1.3f64).cos()).abs() < 1e-8);
    }

    #[test]
    fn trajectory_rejects_non_monotone() {
        let s = |t| Sample::new(t, 0.0, 0.0, 0.0);
        let err = Trajectory::new(
            vec![s(0.0), s(1.0), s(0.5)],
            Termination::ReachedEnd,
            StepControl::default(),
        );
        assert!(err.is_err());
        assert!(Trajectory::new(vec![], Termination::ReachedEnd, StepControl::default()).is_err());
    }
}
