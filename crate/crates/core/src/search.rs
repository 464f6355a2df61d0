//! Bisection for critical initial slopes and classification sweeps.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{classify, AnalysisError, BehaviorClass, BehaviorTag, ClassifierParams};
use crate::equations::{integrate_equation_with_deadline, EquationError, EquationId};
use crate::ode::{detect_zeros, OdeError, Span, State, StepControl, Termination, Trajectory};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("both ends classify as {tag} (v_lo={lo}, v_hi={hi})")]
    NoSignChange { lo: f64, hi: f64, tag: BehaviorTag },
    #[error("endpoint v={v} is Undetermined")]
    InconclusiveEndpoint { v: f64 },
    #[error("invalid search input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl From<OdeError> for SearchError {
    fn from(e: OdeError) -> Self {
        SearchError::Equation(EquationError::Ode(e))
    }
}

/// Initial data `(t0, y0, v)` with the slope `v` left free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub eq: EquationId,
    pub t0: f64,
    pub y0: f64,
    /// Where the classifier looks; must not extend to both sides of `t0`.
    pub window: Span,
    #[serde(default)]
    pub control: StepControl,
    #[serde(default)]
    pub params: ClassifierParams,
}

impl Family {
    /// Family integrated backward or forward over `[t0, t_end]` and judged on
    /// that whole span.
    pub fn new(eq: EquationId, t0: f64, y0: f64, t_end: f64) -> Result<Self, SearchError> {
        let f = Self {
            eq,
            t0,
            y0,
            window: Span::new(t0, t_end)?,
            control: StepControl::default(),
            params: ClassifierParams::default(),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn with_control(mut self, control: StepControl) -> Self {
        self.control = control;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !(self.t0.is_finite() && self.y0.is_finite()) {
            return Err(SearchError::InvalidInput("t0 and y0 must be finite".into()));
        }
        self.window.validate()?;
        self.control.validate()?;
        if self.t0 > self.window.lo() && self.t0 < self.window.hi() {
            return Err(SearchError::InvalidInput(format!(
                "window [{}, {}] straddles t0={}",
                self.window.lo(),
                self.window.hi(),
                self.t0
            )));
        }
        Ok(())
    }

    /// Integration span from `t0` to the far end of the window.
    pub fn span(&self) -> Span {
        let far = if self.window.hi() <= self.t0 {
            self.window.lo()
        } else {
            self.window.hi()
        };
        Span {
            t0: self.t0,
            t1: far,
        }
    }

    pub fn initial_state(&self, v: f64) -> State {
        State::new(self.t0, self.y0, v)
    }

    pub fn trajectory(&self, v: f64, deadline: Option<Instant>) -> Result<Trajectory, SearchError> {
        Ok(integrate_equation_with_deadline(
            self.eq,
            self.initial_state(v),
            self.span(),
            &self.control,
            deadline,
        )?)
    }

    pub fn classify_at(
        &self,
        v: f64,
        deadline: Option<Instant>,
    ) -> Result<BehaviorClass, SearchError> {
        let traj = self.trajectory(v, deadline)?;
        Ok(classify(&traj, self.window, &self.params)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalThreshold {
    pub bracket: [f64; 2],
    pub class_lo: BehaviorClass,
    pub class_hi: BehaviorClass,
    pub iterations: usize,
    /// Bracket after each iteration, starting with the initial one.
    pub history: Vec<[f64; 2]>,
}

impl CriticalThreshold {
    pub fn width(&self) -> f64 {
        self.bracket[1] - self.bracket[0]
    }

    pub fn midpoint(&self) -> f64 {
        self.bracket[0] + self.width() / 2.0
    }
}

/// Bisection on the tag returned by `probe`, keeping differing tags at the
/// two ends until the bracket is no wider than `tol`.
pub fn bisect_by(
    mut probe: impl FnMut(f64) -> Result<BehaviorClass, SearchError>,
    v_lo: f64,
    v_hi: f64,
    tol: f64,
) -> Result<CriticalThreshold, SearchError> {
    if !(v_lo.is_finite() && v_hi.is_finite() && v_lo < v_hi) {
        return Err(SearchError::InvalidInput(format!(
            "need finite v_lo < v_hi, got [{v_lo}, {v_hi}]"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(SearchError::InvalidInput(format!(
            "tol must be > 0, got {tol}"
        )));
    }
    let mut class_lo = probe(v_lo)?;
    let mut class_hi = probe(v_hi)?;
    for (v, c) in [(v_lo, &class_lo), (v_hi, &class_hi)] {
        if c.tag == BehaviorTag::Undetermined {
            return Err(SearchError::InconclusiveEndpoint { v });
        }
    }
    if class_lo.tag == class_hi.tag {
        return Err(SearchError::NoSignChange {
            lo: v_lo,
            hi: v_hi,
            tag: class_lo.tag,
        });
    }

    let (mut lo, mut hi) = (v_lo, v_hi);
    let mut history = vec![[lo, hi]];
    while hi - lo > tol {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let c = probe(mid)?;
        if c.tag == class_lo.tag {
            lo = mid;
            class_lo = c;
        } else {
            hi = mid;
            class_hi = c;
        }
        history.push([lo, hi]);
    }
    Ok(CriticalThreshold {
        bracket: [lo, hi],
        class_lo,
        class_hi,
        iterations: history.len() - 1,
        history,
    })
}

pub fn bisect_threshold(
    family: &Family,
    v_lo: f64,
    v_hi: f64,
    tol: f64,
) -> Result<CriticalThreshold, SearchError> {
    bisect_threshold_with_deadline(family, v_lo, v_hi, tol, None)
}

pub fn bisect_threshold_with_deadline(
    family: &Family,
    v_lo: f64,
    v_hi: f64,
    tol: f64,
    deadline: Option<Instant>,
) -> Result<CriticalThreshold, SearchError> {
    family.validate()?;
    bisect_by(|v| family.classify_at(v, deadline), v_lo, v_hi, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub samples: usize,
    pub termination: Termination,
    pub t_end: f64,
    pub max_abs_y: f64,
    pub zeros: usize,
}

impl RunStats {
    pub fn of(traj: &Trajectory) -> Self {
        Self {
            samples: traj.len(),
            termination: traj.termination(),
            t_end: traj.last().t,
            max_abs_y: traj.max_abs_y(),
            zeros: detect_zeros(traj).len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub v: f64,
    pub class: BehaviorClass,
    pub stats: RunStats,
}

fn sweep_row(family: &Family, v: f64) -> Result<SweepRow, SearchError> {
    let traj = family.trajectory(v, None)?;
    let class = classify(&traj, family.window, &family.params)?;
    Ok(SweepRow {
        v,
        class,
        stats: RunStats::of(&traj),
    })
}

/// Classifies every slope in `v_values`, rows in input order.
pub fn sweep(family: &Family, v_values: &[f64]) -> Result<Vec<SweepRow>, SearchError> {
    family.validate()?;
    v_values.par_iter().map(|&v| sweep_row(family, v)).collect()
}

pub fn sweep_serial(family: &Family, v_values: &[f64]) -> Result<Vec<SweepRow>, SearchError> {
    family.validate()?;
    v_values.iter().map(|&v| sweep_row(family, v)).collect()
}
