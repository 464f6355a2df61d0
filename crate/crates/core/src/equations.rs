//! The four vector fields and their residual evaluators.
//!
//! `P` and `P̄` carry `s` in a denominator and are only evaluated away from
//! zeros; the cleared-denominator residuals stay defined at `s = 0`. The
//! half-equations `P½` and `P̄½` are polynomial.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{integrate_with_deadline, OdeError, Span, State, StepControl, Trajectory};

/// Guard on `|s|` below which `P` and `P̄` refuse evaluation.
pub const DEFAULT_EPS_S: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquationError {
    #[error(
        "near-zero denominator: |s| = {s:e} < {eps_s:e} at t = {t}; \
         integrate the half-equation and square instead"
    )]
    NearZeroDenominator { t: f64, s: f64, eps_s: f64 },
    #[error("unknown equation '{0}' (expected p, pbar, phalf or pbarhalf)")]
    UnknownEquation(String),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationId {
    P,
    Pbar,
    Phalf,
    Pbarhalf,
}

impl EquationId {
    pub const ALL: [EquationId; 4] = [Self::P, Self::Pbar, Self::Phalf, Self::Pbarhalf];

    pub fn is_half(self) -> bool {
        matches!(self, Self::Phalf | Self::Pbarhalf)
    }

    /// Equation satisfied by `-y` when `y` satisfies `self`.
    pub fn negated(self) -> Self {
        match self {
            Self::P => Self::Pbar,
            Self::Pbar => Self::P,
            half => half,
        }
    }

    /// Equation satisfied by `t -> y(-t)` when `y` satisfies `self`.
    pub fn time_reversed(self) -> Self {
        match self {
            Self::P => Self::Pbar,
            Self::Pbar => Self::P,
            Self::Phalf => Self::Pbarhalf,
            Self::Pbarhalf => Self::Phalf,
        }
    }

    /// Equation of the square-root companion (`P -> P½`, `P̄ -> P̄½`).
    pub fn half(self) -> Self {
        match self {
            Self::P | Self::Phalf => Self::Phalf,
            Self::Pbar | Self::Pbarhalf => Self::Pbarhalf,
        }
    }

    /// Equation of the square (`P½ -> P`, `P̄½ -> P̄`).
    pub fn full(self) -> Self {
        match self {
            Self::P | Self::Phalf => Self::P,
            Self::Pbar | Self::Pbarhalf => Self::Pbar,
        }
    }

    /// `+1` for the `+2t` family (`P`, `P½`), `-1` for the barred ones.
    fn time_sign(self) -> f64 {
        match self {
            Self::P | Self::Phalf => 1.0,
            Self::Pbar | Self::Pbarhalf => -1.0,
        }
    }

    pub fn rhs(self, t: f64, y: f64, v: f64) -> Result<f64, EquationError> {
        self.rhs_guarded(t, y, v, DEFAULT_EPS_S)
    }

    pub fn rhs_guarded(self, t: f64, y: f64, v: f64, eps_s: f64) -> Result<f64, EquationError> {
        if self.is_half() {
            Ok(half_rhs(self.time_sign(), t, y))
        } else {
            full_rhs(self.time_sign(), t, y, v, eps_s)
        }
    }

    /// Field for the integrator: `NaN` where the guard refuses evaluation.
    pub fn field(self) -> impl Fn(f64, f64, f64) -> f64 + Copy {
        move |t, y, v| self.rhs(t, y, v).unwrap_or(f64::NAN)
    }

    /// Residual of the cleared-denominator form for `(t, y, y', y'')`.
    pub fn residual(self, t: f64, y: f64, v: f64, a: f64) -> Residual {
        if self.is_half() {
            half_residual(self.time_sign(), t, y, a)
        } else {
            full_residual(self.time_sign(), t, y, v, a)
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::P => "p",
            Self::Pbar => "pbar",
            Self::Phalf => "phalf",
            Self::Pbarhalf => "pbarhalf",
        }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EquationId {
    type Err = EquationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|eq| eq.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| EquationError::UnknownEquation(s.to_string()))
    }
}

fn full_rhs(sign: f64, t: f64, s: f64, sdot: f64, eps_s: f64) -> Result<f64, EquationError> {
    if !(s.abs() >= eps_s) {
        return Err(EquationError::NearZeroDenominator { t, s, eps_s });
    }
    Ok(sdot * sdot / (2.0 * s) + 1.5 * s * s * s + sign * 4.0 * t * s * s + 2.0 * t * t * s)
}

fn half_rhs(sign: f64, t: f64, sigma: f64) -> f64 {
    let sq = sigma * sigma;
    let two_t = sign * 2.0 * t;
    0.25 * sigma * (3.0 * sq + two_t) * (sq + two_t)
}

fn full_residual(sign: f64, t: f64, s: f64, sdot: f64, sddot: f64) -> Residual {
    let two_t = sign * 2.0 * t;
    let lhs = 2.0 * s * sddot;
    let sq = sdot * sdot;
    let rhs = s * s * (3.0 * s + two_t) * (s + two_t);
    Residual::from_terms(lhs - sq - rhs, &[lhs, sq, rhs])
}

fn half_residual(sign: f64, t: f64, sigma: f64, sigma_ddot: f64) -> Residual {
    let sq = sigma * sigma;
    let two_t = sign * 2.0 * t;
    let lhs = 4.0 * sigma_ddot;
    let rhs = sigma * (3.0 * sq + two_t) * (sq + two_t);
    Residual::from_terms(lhs - rhs, &[lhs, rhs])
}

/// `s'' = s'^2/(2s) + (3/2)s^3 + 4ts^2 + 2t^2 s`, refused for `|s| < eps_s`.
pub fn rhs_p(t: f64, s: f64, sdot: f64, eps_s: f64) -> Result<f64, EquationError> {
    full_rhs(1.0, t, s, sdot, eps_s)
}

/// As [`rhs_p`] with the sign of the `4ts^2` term flipped.
pub fn rhs_pbar(t: f64, s: f64, sdot: f64, eps_s: f64) -> Result<f64, EquationError> {
    full_rhs(-1.0, t, s, sdot, eps_s)
}

/// `σ'' = σ(3σ^2 + 2t)(σ^2 + 2t) / 4`.
pub fn rhs_phalf(t: f64, sigma: f64) -> f64 {
    half_rhs(1.0, t, sigma)
}

/// `σ'' = σ(3σ^2 - 2t)(σ^2 - 2t) / 4`.
pub fn rhs_pbarhalf(t: f64, sigma: f64) -> f64 {
    half_rhs(-1.0, t, sigma)
}

/// `2s s'' - s'^2 - s^2(3s + 2t)(s + 2t)`.
pub fn residual_p_factored(t: f64, s: f64, sdot: f64, sddot: f64) -> Residual {
    full_residual(1.0, t, s, sdot, sddot)
}

/// `4σ'' - σ(3σ^2 + 2t)(σ^2 + 2t)`.
pub fn residual_phalf(t: f64, sigma: f64, sigma_ddot: f64) -> Residual {
    half_residual(1.0, t, sigma, sigma_ddot)
}

/// A residual together with the magnitude of its largest term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub raw: f64,
    /// `max(1, |largest term|)`.
    pub scale: f64,
}

impl Residual {
    fn from_terms(raw: f64, terms: &[f64]) -> Self {
        let scale = terms.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        Self { raw, scale }
    }

    pub fn scaled(&self) -> f64 {
        self.raw.abs() / self.scale
    }
}

/// `Q = (3s + 2t)(s + 2t)` and its derivative along a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFactor {
    pub value: f64,
    pub derivative: f64,
}

impl QuadraticFactor {
    pub fn new(t: f64, s: f64, sdot: f64) -> Self {
        let a = 3.0 * s + 2.0 * t;
        let b = s + 2.0 * t;
        Self {
            value: a * b,
            derivative: (3.0 * sdot + 2.0) * b + a * (sdot + 2.0),
        }
    }
}

/// `2s''' - 2s'Q - sQ'`, the derivative of the cleared form divided by `s`.
pub fn residual_third_derivative(t: f64, s: f64, sdot: f64, _sddot: f64, sdddot: f64) -> Residual {
    let q = QuadraticFactor::new(t, s, sdot);
    let lhs = 2.0 * sdddot;
    let a = 2.0 * sdot * q.value;
    let b = s * q.derivative;
    Residual::from_terms(lhs - a - b, &[lhs, a, b])
}

/// Integrates one of the four equations, refusing `P`/`P̄` initial data
/// at a zero of `s`.
pub fn integrate_equation(
    eq: EquationId,
    ic: State,
    span: Span,
    control: &StepControl,
) -> Result<Trajectory, EquationError> {
    integrate_equation_with_deadline(eq, ic, span, control, None)
}

pub fn integrate_equation_with_deadline(
    eq: EquationId,
    ic: State,
    span: Span,
    control: &StepControl,
    deadline: Option<Instant>,
) -> Result<Trajectory, EquationError> {
    eq.rhs(ic.t, ic.y, ic.v)?;
    Ok(integrate_with_deadline(
        eq.field(),
        ic,
        span,
        control,
        deadline,
    )?)
}
