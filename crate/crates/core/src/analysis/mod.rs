//! Qualitative analysis of half-equation solutions against the guide curves
//! `σ = 0`, `σ² = -2t/3` and `σ² = -2t`.

mod classify;
mod envelope;
mod zero_check;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classify::{classify, BehaviorClass, BehaviorTag, ClassifierParams, Evidence};
pub use envelope::{
    arch_balance, extrema_envelope, extrema_offsets, local_extrema, ArchBalance, EnvelopePoint,
    ExtremaEnvelope, Extremum,
};
pub use zero_check::{
    zero_structure_check, ZeroCheck, ZeroCheckTolerances, ZeroReport, ZeroViolation,
};

use crate::ode::OdeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("window [{lo}, {hi}] is not covered by the trajectory range [{t_lo}, {t_hi}]")]
    Coverage {
        lo: f64,
        hi: f64,
        t_lo: f64,
        t_hi: f64,
    },
    #[error("insufficient oscillation: found {found} extrema, need at least 2")]
    InsufficientOscillation { found: usize },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Upper (`+`) or lower (`-`) half of a guide parabola.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Branch::Upper => Branch::Lower,
            Branch::Lower => Branch::Upper,
        }
    }
}

/// The five curves cutting the `(t, σ)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuideCurve {
    Axis,
    /// `σ = ±√(-2t/3)`, about which solutions oscillate.
    Inner(Branch),
    /// `σ = ±√(-2t)`.
    Outer(Branch),
}

impl GuideCurve {
    pub const ALL: [GuideCurve; 5] = [
        GuideCurve::Axis,
        GuideCurve::Inner(Branch::Upper),
        GuideCurve::Inner(Branch::Lower),
        GuideCurve::Outer(Branch::Upper),
        GuideCurve::Outer(Branch::Lower),
    ];

    /// Curve value at `t`; `None` where the parabolas are not real (`t > 0`).
    pub fn eval(self, t: f64) -> Option<f64> {
        match self {
            GuideCurve::Axis => Some(0.0),
            GuideCurve::Inner(b) => inner(t).map(|r| b.sign() * r),
            GuideCurve::Outer(b) => outer(t).map(|r| b.sign() * r),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GuideCurve::Axis => "sigma=0",
            GuideCurve::Inner(Branch::Upper) => "sigma=+sqrt(-2t/3)",
            GuideCurve::Inner(Branch::Lower) => "sigma=-sqrt(-2t/3)",
            GuideCurve::Outer(Branch::Upper) => "sigma=+sqrt(-2t)",
            GuideCurve::Outer(Branch::Lower) => "sigma=-sqrt(-2t)",
        }
    }
}

/// `√(-2t/3)` for `t <= 0`.
pub fn inner(t: f64) -> Option<f64> {
    (t <= 0.0).then(|| (-2.0 * t / 3.0).sqrt())
}

/// `√(-2t)` for `t <= 0`.
pub fn outer(t: f64) -> Option<f64> {
    (t <= 0.0).then(|| (-2.0 * t).sqrt())
}

/// Distance from `(t, σ)` to the nearest guide curve defined at `t`.
pub fn distance_to_guides(t: f64, sigma: f64) -> f64 {
    GuideCurve::ALL
        .iter()
        .filter_map(|c| c.eval(t))
        .fold(f64::INFINITY, |m, c| m.min((sigma - c).abs()))
}

/// Region of the `(t, σ)` plane relative to the guide curves.
///
/// For `t > 0` the parabolas are absent and the half-planes `σ > 0` and
/// `σ < 0` are reported as `AboveOuter` and `BelowOuter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    AboveOuter,
    OuterToInner,
    InnerToAxis,
    AxisToInner,
    InnerToOuter,
    BelowOuter,
    OnCurve,
}

/// Sign of `σ(3σ² + 2t)(σ² + 2t)` together with the region containing
/// `(t, σ)`; zero exactly on a curve.
pub fn concavity_sign(t: f64, sigma: f64) -> (i8, Region) {
    let sq = sigma * sigma;
    let f_axis = sign_of(sigma);
    let f_inner = sign_of(3.0 * sq + 2.0 * t);
    let f_outer = sign_of(sq + 2.0 * t);
    let sign = f_axis * f_inner * f_outer;
    let region = match (f_axis, f_inner, f_outer) {
        (0, _, _) | (_, 0, _) | (_, _, 0) => Region::OnCurve,
        (1, 1, 1) => Region::AboveOuter,
        (1, 1, -1) => Region::OuterToInner,
        (1, -1, _) => Region::InnerToAxis,
        (-1, -1, _) => Region::AxisToInner,
        (-1, 1, -1) => Region::InnerToOuter,
        _ => Region::BelowOuter,
    };
    (sign, region)
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Sampled guide curve for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub curve: GuideCurve,
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

/// The five guide curves on `n` uniform points of `[t_min, t_max]`; the
/// parabolas only carry points with `t <= 0`.
pub fn guide_polylines(t_min: f64, t_max: f64, n: usize) -> Vec<Polyline> {
    let ts: Vec<f64> = match n {
        0 => vec![],
        1 => vec![t_min],
        _ => (0..n)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    GuideCurve::ALL
        .iter()
        .map(|&curve| Polyline {
            curve,
            name: curve.name().to_string(),
            points: ts
                .iter()
                .filter_map(|&t| curve.eval(t).map(|y| [t, y]))
                .collect(),
        })
        .collect()
}
