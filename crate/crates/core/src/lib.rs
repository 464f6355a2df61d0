//! Numerical laboratory for the real fourth Painlevé equation with both
//! parameters zero,
//!
//! ```text
//!     s'' = s'^2 / (2s) + (3/2) s^3 + 4 t s^2 + 2 t^2 s,
//! ```
//!
//! and its square-root auxiliary equation
//!
//! ```text
//!     4 σ'' = σ (3σ^2 + 2t)(σ^2 + 2t),
//! ```
//!
//! whose polynomial right side stays well-posed through zeros of the solution.
//!
//! The crate is organised bottom-up:
//!
//! - [`ode`]: adaptive Dormand–Prince 5(4) integration of second-order scalar
//!   equations with quintic Hermite dense output, blow-up termination and
//!   zero detection.
//! - [`equations`]: the four vector fields (`P`, `P̄`, `P½`, `P̄½`) and their
//!   residual evaluators.
//! - [`transforms`]: squaring, square roots (including the sign-mixed root
//!   across an isolated zero) and the two symmetry maps.
//! - [`analysis`]: the concavity diagram, behaviour classification, extrema
//!   envelopes and zero-structure checks.
//! - [`search`]: bisection for critical initial slopes and parameter sweeps.
//! - [`io`]: the `p4lab/1` trajectory document, CSV export and downsampling.

pub mod analysis;
pub mod equations;
pub mod io;
pub mod numdiff;
pub mod ode;
pub mod search;
pub mod transforms;

pub use analysis::{
    classify, concavity_sign, extrema_envelope, zero_structure_check, BehaviorClass, BehaviorTag,
    Branch, ClassifierParams, ExtremaEnvelope, GuideCurve, Region,
};
pub use equations::{integrate_equation, EquationError, EquationId, Residual};
pub use ode::{
    detect_zeros, integrate, Sample, Span, State, StepControl, Termination, Trajectory, ZeroRecord,
};
pub use search::{bisect_threshold, sweep, CriticalThreshold, Family, SweepRow};
pub use transforms::{Sign, SignedSqrtPlan};
