//! Dormand–Prince 5(4) with proportional-integral step control.

use std::collections::VecDeque;
use std::time::Instant;

use super::{OdeError, Sample, Span, State, StepControl, Termination, Trajectory};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// b5 - b4
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

/// Number of trailing accepted steps over which |y| must grow for a step
/// underflow to count as blow-up.
const GROWTH_WINDOW: usize = 10;

type Vec2 = [f64; 2];

/// Singularity time from a local fit `y ~ c |T - t|^(-p)` at `n`, using
/// `y y'' / y'^2 = (p + 1) / p` and `y / y' = (T - t) / p`. Falls back to
/// `n.t` when the data do not fit such a pole ahead of `n`.
fn pole_estimate(n: &Sample, dir: f64) -> f64 {
    let p = 1.0 / (n.y * n.a / (n.v * n.v) - 1.0);
    let ahead = p * n.y / n.v;
    if p.is_finite() && p > 0.0 && ahead.is_finite() && ahead * dir > 0.0 {
        n.t + ahead
    } else {
        n.t
    }
}

#[inline]
fn axpy(y: Vec2, terms: &[(f64, Vec2)], h: f64) -> Vec2 {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates `y'' = field(t, y, y')` from `ic` across `span`.
///
/// `ic.t` must equal `span.t0`. A field value that is not finite inside a
/// trial step is treated as an error estimate of infinity, so the step is
/// retried with a smaller size.
pub fn integrate<F>(
    field: F,
    ic: State,
    span: Span,
    control: &StepControl,
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, f64, f64) -> f64,
{
    integrate_with_deadline(field, ic, span, control, None)
}

/// [`integrate`] with a wall-clock deadline, checked every few steps.
pub fn integrate_with_deadline<F>(
    field: F,
    ic: State,
    span: Span,
    control: &StepControl,
    deadline: Option<Instant>,
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, f64, f64) -> f64,
{
    span.validate()?;
    control.validate()?;
    if !ic.is_finite() {
        return Err(OdeError::InvalidInput(format!(
            "initial state must be finite, got {ic:?}"
        )));
    }
    if ic.t != span.t0 {
        return Err(OdeError::InvalidInput(format!(
            "initial time {} does not match span start {}",
            ic.t, span.t0
        )));
    }

    let rhs = |t: f64, y: Vec2| -> Vec2 { [y[1], field(t, y[0], y[1])] };

    let dir = span.direction();
    let mut t = ic.t;
    let mut y: Vec2 = [ic.y, ic.v];
    let mut k1 = rhs(t, y);
    if !k1[1].is_finite() {
        return Err(OdeError::NonFiniteField {
            t: ic.t,
            y: ic.y,
            v: ic.v,
        });
    }

    let mut samples = vec![Sample::new(t, y[0], y[1], k1[1])];
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(GROWTH_WINDOW + 1);
    recent.push_back(y[0].abs());

    let mut h = control.h_init.min(control.h_max);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;
    let mut steps = 0usize;

    let termination = loop {
        if steps >= control.max_steps {
            break Termination::MaxSteps;
        }
        steps += 1;
        if steps.is_multiple_of(256) {
            if let Some(deadline) = deadline {
                if Instant::now() >= deadline {
                    return Err(OdeError::BudgetExceeded);
                }
            }
        }

        let remaining = (span.t1 - t).abs();
        let last = remaining <= h * 1.01;
        let h_try = if last { remaining } else { h };
        let dt = dir * h_try;

        let k2 = rhs(t + C2 * dt, axpy(y, &[(A21, k1)], dt));
        let k3 = rhs(t + C3 * dt, axpy(y, &[(A31, k1), (A32, k2)], dt));
        let k4 = rhs(t + C4 * dt, axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], dt));
        let k5 = rhs(
            t + C5 * dt,
            axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], dt),
        );
        let t_new = if last { span.t1 } else { t + dt };
        let k6 = rhs(
            t + dt,
            axpy(
                y,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
                dt,
            ),
        );
        let y_new = axpy(
            y,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
            dt,
        );
        let k7 = rhs(t_new, y_new);

        let mut err = 0.0f64;
        for i in 0..2 {
            let e =
                dt * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = control.atol + control.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / scale);
        }
        let finite = y_new.iter().chain(k7.iter()).all(|x| x.is_finite());
        if !finite || err.is_nan() {
            err = f64::INFINITY;
        }

        if err <= 1.0 {
            if t_new == t {
                break Termination::StepUnderflow { t };
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            samples.push(Sample::new(t, y[0], y[1], k1[1]));
            if recent.len() > GROWTH_WINDOW {
                recent.pop_front();
            }
            recent.push_back(y[0].abs());

            if y[0].abs() > control.blowup_bound {
                break Termination::BlowUp {
                    t_est: pole_estimate(samples.last().expect("just pushed"), dir),
                };
            }
            if last {
                break Termination::ReachedEnd;
            }

            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                SAFETY * err.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)
            };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected_last {
                fac = fac.min(1.0);
            }
            h = (h_try * fac).min(control.h_max);
            err_prev = err.max(1e-4);
            rejected_last = false;
        } else {
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-PI_ALPHA)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            h = h_try * fac;
            rejected_last = true;
            if h < control.h_min {
                let growing = recent.len() > GROWTH_WINDOW
                    && recent.iter().zip(recent.iter().skip(1)).all(|(a, b)| b > a);
                break if growing {
                    Termination::BlowUp {
                        t_est: pole_estimate(samples.last().expect("nonempty"), dir),
                    }
                } else {
                    Termination::StepUnderflow { t }
                };
            }
        }
    };

    Trajectory::new(samples, termination, *control)
}
