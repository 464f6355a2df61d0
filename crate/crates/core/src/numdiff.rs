//! Finite-difference derivatives of sampled functions on a bounded domain.
//!
//! Central stencils are used when `t ± h` stays inside `[lo, hi]`; otherwise
//! the one-sided second-order stencil pointing into the domain is used.
//! Both are Richardson-extrapolated from steps `h` and `h / 2`.

/// Second derivative of `f` at `t`.
pub fn second_derivative(f: impl Fn(f64) -> f64, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let d = |h: f64| stencil2(&f, t, h, lo, hi);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// First derivative of `f` at `t`.
pub fn first_derivative(f: impl Fn(f64) -> f64, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let d = |h: f64| stencil1(&f, t, h, lo, hi);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Plain central second difference, no extrapolation.
pub fn central_second(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
}

fn inward(t: f64, h: f64, lo: f64, hi: f64, reach: f64) -> Option<f64> {
    if t - h >= lo && t + h <= hi {
        None
    } else if t + reach * h <= hi {
        Some(1.0)
    } else {
        Some(-1.0)
    }
}

fn stencil2(f: &impl Fn(f64) -> f64, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
    match inward(t, h, lo, hi, 3.0) {
        None => (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h),
        Some(s) => {
            let g = |k: f64| f(t + s * k * h);
            (2.0 * g(0.0) - 5.0 * g(1.0) + 4.0 * g(2.0) - g(3.0)) / (h * h)
        }
    }
}

fn stencil1(f: &impl Fn(f64) -> f64, t: f64, h: f64, lo: f64, hi: f64) -> f64 {
    match inward(t, h, lo, hi, 2.0) {
        None => (f(t + h) - f(t - h)) / (2.0 * h),
        Some(s) => {
            let g = |k: f64| f(t + s * k * h);
            s * (-3.0 * g(0.0) + 4.0 * g(1.0) - g(2.0)) / (2.0 * h)
        }
    }
}
