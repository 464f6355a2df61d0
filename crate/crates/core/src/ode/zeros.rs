//! Zero location on dense output.

use serde::{Deserialize, Serialize};

use super::{Sample, Trajectory};

/// A zero `a` of the dependent variable found along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub a: f64,
    pub v_at_a: f64,
    /// `false` for tangential touches (local minimum of |y| below `atol`).
    pub sign_change: bool,
}

/// Bisection for a sign change of `f` between `lo` and `hi`, carried on
/// until the bracket cannot be split further.
///
/// `f(lo)` and `f(hi)` must be nonzero with opposite signs; `lo` may exceed
/// `hi`.
pub(crate) fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    let positive_lo = f_lo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == positive_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One record per sign change or tangential touch of `y`, ordered along the
/// trajectory.
///
/// Nodes where `y` is exactly zero are reported as zeros at the node; runs of
/// two or more consecutive exact-zero nodes are not isolated and are skipped.
/// At an endpoint node the crossing counts as a sign change when the slope
/// there is nonzero.
pub fn detect_zeros(traj: &Trajectory) -> Vec<ZeroRecord> {
    let samples = traj.samples();
    let atol = traj.control().atol;
    let n = samples.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let y_at = |seg: (&Sample, &Sample), t: f64| super::hermite(seg.0, seg.1, t).y;
    let v_at = |seg: (&Sample, &Sample), t: f64| super::hermite(seg.0, seg.1, t).v;

    for i in 0..n {
        let s = &samples[i];
        if s.y == 0.0 {
            let prev = i.checked_sub(1).map(|j| samples[j].y);
            let next = samples.get(i + 1).map(|x| x.y);
            if prev == Some(0.0) || next == Some(0.0) {
                continue;
            }
            let sign_change = match (prev, next) {
                (Some(p), Some(q)) => p * q < 0.0,
                _ => s.v != 0.0,
            };
            out.push(ZeroRecord {
                a: s.t,
                v_at_a: s.v,
                sign_change,
            });
            continue;
        }
        if i + 1 == n {
            break;
        }
        let s1 = &samples[i + 1];
        if s1.y == 0.0 {
            continue;
        }
        let seg = (s, s1);
        if (s.y > 0.0) != (s1.y > 0.0) {
            let a = bisect_root(|t| y_at(seg, t), s.t, s1.t);
            out.push(ZeroRecord {
                a,
                v_at_a: v_at(seg, a),
                sign_change: true,
            });
            continue;
        }
        // same sign at both ends: look for an interior minimum of |y|
        let dir = (s1.t - s.t).signum();
        let sgn = s.y.signum();
        let approaching = sgn * s.v * dir < 0.0;
        let leaving = sgn * s1.v * dir > 0.0;
        if !(approaching && leaving) {
            continue;
        }
        let t_min = bisect_root(|t| v_at(seg, t), s.t, s1.t);
        let y_min = y_at(seg, t_min);
        if y_min.abs() <= atol {
            out.push(ZeroRecord {
                a: t_min,
                v_at_a: v_at(seg, t_min),
                sign_change: false,
            });
        } else if y_min.signum() != sgn {
            for (lo, hi) in [(s.t, t_min), (t_min, s1.t)] {
                let a = bisect_root(|t| y_at(seg, t), lo, hi);
                out.push(ZeroRecord {
                    a,
                    v_at_a: v_at(seg, a),
                    sign_change: true,
                });
            }
        }
    }
    out
}
