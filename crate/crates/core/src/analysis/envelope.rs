use serde::{Deserialize, Serialize};

use super::{inner, AnalysisError, Branch};
use crate::ode::{hermite, Sample, Trajectory};

/// A local extremum of `y`, located where the interpolated `y'` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub y: f64,
    pub is_max: bool,
}

/// Local extrema along the trajectory, in order of travel.
pub fn local_extrema(traj: &Trajectory) -> Vec<Extremum> {
    let samples = traj.samples();
    let mut out = Vec::new();
    for (i, w) in samples.windows(2).enumerate() {
        let (s0, s1) = (&w[0], &w[1]);
        if s0.v == 0.0 {
            if let Some(prev) = i.checked_sub(1).map(|j| &samples[j]) {
                if prev.v * s1.v < 0.0 {
                    out.push(at_node(s0, s1));
                }
            }
            continue;
        }
        if s1.v == 0.0 || (s0.v > 0.0) == (s1.v > 0.0) {
            continue;
        }
        let t = crate::ode::bisect_root(|t| hermite(s0, s1, t).v, s0.t, s1.t);
        let p = hermite(s0, s1, t);
        // y' goes + to - in increasing t at a maximum
        let rising_in_t = if s1.t > s0.t { s0.v > 0.0 } else { s1.v > 0.0 };
        out.push(Extremum {
            t,
            y: p.y,
            is_max: rising_in_t,
        });
    }
    out
}

fn at_node(node: &Sample, next: &Sample) -> Extremum {
    let falling_after = if next.t > node.t {
        next.v < 0.0
    } else {
        next.v > 0.0
    };
    Extremum {
        t: node.t,
        y: node.y,
        is_max: falling_after,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub t: f64,
    /// `σ(t) - (±√(-2t/3))` at the extremum.
    pub offset: f64,
}

/// Offsets of successive extrema from one half of `σ² = -2t/3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremaEnvelope {
    pub branch: Branch,
    pub points: Vec<EnvelopePoint>,
}

impl ExtremaEnvelope {
    /// Points with `lo <= t <= hi`.
    pub fn within(&self, lo: f64, hi: f64) -> Self {
        Self {
            branch: self.branch,
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.t >= lo && p.t <= hi)
                .collect(),
        }
    }

    /// Points ordered by decreasing `t`.
    fn toward_past(&self) -> Vec<EnvelopePoint> {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| b.t.total_cmp(&a.t));
        pts
    }

    /// Distances `|offset_i - offset_{i+1}|` between successive extrema,
    /// ordered by decreasing `t`.
    pub fn peak_to_peak(&self) -> Vec<f64> {
        self.toward_past()
            .windows(2)
            .map(|w| (w[0].offset - w[1].offset).abs())
            .collect()
    }

    /// Whether the oscillation decays as `t` decreases: the offsets above the
    /// curve, the offsets below it and the peak-to-peak distances each shrink
    /// strictly.
    ///
    /// Maxima and minima are judged separately since the swing above the
    /// curve and the swing below it differ slightly at every extremum.
    pub fn decays_toward_past(&self) -> bool {
        let pts = self.toward_past();
        let strictly_shrinking = |xs: Vec<f64>| xs.windows(2).all(|w| w[1] < w[0]);
        let above: Vec<f64> = pts
            .iter()
            .filter(|p| p.offset > 0.0)
            .map(|p| p.offset)
            .collect();
        let below: Vec<f64> = pts
            .iter()
            .filter(|p| p.offset < 0.0)
            .map(|p| -p.offset)
            .collect();
        pts.len() >= 2
            && strictly_shrinking(above)
            && strictly_shrinking(below)
            && strictly_shrinking(self.peak_to_peak())
    }
}

/// Envelope of extrema offsets relative to the chosen half-parabola; only
/// extrema at `t <= 0` where the parabola is real are used.
pub fn extrema_envelope(
    traj: &Trajectory,
    branch: Branch,
) -> Result<ExtremaEnvelope, AnalysisError> {
    let points: Vec<EnvelopePoint> = local_extrema(traj)
        .into_iter()
        .filter_map(|e| {
            inner(e.t).map(|r| EnvelopePoint {
                t: e.t,
                offset: e.y - branch.sign() * r,
            })
        })
        .collect();
    if points.len() < 2 {
        return Err(AnalysisError::InsufficientOscillation {
            found: points.len(),
        });
    }
    Ok(ExtremaEnvelope { branch, points })
}

/// Offsets `y - c(t)` of the extrema of `y`, in order of travel.
pub fn extrema_offsets(traj: &Trajectory, c: impl Fn(f64) -> f64) -> Vec<EnvelopePoint> {
    local_extrema(traj)
        .into_iter()
        .map(|e| EnvelopePoint {
            t: e.t,
            offset: e.y - c(e.t),
        })
        .collect()
}

/// How arches on the positive side of a curve compare with their neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchBalance {
    /// Positive arches higher than the mean depth of the two negative arches
    /// beside them.
    pub positive_larger: usize,
    /// Positive arches with a negative arch on both sides.
    pub positive_total: usize,
}

/// Compares each positive extremum offset with the mean magnitude of its two
/// neighbours; averaging the neighbours cancels a slow drift in amplitude.
pub fn arch_balance(points: &[EnvelopePoint]) -> ArchBalance {
    let mut out = ArchBalance {
        positive_larger: 0,
        positive_total: 0,
    };
    for w in points.windows(3) {
        let (prev, mid, next) = (w[0].offset, w[1].offset, w[2].offset);
        if mid > 0.0 && prev < 0.0 && next < 0.0 {
            out.positive_total += 1;
            if mid > 0.5 * (prev.abs() + next.abs()) {
                out.positive_larger += 1;
            }
        }
    }
    out
}
