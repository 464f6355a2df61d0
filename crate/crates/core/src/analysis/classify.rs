use serde::{Deserialize, Serialize};

use super::{inner, outer, AnalysisError};
use crate::ode::{Span, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    /// Crossings of a half-parabola `σ = ±√(-2t/3)` needed to call it oscillation.
    pub min_crossings: usize,
    /// Distance within which the solution counts as travelling along a curve.
    pub linger_dist: f64,
    /// Minimum contiguous `t`-extent of such travel.
    pub linger_span: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        Self {
            min_crossings: 3,
            linger_dist: 0.05,
            linger_span: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BehaviorTag {
    OscUpper,
    OscLower,
    BlowUpPos,
    BlowUpNeg,
    LingerZero,
    LingerOuterParabola,
    Undetermined,
}

impl BehaviorTag {
    /// Tag of the negated solution.
    pub fn mirrored(self) -> Self {
        match self {
            Self::OscUpper => Self::OscLower,
            Self::OscLower => Self::OscUpper,
            Self::BlowUpPos => Self::BlowUpNeg,
            Self::BlowUpNeg => Self::BlowUpPos,
            other => other,
        }
    }

    pub fn is_blow_up(self) -> bool {
        matches!(self, Self::BlowUpPos | Self::BlowUpNeg)
    }
}

impl std::fmt::Display for BehaviorTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// What the classifier measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub window: Span,
    pub params: ClassifierParams,
    pub crossings_upper: usize,
    pub crossings_lower: usize,
    pub linger_zero_span: f64,
    pub linger_outer_span: f64,
    pub blow_up_t: Option<f64>,
    pub last_y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorClass {
    pub tag: BehaviorTag,
    pub evidence: Evidence,
}

impl BehaviorClass {
    /// Whether the tag follows from the recorded evidence.
    pub fn is_consistent(&self) -> bool {
        let e = &self.evidence;
        let p = &e.params;
        match self.tag {
            BehaviorTag::BlowUpPos => e.blow_up_t.is_some() && e.last_y > 0.0,
            BehaviorTag::BlowUpNeg => e.blow_up_t.is_some() && e.last_y < 0.0,
            BehaviorTag::OscUpper => e.crossings_upper >= p.min_crossings,
            BehaviorTag::OscLower => e.crossings_lower >= p.min_crossings,
            BehaviorTag::LingerZero => e.linger_zero_span >= p.linger_span,
            BehaviorTag::LingerOuterParabola => e.linger_outer_span >= p.linger_span,
            BehaviorTag::Undetermined => true,
        }
    }
}

/// Sign changes of `d(t)` over consecutive values, ignoring exact zeros.
fn count_crossings(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for d in values {
        if d == 0.0 {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = d;
    }
    count
}

/// Longest contiguous `t`-extent over which `near` holds at every node.
fn longest_run(points: &[(f64, f64)], near: impl Fn(f64, f64) -> bool) -> f64 {
    let mut best = 0.0f64;
    let mut start: Option<f64> = None;
    for &(t, y) in points {
        if near(t, y) {
            let s = *start.get_or_insert(t);
            best = best.max((t - s).abs());
        } else {
            start = None;
        }
    }
    best
}

/// Labels a trajectory inside `window`.
///
/// Priority: blow-up, then oscillation about a half of `σ² = -2t/3`, then
/// lingering along `σ = 0` or `σ² = -2t`, else `Undetermined`.
pub fn classify(
    traj: &Trajectory,
    window: Span,
    params: &ClassifierParams,
) -> Result<BehaviorClass, AnalysisError> {
    let termination = traj.termination();
    let (t_lo, t_hi) = traj.t_range();
    let blow_up_t = match termination {
        Termination::BlowUp { t_est } => Some(t_est),
        _ => None,
    };
    let tol = 1e-12 * window.lo().abs().max(window.hi().abs()).max(1.0);
    if blow_up_t.is_none() && (window.lo() < t_lo - tol || window.hi() > t_hi + tol) {
        return Err(AnalysisError::Coverage {
            lo: window.lo(),
            hi: window.hi(),
            t_lo,
            t_hi,
        });
    }

    let points: Vec<(f64, f64)> = traj
        .samples()
        .iter()
        .filter(|n| window.contains(n.t))
        .map(|n| (n.t, n.y))
        .collect();
    let past: Vec<(f64, f64, f64)> = points
        .iter()
        .filter_map(|&(t, y)| inner(t).map(|r| (t, y, r)))
        .collect();
    let crossings_upper = count_crossings(past.iter().map(|&(_, y, r)| y - r));
    let crossings_lower = count_crossings(past.iter().map(|&(_, y, r)| y + r));

    let d = params.linger_dist;
    let linger_zero_span = longest_run(&points, |_, y| y.abs() <= d);
    let linger_outer_span = [1.0, -1.0]
        .iter()
        .map(|&sign| {
            longest_run(&points, |t, y| {
                outer(t).is_some_and(|r| (y - sign * r).abs() <= d)
            })
        })
        .fold(0.0, f64::max);

    let last_y = traj.last().y;
    let evidence = Evidence {
        window,
        params: *params,
        crossings_upper,
        crossings_lower,
        linger_zero_span,
        linger_outer_span,
        blow_up_t,
        last_y,
    };

    let osc = crossings_upper.max(crossings_lower) >= params.min_crossings;
    let tag = if blow_up_t.is_some() {
        if last_y >= 0.0 {
            BehaviorTag::BlowUpPos
        } else {
            BehaviorTag::BlowUpNeg
        }
    } else if osc {
        if crossings_upper > crossings_lower {
            BehaviorTag::OscUpper
        } else if crossings_lower > crossings_upper {
            BehaviorTag::OscLower
        } else {
            let end_y = points.last().map_or(last_y, |p| p.1);
            if end_y >= 0.0 {
                BehaviorTag::OscUpper
            } else {
                BehaviorTag::OscLower
            }
        }
    } else if linger_zero_span >= params.linger_span || linger_outer_span >= params.linger_span {
        if linger_zero_span >= linger_outer_span {
            BehaviorTag::LingerZero
        } else {
            BehaviorTag::LingerOuterParabola
        }
    } else {
        BehaviorTag::Undetermined
    };

    Ok(BehaviorClass { tag, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{Sample, StepControl};

    fn synthetic(
        f: impl Fn(f64) -> f64,
        t0: f64,
        t1: f64,
        n: usize,
        term: Termination,
    ) -> Trajectory {
        let samples = (0..=n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n as f64;
                Sample::new(t, f(t), 0.0, 0.0)
            })
            .collect();
        Trajectory::new(samples, term, StepControl::default()).unwrap()
    }

    #[test]
    fn zero_trajectory_lingers_on_axis() {
        let traj = synthetic(|_| 0.0, 0.0, -40.0, 400, Termination::ReachedEnd);
        let class = classify(&traj, Span::new(0.0, -40.0).unwrap(), &Default::default()).unwrap();
        assert_eq!(class.tag, BehaviorTag::LingerZero);
        assert!(class.is_consistent());
    }

    #[test]
    fn oscillation_about_lower_half() {
        let traj = synthetic(
            |t| -(-2.0 * t / 3.0).sqrt() + 0.1 * (5.0 * t).cos(),
            0.0,
            -20.0,
            4000,
            Termination::ReachedEnd,
        );
        let class = classify(&traj, Span::new(0.0, -20.0).unwrap(), &Default::default()).unwrap();
        assert_eq!(class.tag, BehaviorTag::OscLower);
        assert!(class.evidence.crossings_lower >= 3);
        assert!(class.is_consistent());
    }

    #[test]
    fn blow_up_takes_priority() {
        let traj = synthetic(
            |t| -(-2.0 * t / 3.0).sqrt() + 0.1 * (5.0 * t).cos() - if t < -9.0 { 1e7 } else { 0.0 },
            0.0,
            -10.0,
            2000,
            Termination::BlowUp { t_est: -10.0 },
        );
        let class = classify(&traj, Span::new(0.0, -40.0).unwrap(), &Default::default()).unwrap();
        assert_eq!(class.tag, BehaviorTag::BlowUpNeg);
    }

    #[test]
    fn lingering_along_outer_parabola() {
        let traj = synthetic(
            |t| (-2.0 * t).sqrt() + 0.01,
            -1.0,
            -4.0,
            300,
            Termination::ReachedEnd,
        );
        let class = classify(&traj, Span::new(-1.0, -4.0).unwrap(), &Default::default()).unwrap();
        assert_eq!(class.tag, BehaviorTag::LingerOuterParabola);
    }

    #[test]
    fn undetermined_and_coverage() {
        let traj = synthetic(|t| 3.0 + 0.0 * t, -1.0, -4.0, 30, Termination::ReachedEnd);
        let class = classify(&traj, Span::new(-1.0, -4.0).unwrap(), &Default::default()).unwrap();
        assert_eq!(class.tag, BehaviorTag::Undetermined);
        assert!(matches!(
            classify(&traj, Span::new(-1.0, -5.0).unwrap(), &Default::default()),
            Err(AnalysisError::Coverage { .. })
        ));
    }

    #[test]
    fn crossing_count_ignores_exact_zeros() {
        assert_eq!(
            count_crossings([1.0, 0.0, -1.0, 0.0, 0.0, 2.0].into_iter()),
            2
        );
        assert_eq!(count_crossings([0.0, 0.0].into_iter()), 0);
    }
}
