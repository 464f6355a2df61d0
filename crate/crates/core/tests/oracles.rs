//! Independent oracles and documented examples for the integrator, the
//! classifier and the transforms, run on real solutions of the equations.

use p4lab_core::analysis::{zero_structure_check, ZeroCheckTolerances};
use p4lab_core::equations::rhs_phalf;
use p4lab_core::io::{downsample, TrajectoryDocument};
use p4lab_core::search::{sweep, Family};
use p4lab_core::transforms::{
    negate_dependent, signed_sqrt_at_zero, sqrt_positive, square_trajectory,
};
use p4lab_core::{
    classify, detect_zeros, extrema_envelope, integrate_equation, BehaviorTag, Branch,
    ClassifierParams, EquationId, Sign, SignedSqrtPlan, Span, State, StepControl, Termination,
    Trajectory,
};
use proptest::prelude::*;

fn run(eq: EquationId, ic: State, t1: f64, control: &StepControl) -> Trajectory {
    integrate_equation(eq, ic, Span::new(ic.t, t1).unwrap(), control).unwrap()
}

fn phalf(y0: f64, v0: f64, t1: f64) -> Trajectory {
    run(
        EquationId::Phalf,
        State::new(0.0, y0, v0),
        t1,
        &StepControl::default(),
    )
}

/// Classical fixed-step RK4 on `σ'' = rhs_phalf` from `(t0, y0, v0)`,
/// returning sign changes of `σ` located by linear interpolation between
/// grid points.
fn rk4_zero_scan(ic: State, t1: f64, h: f64) -> Vec<f64> {
    let f = |t: f64, y: f64, v: f64| (v, rhs_phalf(t, y));
    let n = ((t1 - ic.t) / h).abs().round() as usize;
    let h = (t1 - ic.t) / n as f64;
    let (mut y, mut v) = (ic.y, ic.v);
    let mut zeros = Vec::new();
    for i in 0..n {
        let t = ic.t + i as f64 * h;
        let (k1y, k1v) = f(t, y, v);
        let (k2y, k2v) = f(t + h / 2.0, y + h / 2.0 * k1y, v + h / 2.0 * k1v);
        let (k3y, k3v) = f(t + h / 2.0, y + h / 2.0 * k2y, v + h / 2.0 * k2v);
        let (k4y, k4v) = f(t + h, y + h * k3y, v + h * k3v);
        let y1 = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        let v1 = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if y != 0.0 && y1 != 0.0 && (y > 0.0) != (y1 > 0.0) {
            zeros.push(t + h * y / (y - y1));
        }
        (y, v) = (y1, v1);
    }
    zeros
}

#[test]
fn zeros_agree_with_fine_grid_oracle() {
    let cases = [
        (State::new(0.0, 1.0, 1.0), -15.0),
        (State::new(0.0, 1.0, 1.5), -15.0),
        (State::new(0.0, 1.0, -2.0), 1.2),
        (State::new(-6.0, 2.0, -4.5), -2.0),
        (State::new(-6.0, 2.0, 5.0), -2.0),
    ];
    for (ic, t1) in cases {
        let traj = run(EquationId::Phalf, ic, t1, &StepControl::default());
        assert_eq!(traj.termination(), Termination::ReachedEnd);
        let found = detect_zeros(&traj);
        let oracle = rk4_zero_scan(ic, t1, 1e-4);
        assert!(!oracle.is_empty());
        assert_eq!(found.len(), oracle.len(), "{ic:?}: {found:?} vs {oracle:?}");
        for (z, b) in found.iter().zip(&oracle) {
            assert!(z.sign_change);
            assert!((z.a - b).abs() < 1e-7, "{ic:?}: {} vs {b}", z.a);
        }
    }
}

#[test]
fn tightening_tolerances_converges() {
    let coarse = StepControl::with_tolerances(1e-8, 1e-10);
    let fine = StepControl::with_tolerances(5e-9, 5e-11);
    for (y0, v0) in [(0.0, 0.5), (1.0, 0.2), (0.3, -0.7)] {
        let ic = State::new(0.0, y0, v0);
        let a = run(EquationId::Phalf, ic, -20.0, &coarse);
        let b = run(EquationId::Phalf, ic, -20.0, &fine);
        assert_eq!(a.termination(), Termination::ReachedEnd);
        let (ya, yb) = (a.last().y, b.last().y);
        assert!(
            (ya - yb).abs() < 10.0 * 1e-8 * ya.abs().max(1.0),
            "{ya} vs {yb}"
        );
    }
}

fn scale(x: f64) -> f64 {
    x.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_span_matches_whole(y0 in -1.0f64..1.0, v0 in -1.0f64..1.0, t0 in -3.0f64..0.0) {
        let c = StepControl::default();
        let (tb, tc) = (t0 - 0.7, t0 - 1.5);
        let whole = run(EquationId::Phalf, State::new(t0, y0, v0), tc, &c);
        prop_assume!(whole.termination() == Termination::ReachedEnd);
        let first = run(EquationId::Phalf, State::new(t0, y0, v0), tb, &c);
        let second = run(EquationId::Phalf, first.last().state(), tc, &c);
        let (w, s) = (whole.last(), second.last());
        prop_assert!((w.y - s.y).abs() < 10.0 * c.rtol * scale(w.y));
        prop_assert!((w.v - s.v).abs() < 10.0 * c.rtol * scale(w.v));
    }

    #[test]
    fn integrating_back_returns_home(y0 in -1.0f64..1.0, v0 in -1.0f64..1.0, t0 in -3.0f64..0.0) {
        let c = StepControl::default();
        let out = run(EquationId::Phalf, State::new(t0, y0, v0), t0 + 1.0, &c);
        prop_assume!(out.termination() == Termination::ReachedEnd && out.max_abs_y() <= 2.0);
        let back = run(EquationId::Phalf, out.last().state(), t0, &c);
        let home = back.last();
        prop_assert!((home.y - y0).abs() < 100.0 * c.rtol * scale(y0));
        prop_assert!((home.v - v0).abs() < 100.0 * c.rtol * scale(v0));
    }
}

#[test]
fn origin_family_examples_classify_as_described() {
    let params = ClassifierParams::default();
    let window = Span::new(0.0, -40.0).unwrap();
    let osc = classify(&phalf(0.0, 0.5, -40.0), window, &params).unwrap();
    assert_eq!(osc.tag, BehaviorTag::OscLower);
    assert!(osc.is_consistent());
    let blow = classify(&phalf(0.0, 1.2, -40.0), window, &params).unwrap();
    assert_eq!(blow.tag, BehaviorTag::BlowUpNeg);
    assert!(blow.evidence.blow_up_t.unwrap() > -40.0);
}

#[test]
fn origin_family_sweep_rows() {
    let family = Family::new(EquationId::Phalf, 0.0, 0.0, -40.0).unwrap();
    let rows = sweep(&family, &[0.2, 0.65, 1.1, 1.2, 2.0]).unwrap();
    let tags: Vec<BehaviorTag> = rows.iter().map(|r| r.class.tag).collect();
    use BehaviorTag::*;
    assert_eq!(tags, [OscLower, OscLower, OscLower, BlowUpNeg, BlowUpNeg]);
    assert!(rows[..3]
        .iter()
        .all(|r| r.stats.termination == Termination::ReachedEnd));
    assert!(rows[3..].iter().all(|r| r.stats.termination.is_blow_up()));
    assert_eq!(
        rows.iter().map(|r| r.v).collect::<Vec<_>>(),
        [0.2, 0.65, 1.1, 1.2, 2.0]
    );
}

#[test]
fn unit_family_endpoints_differ_from_mid_range() {
    let params = ClassifierParams::default();
    let forward = Span::new(0.0, 10.0).unwrap();
    let backward = Span::new(0.0, -40.0).unwrap();
    let at = |v: f64, window: Span| {
        classify(&phalf(1.0, v, window.t1), window, &params)
            .unwrap()
            .tag
    };
    assert_ne!(at(-0.95, forward), at(-0.92, forward));
    assert_ne!(at(1.57, backward), at(1.59, backward));
    assert_ne!(at(0.0, backward), at(1.59, backward));
}

#[test]
fn classification_is_stable_under_rtol() {
    let window = Span::new(0.0, -40.0).unwrap();
    for v in [0.3, 0.9, 1.1, 1.25, 1.8] {
        let tags: Vec<BehaviorTag> = [1e-9, 1e-10, 1e-11]
            .iter()
            .map(|&rtol| {
                let c = StepControl::with_tolerances(rtol, 1e-12);
                let traj = run(EquationId::Phalf, State::new(0.0, 0.0, v), -40.0, &c);
                classify(&traj, window, &ClassifierParams::default())
                    .unwrap()
                    .tag
            })
            .collect();
        assert!(tags.windows(2).all(|w| w[0] == w[1]), "v={v}: {tags:?}");
    }
}

#[test]
fn classification_mirrors_under_negation() {
    let window = Span::new(0.0, -40.0).unwrap();
    let params = ClassifierParams::default();
    for v in [0.4, 0.65, 1.4] {
        let traj = phalf(0.0, v, -40.0);
        let (neg, eq) = negate_dependent(&traj, EquationId::Phalf);
        assert_eq!(eq, EquationId::Phalf);
        let a = classify(&traj, window, &params).unwrap().tag;
        let b = classify(&neg, window, &params).unwrap().tag;
        assert_eq!(b, a.mirrored(), "v={v}");
    }
}

#[test]
fn slow_start_envelope_decays() {
    let traj = phalf(0.0, 0.3, -40.0);
    let env = extrema_envelope(&traj, Branch::Lower)
        .unwrap()
        .within(-40.0, -5.0);
    assert!(env.points.len() >= 6);
    assert!(env.decays_toward_past());
}

#[test]
fn squared_zero_checks_and_half_zero_checks() {
    let tol = ZeroCheckTolerances::default();
    let sigma = phalf(1.0, 1.0, -15.0);
    let half = zero_structure_check(&sigma, EquationId::Phalf, &tol);
    assert_eq!(half.checks.len(), 1);
    assert!(half.is_clean(), "{:?}", half.violations);

    let s = square_trajectory(&sigma);
    let full = zero_structure_check(&s, EquationId::P, &tol);
    assert_eq!(full.checks.len(), half.checks.len());
    assert!(full.is_clean(), "{:?}", full.violations);

    let positive = phalf(1.0, 0.2, -3.0);
    assert!(detect_zeros(&positive).is_empty());
    assert!(zero_structure_check(&positive, EquationId::Phalf, &tol)
        .checks
        .is_empty());
}

#[test]
fn positive_run_round_trips_through_square() {
    let sigma = phalf(1.0, 0.2, -3.0);
    assert!(sigma.samples().iter().all(|n| n.y > 0.0));
    let back = sqrt_positive(&square_trajectory(&sigma)).unwrap();
    for (a, b) in sigma.samples().iter().zip(back.samples()) {
        assert_eq!(a.t, b.t);
        assert!((a.y - b.y).abs() < 1e-9 * scale(a.y));
        assert!((a.v - b.v).abs() < 1e-9 * scale(a.v));
    }
}

#[test]
fn mixed_root_recovers_run_through_zero() {
    let sigma = run(
        EquationId::Phalf,
        State::new(0.0, 0.0, 1.0),
        -0.8,
        &StepControl::default(),
    );
    let forward = run(
        EquationId::Phalf,
        State::new(0.0, 0.0, 1.0),
        0.8,
        &StepControl::default(),
    );
    // stitch both halves into one run passing through the zero at t = 0
    let mut samples: Vec<_> = sigma.samples().iter().rev().copied().collect();
    samples.extend(forward.samples().iter().skip(1).copied());
    let whole = Trajectory::new(samples, Termination::ReachedEnd, StepControl::default()).unwrap();

    let s = square_trajectory(&whole);
    let zero = detect_zeros(&s)[0];
    let rooted = signed_sqrt_at_zero(&s, &SignedSqrtPlan::new(zero, Sign::Minus)).unwrap();
    for t in [-0.7, -0.3, -1e-3, 0.0, 1e-3, 0.25, 0.75] {
        let (y, v) = rooted.eval(t).unwrap();
        let (y0, v0) = whole.eval(t).unwrap();
        assert!(
            (y - y0).abs() < 1e-6 && (v - v0).abs() < 1e-6,
            "t={t}: {y} {v} vs {y0} {v0}"
        );
    }
}

#[test]
fn document_round_trip_and_downsample_of_real_run() {
    let traj = phalf(0.0, 0.65, -40.0);
    let doc = TrajectoryDocument::new(EquationId::Phalf, &traj);
    let back = TrajectoryDocument::from_json(&doc.to_json().unwrap()).unwrap();
    assert_eq!(back.trajectory().unwrap(), traj);

    let pts = downsample(&traj, 2000).unwrap();
    assert!(pts.len() <= 2000);
    assert_eq!(pts.first(), Some(traj.first()));
    assert_eq!(pts.last(), Some(traj.last()));
}
