use proptest::prelude::*;

use gensync_core::model::{
    increasing_limit, paper_small_signal, postsync_rhs, presync_rhs, small_signal_jacobian, steady_theta13,
    GeneratorParams, PostSyncState, PreSyncState,
};
use gensync_core::Error;

fn rate(p: &GeneratorParams, theta13: f64, ell: f64) -> f64 {
    let s = PreSyncState { theta13, ..Default::default() };
    presync_rhs(&s, 0.0, 0.0, ell, p).unwrap().0.theta13
}

#[test]
fn reference_steady_angle() {
    let p = GeneratorParams::reference();
    assert!((p.theta13_bar - 0.7243583).abs() < 1e-6);
    assert!((p.b1(p.theta13_bar) - p.ell_bar).abs() < 1e-12);
}

#[test]
fn unreachable_load_has_no_root() {
    let p = GeneratorParams::reference();
    let max = p.b1(increasing_limit(&p));
    assert!(matches!(steady_theta13(&p, max * 1.01), Err(Error::NoRoot { .. })));
}

#[test]
fn decreasing_b1_at_origin_is_reported() {
    let mut p = GeneratorParams::reference();
    p.x1 = -1.0;
    assert!(matches!(steady_theta13(&p, 0.1), Err(Error::NonMonotoneBracket { .. })));
}

#[test]
fn published_small_signal_flips_the_input_sign() {
    let p = GeneratorParams::reference();
    let ours = small_signal_jacobian(&p, p.theta13_bar).unwrap();
    let printed = paper_small_signal(&p, p.theta13_bar).unwrap();
    assert_eq!(ours.a, printed.a);
    assert_eq!(ours.input[0], -printed.input[0]);
    // Direct linearization: more load speeds the angle up.
    let h = 1e-6;
    let fd = (rate(&p, p.theta13_bar, p.ell_bar + h) - rate(&p, p.theta13_bar, p.ell_bar - h)) / (2.0 * h);
    assert!((fd - ours.input[0]).abs() < 1e-6 * fd.abs());
}

#[test]
fn degenerate_damping_is_an_error() {
    let mut p = GeneratorParams::reference();
    p.c1 = 0.0;
    p.c2 = 0.0;
    let s = PreSyncState { theta13: 0.5, ..Default::default() };
    assert!(matches!(presync_rhs(&s, 0.0, 0.0, 0.5, &p), Err(Error::DegenerateDamping { .. })));
}

proptest! {
    #[test]
    fn steady_angle_solves_the_balance(ell in 0.01f64..0.6) {
        let p = GeneratorParams::reference();
        let s = steady_theta13(&p, ell).unwrap();
        prop_assert!(s > 0.0 && s < increasing_limit(&p));
        prop_assert!((p.b1(s) - ell).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences(ell in 0.05f64..0.6) {
        let p = GeneratorParams::reference();
        let bar = steady_theta13(&p, ell).unwrap();
        let ss = small_signal_jacobian(&p, bar).unwrap();
        let h = 1e-6;
        let a = (rate(&p, bar + h, ell) - rate(&p, bar - h, ell)) / (2.0 * h);
        prop_assert!((a - ss.a).abs() <= 1e-6 * a.abs());
        prop_assert!((ss.augmented_state[1] - ss.a * ss.a).abs() <= 1e-12 * ss.a * ss.a);
    }

    #[test]
    fn bus_frequency_is_leader_minus_angle_rate(
        omega1 in 370.0f64..384.0, theta13 in 0.1f64..1.2, ell in 0.0f64..0.8,
    ) {
        let p = GeneratorParams::reference();
        let s = PreSyncState { theta1: 1.0, omega1, theta13, theta2: 0.0, omega2: omega1 };
        let (d, out) = presync_rhs(&s, 0.5, 0.5, ell, &p).unwrap();
        prop_assert!((out.omega3 - (omega1 - d.theta13)).abs() < 1e-9);
    }

    #[test]
    fn post_sync_powers_sum_to_load(
        w1 in 370.0f64..384.0, w2 in 370.0f64..384.0, s13 in 0.0f64..1.2, s23 in 0.0f64..1.2, ell in 0.0f64..0.8,
    ) {
        let p = GeneratorParams::reference();
        let st = PostSyncState { theta1: s13, omega1: w1, theta2: s23, omega2: w2, theta3: 0.0, z: 0.0 };
        let (d, out) = postsync_rhs(&st, 0.0, 0.0, ell, &p).unwrap();
        prop_assert!((out.p1 + out.p2 - ell).abs() < 1e-9);
        prop_assert_eq!(d.theta3, out.omega3);
    }
}
