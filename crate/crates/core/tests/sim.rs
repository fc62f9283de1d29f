use std::f64::consts::PI;

use proptest::prelude::*;

use gensync_core::config::load_scenario;
use gensync_core::signals::{Disturbance, LoadProfile, RampDirection};
use gensync_core::sim::{run, sweep, EventKind, Mode, ModelKind, Scenario};
use gensync_core::Error;

fn ramp_down() -> LoadProfile {
    LoadProfile::ramp_hold(0.5, 0.01, 0.01, 5.0, RampDirection::Down)
}

fn scenario(d: f64, horizon: f64) -> Scenario {
    let mut sc = Scenario::reference(ramp_down(), d);
    sc.sim.horizon = horizon;
    sc
}

fn configs() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn reference_connection_and_agc() {
    let tr = run(&scenario(0.125 * PI, 600.0)).unwrap();
    let tc = tr.connection_time().expect("connects");
    assert!((tc - 161.087).abs() < 0.01, "{tc}");
    let kinds: Vec<_> = tr.events.iter().map(|e| e.kind).collect();
    assert_eq!(kinds, [EventKind::Connection, EventKind::AgcEngaged]);
    let last = tr.records.last().unwrap();
    assert_eq!(last.mode, Mode::Agc);
    assert!((last.p1 - last.ell / 2.0).abs() < 1e-3 && (last.p2 - last.ell / 2.0).abs() < 1e-3);
}

#[test]
fn large_offset_never_connects() {
    let tr = run(&scenario(0.5 * PI, 600.0)).unwrap();
    assert!(tr.connection().is_none());
    assert!(tr.events.iter().any(|e| e.kind == EventKind::NoConnection));
    assert!(tr.records.iter().all(|r| r.mode == Mode::PreSync));
}

#[test]
fn rotor_states_are_continuous_across_connection() {
    let tr = run(&scenario(0.125 * PI, 200.0)).unwrap();
    let i = tr.records.iter().position(|r| r.mode != Mode::PreSync).unwrap();
    let (a, b) = (&tr.records[i - 1], &tr.records[i]);
    let dt = b.t - a.t;
    // Angles move by at most speed * dt; speeds by a bounded acceleration.
    for (x, y, w) in [(a.theta1, b.theta1, a.omega1), (a.theta2, b.theta2, a.omega2)] {
        assert!((y - x - w * dt).abs() < 0.05, "{x} {y}");
    }
    assert!((b.omega1 - a.omega1).abs() < 0.05 && (b.omega2 - a.omega2).abs() < 0.05);
}

#[test]
fn sweep_cell_matches_single_run() {
    let base = scenario(0.0, 120.0);
    let res = sweep(&base, &[0.01], &[0.25 * PI]).unwrap();
    let single = run(&scenario(0.25 * PI, 120.0)).unwrap();
    assert_eq!(res.cell(0, 0).steady_abs_e, single.tail_sup_abs_e());
    assert!(matches!(sweep(&base, &[], &[0.1]), Err(Error::EmptyDomain)));
}

#[test]
fn detailed_leader_connects() {
    let sc = load_scenario(configs().join("high_order_run.json")).unwrap();
    assert_eq!(sc.sim.model_kind, ModelKind::HighOrder);
    let tr = run(&sc).unwrap();
    let tc = tr.connection_time().expect("connects");
    assert!((150.0..175.0).contains(&tc), "{tc}");
    assert_eq!(tr.events.last().unwrap().kind, EventKind::RunEnded);
}

#[test]
fn phase_damping_tracks_with_constant_profile() {
    let mut sc = load_scenario(configs().join("phase_damping.json")).unwrap();
    let mut pd = sc.damping.clone().unwrap();
    pd.leader = gensync_core::phase_damping::DampingFn::Constant { value: sc.params.d1_0 };
    sc.damping = Some(pd);
    sc.sim.horizon = 600.0;
    let tr = run(&sc).unwrap();
    let e = tr.tail_sup_abs_e().unwrap();
    let expected = sc.params.k * sc.disturbance.amplitude() / sc.params.d1_0;
    assert!((e - expected).abs() < 1e-3 * expected, "{e} vs {expected}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn runs_are_deterministic(d in 0.0f64..1.6, horizon in 5.0f64..40.0) {
        let sc = scenario(d, horizon);
        let a = run(&sc).unwrap().to_csv_string();
        let b = run(&sc).unwrap().to_csv_string();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn error_is_speed_difference(d in 0.0f64..1.0) {
        let mut sc = scenario(d, 30.0);
        sc.disturbance = Disturbance::Constant { amplitude: d };
        let tr = run(&sc).unwrap();
        for r in &tr.records {
            prop_assert_eq!(r.e, r.omega2 - r.omega3);
        }
    }
}
