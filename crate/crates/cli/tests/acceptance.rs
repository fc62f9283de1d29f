//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that are known not to reproduce with the reference parameters are
//! listed in `KNOWN_DEVIATIONS`; they still print FAIL, and the target fails
//! if the set of failing criteria differs from that list in either direction.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::{rngs::StdRng, Rng, SeedableRng};

use gensync_cli::commands::{self, Overrides, RunOutput};
use gensync_core::analysis::{lyapunov_residual, system_matrix};
use gensync_core::config::{load_high_order, load_scenario};
use gensync_core::high_order::{round_trip, validate_reduction, AgreementSetup};
use gensync_core::model::{presync_rhs, small_signal_jacobian, steady_theta13, GeneratorParams, PreSyncState};
use gensync_core::ode::integrate;
use gensync_core::phase_damping::{iss_gain_phi, DampingFn, DampingProfile, OmegaBox};
use gensync_core::sim::{leader_regulation_error, run, Mode, Scenario};

/// The sync-error bound at 0.125 pi and the connection times at 0.25 pi
/// are not reproduced with the reference parameters (see README).
const KNOWN_DEVIATIONS: [u32; 2] = [3, 4];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(name: &str) -> PathBuf {
    configs().join(name)
}

const REFERENCE: [&str; 3] = ["reference_d0125.json", "reference_d025.json", "reference_d05.json"];

struct RefRun {
    file: &'static str,
    scenario: Scenario,
    out: RunOutput,
}

fn reference_runs(tmp: &Path) -> Vec<RefRun> {
    REFERENCE
        .iter()
        .chain(["reference_sinusoid.json"].iter())
        .map(|f| {
            let scenario = load_scenario(cfg(f)).expect("scenario");
            let out = commands::cmd_run(&cfg(f), &tmp.join(f), Overrides::default(), false).expect("run");
            RefRun { file: f, scenario, out }
        })
        .collect()
}

fn c1_decay_constants() -> Outcome {
    let b = commands::cmd_bounds(&cfg("reference_d0125.json"), None, Overrides::default()).expect("bounds");
    let (c, l) = (b.report.c, b.report.lambda);
    Outcome {
        id: 1,
        name: "decay constants",
        pass: (c - 10.3796).abs() <= 1e-3 && (l - 0.02655).abs() <= 1e-4,
        detail: format!("c = {c:.6} (10.3796 +- 1e-3), lambda = {l:.6} (0.02655 +- 1e-4)"),
    }
}

fn c2_lyapunov() -> Outcome {
    // 10 x 10 grid over the region where A has complex eigenvalues and over
    // the overdamped region alike.
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let k = 0.001 * 10f64.powf(i as f64 / 3.0);
            let d = 0.01 + 0.25 * j as f64;
            worst = worst.max(lyapunov_residual(k, d));
        }
    }
    Outcome {
        id: 2,
        name: "Lyapunov identity",
        pass: worst < 1e-12,
        detail: format!("max residual {worst:.3e} over 100 (k, D) points"),
    }
}

fn c3_table_slope() -> Outcome {
    let b = commands::cmd_bounds(&cfg("reference_d0125.json"), None, Overrides::default()).expect("bounds");
    let slope_err = b.table.iter().filter_map(|r| r.slope_error).fold(0.0, f64::max);
    let first = b.table[0].bound / PI;
    let p = GeneratorParams::reference();
    let raw = gensync_core::analysis::sync_error_bound(&p, b.table[0].d, b.theta.raw_theta, b.theta.raw_theta_dot) / PI;
    Outcome {
        id: 3,
        name: "sync-bound slope and value",
        pass: slope_err < 1e-6 && (first - 0.131).abs() <= 0.002,
        detail: format!(
            "slope rel. error {slope_err:.2e} (< 1e-6); bound(0.125pi) = {first:.4}pi, {raw:.4}pi without safety factor \
             (expected 0.131pi +- 0.002pi)"
        ),
    }
}

fn c4_outcomes(runs: &[RefRun]) -> Outcome {
    let t = |i: usize| runs[i].out.summary.connection_time;
    let within = |v: Option<f64>, target: f64| v.is_some_and(|v| (v - target).abs() <= 0.25 * target);
    let (a, b, c) = (t(0), t(1), t(2));
    let show = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v:.2} s"));
    Outcome {
        id: 4,
        name: "synchronization outcomes",
        pass: within(a, 200.0) && within(b, 260.0) && c.is_none(),
        detail: format!(
            "0.125pi: {} (150..250), 0.25pi: {} (195..325), 0.5pi: {} (none)",
            show(a),
            show(b),
            show(c)
        ),
    }
}

fn c5_bounds(runs: &[RefRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let s = &r.out.summary;
        let bounds = s.bounds.expect("damped bounds");
        let tail_e = s.steady_speed_error.unwrap_or(f64::NAN);
        let records = &r.out.trajectory.records;
        let pre: Vec<_> = records.iter().filter(|x| x.mode == Mode::PreSync).collect();
        let reg = pre
            .iter()
            .map(|x| {
                let (w, d) = leader_regulation_error(x, &r.scenario);
                w.hypot(d)
            })
            .fold(0.0, f64::max);
        let freq_pre = pre.iter().map(|x| (x.omega3 - r.scenario.params.omega0).abs()).fold(0.0, f64::max);
        let ok_e = tail_e <= bounds.sync_error_bound;
        let ok_reg = reg <= bounds.regulation_bound;
        let ok_f = freq_pre <= PI;
        pass &= ok_e && ok_reg && ok_f;
        parts.push(format!(
            "{}: tail|e| {tail_e:.3e} <= {:.3} {ok_e}, |(w,d)| {reg:.3e} <= {:.1} {ok_reg}, \
             pre-sync |w3-w0| {freq_pre:.4} <= pi {ok_f}, whole-run {:.3}",
            r.file.trim_end_matches(".json"),
            bounds.sync_error_bound,
            bounds.regulation_bound,
            s.max_freq_deviation
        ));
    }
    Outcome { id: 5, name: "bound enforcement", pass, detail: parts.join("; ") }
}

fn c6_agc(runs: &[RefRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs.iter().filter(|r| r.out.summary.connected) {
        let last = r.out.trajectory.records.last().expect("records");
        let half = last.ell / 2.0;
        let tol = 0.01 * r.scenario.load.ell_bar;
        let ok = last.mode == Mode::Agc && (last.p1 - half).abs() <= tol && (last.p2 - half).abs() <= tol;
        pass &= ok;
        parts.push(format!(
            "{}: P1 = {:.4}, P2 = {:.4}, ell/2 = {half:.4} {ok}",
            r.file.trim_end_matches(".json"),
            last.p1,
            last.p2
        ));
    }
    pass &= !parts.is_empty();
    Outcome { id: 6, name: "AGC sharing", pass, detail: parts.join("; ") }
}

/// RK4 on `x' = A x + b` against `exp` of the augmented 3 x 3 matrix.
fn affine_error(k: f64, d: f64, dt: f64, t_end: f64) -> f64 {
    let a = system_matrix(k, d);
    let b = [-0.01, 0.0];
    let x0 = [0.5, -0.3];
    let m = Matrix3::new(a[0][0], a[0][1], b[0], a[1][0], a[1][1], b[1], 0.0, 0.0, 0.0);
    let steps = (t_end / dt).round() as usize;
    let mut worst: f64 = 0.0;
    integrate(
        |_, x: &[f64; 2]| {
            Ok([a[0][0] * x[0] + a[0][1] * x[1] + b[0], a[1][0] * x[0] + a[1][1] * x[1] + b[1]])
        },
        0.0,
        x0,
        dt,
        steps,
        |t, x| {
            let exact = (m * t).exp() * Vector3::new(x0[0], x0[1], 1.0);
            worst = worst.max((x[0] - exact[0]).abs()).max((x[1] - exact[1]).abs());
        },
    )
    .expect("integrate");
    worst
}

fn c7_integrator() -> Outcome {
    let p = GeneratorParams::reference();
    let err = affine_error(p.k, p.d1_0, 1e-3, 10.0);
    // Order on a faster system with coarse steps, where the error is well
    // above round-off.
    let errs: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| affine_error(1.0, 0.5, h, 10.0)).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok_order = orders.iter().all(|o| (o - 4.0).abs() <= 0.2);
    Outcome {
        id: 7,
        name: "integrator fidelity",
        pass: err < 1e-6 && ok_order,
        detail: format!("max error {err:.3e} over 10 s at dt 1e-3; observed orders {orders:.3?}"),
    }
}

fn theta13_rate(p: &GeneratorParams, theta13: f64, ell: f64) -> f64 {
    let s = PreSyncState { theta13, ..Default::default() };
    presync_rhs(&s, 0.0, 0.0, ell, p).expect("rhs").0.theta13
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn c8_linearization() -> Outcome {
    let p = GeneratorParams::reference();
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        // Operating points are equilibria of random loads on the increasing
        // branch; away from them the rate also depends on D'.
        let ell: f64 = rng.gen_range(0.05..0.6);
        let bar = steady_theta13(&p, ell).expect("equilibrium");
        let ss = small_signal_jacobian(&p, bar).expect("jacobian");
        let h = 1e-6;
        let a_fd = (theta13_rate(&p, bar + h, ell) - theta13_rate(&p, bar - h, ell)) / (2.0 * h);
        let b_fd = (theta13_rate(&p, bar, ell + h) - theta13_rate(&p, bar, ell - h)) / (2.0 * h);
        worst = worst.max(rel(ss.a, a_fd)).max(rel(ss.input[0], b_fd));

        // Augmented form: the second row linearizes d/dt of the rate along
        // the flow.
        let accel = |th: f64, l: f64, l_dot: f64| {
            let tau = 1e-5;
            let f = theta13_rate(&p, th, l);
            (theta13_rate(&p, th + f * tau, l + l_dot * tau) - theta13_rate(&p, th - f * tau, l - l_dot * tau))
                / (2.0 * tau)
        };
        let h = 1e-4;
        let a2 = (accel(bar + h, ell, 0.0) - accel(bar - h, ell, 0.0)) / (2.0 * h);
        let b2 = (accel(bar, ell + h, 0.0) - accel(bar, ell - h, 0.0)) / (2.0 * h);
        let c2 = (accel(bar, ell, h) - accel(bar, ell, -h)) / (2.0 * h);
        worst = worst
            .max(rel(ss.augmented_state[1], a2))
            .max(rel(ss.augmented_input[1][0], b2))
            .max(rel(ss.augmented_input[1][1], c2));
    }
    Outcome {
        id: 8,
        name: "linearization",
        pass: worst < 1e-6,
        detail: format!("max relative error {worst:.3e} at 20 random points"),
    }
}

fn phase_damping_run(base: &Scenario, leader: DampingFn, d: f64, horizon: f64) -> (f64, DampingProfile) {
    let mut sc = base.clone();
    let mut pd = sc.damping.clone().expect("damping settings");
    pd.leader = leader.clone();
    pd.follower = None;
    sc.damping = Some(pd);
    sc.disturbance = gensync_core::signals::Disturbance::Constant { amplitude: d };
    sc.sim.horizon = horizon;
    let tr = run(&sc).expect("phase damping run");
    (tr.tail_sup_abs_e().expect("tail"), DampingProfile::from_fn(leader).expect("profile"))
}

fn c9_phase_damping() -> Outcome {
    let base = load_scenario(cfg("phase_damping.json")).expect("scenario");
    let p = base.params;
    let (e_const, _) = phase_damping_run(&base, DampingFn::Constant { value: p.d1_0 }, 0.1, 600.0);
    let expected = p.k * 0.1 / p.d1_0;
    let ok_const = rel(e_const, expected) <= 0.01;
    let mut ok_grid = true;
    let mut worst_ratio: f64 = 0.0;
    for a in [0.005, 0.01, 0.02] {
        for d in [0.05, 0.1, 0.2] {
            let (e, profile) = phase_damping_run(&base, DampingFn::Sinusoidal { d0: p.d1_0, a }, d, 400.0);
            let phi = iss_gain_phi(&profile, &OmegaBox::nominal(p.omega0), d, &p).expect("phi").grid;
            let bound = phi / profile.d_lower;
            ok_grid &= e <= bound;
            worst_ratio = worst_ratio.max(e / bound);
        }
    }
    Outcome {
        id: 9,
        name: "phase-dependent damping",
        pass: ok_const && ok_grid,
        detail: format!(
            "constant: |e| = {e_const:.6} vs k|d|/D = {expected:.6} (rel {:.2e}); sinusoidal 3x3: max |e| / bound = {worst_ratio:.3}",
            rel(e_const, expected)
        ),
    }
}

fn c10_reduction() -> Outcome {
    let ho = load_high_order(cfg("high_order_default.json")).expect("high-order params");
    let rep = validate_reduction(&ho, &AgreementSetup::default()).expect("validation");
    let rt = round_trip(&ho).expect("round trip");
    let rt_err = rt.k1_error.max(rt.x1_error).max(rt.d1_0_error);
    let ratios_ok = rep.ratio_tests.iter().all(|r| r.pass);
    let ratios: Vec<String> = rep.ratio_tests.iter().filter(|r| r.order.is_some()).map(|r| format!("{:.3}", r.ratio)).collect();
    Outcome {
        id: 10,
        name: "model reduction",
        pass: ratios_ok && rt_err < 1e-6 && rep.agreement.pass,
        detail: format!(
            "ratios [{}]; round trip {rt_err:.2e}; speed difference {:.3e} <= {:.3e}",
            ratios.join(", "),
            rep.agreement.max_speed_difference,
            rep.agreement.bound
        ),
    }
}

fn c11_determinism(tmp: &Path, runs: &[RefRun]) -> Outcome {
    let mut pass = true;
    let mut checked = Vec::new();
    for r in runs {
        let again = commands::cmd_run(&cfg(r.file), &tmp.join("again").join(r.file), Overrides::default(), false)
            .expect("run");
        let (a, b) = (std::fs::read(&r.out.csv).expect("csv"), std::fs::read(&again.csv).expect("csv"));
        pass &= a == b;
        checked.push(r.file);
    }
    for (f, horizon) in [("phase_damping.json", None), ("high_order_run.json", Some(5.0))] {
        let ov = Overrides { dt: None, horizon };
        let a = commands::cmd_run(&cfg(f), &tmp.join("det_a").join(f), ov, false).expect("run");
        let b = commands::cmd_run(&cfg(f), &tmp.join("det_b").join(f), ov, false).expect("run");
        pass &= std::fs::read(&a.csv).expect("csv") == std::fs::read(&b.csv).expect("csv");
        checked.push(f);
    }
    Outcome {
        id: 11,
        name: "determinism",
        pass,
        detail: format!("byte-identical CSVs for {}", checked.join(", ")),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let tmp = tempfile::tempdir().expect("tempdir");
    let runs = reference_runs(tmp.path());
    let outcomes = vec![
        c1_decay_constants(),
        c2_lyapunov(),
        c3_table_slope(),
        c4_outcomes(&runs),
        c5_bounds(&runs),
        c6_agc(&runs),
        c7_integrator(),
        c8_linearization(),
        c9_phase_damping(),
        c10_reduction(),
        c11_determinism(tmp.path(), &runs),
    ];
    for o in &outcomes {
        println!("criterion {:>2} {:<26} {}  {}", o.id, o.name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failing: BTreeSet<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    let known: BTreeSet<u32> = KNOWN_DEVIATIONS.into_iter().collect();
    println!(
        "{} of {} criteria pass; known deviations {:?}; {:.1} s",
        outcomes.len() - failing.len(),
        outcomes.len(),
        known,
        started.elapsed().as_secs_f64()
    );
    if failing == known {
        ExitCode::SUCCESS
    } else {
        let unexpected: Vec<_> = failing.difference(&known).collect();
        let recovered: Vec<_> = known.difference(&failing).collect();
        println!("unexpected failures {unexpected:?}; known deviations now passing {recovered:?}");
        ExitCode::FAILURE
    }
}
