use super::trajectory::{Event, EventKind, Mode, Record, Trajectory};
use super::{InitialConditions, ModelKind, Scenario};
use crate::control::{agc_control, follower_control, leader_control};
use crate::high_order::{
    equilibrium_for_load, ho_rhs_with_setting, reduce_to_damped_with, setting_from_input, terminal_power,
    BusVoltage, HighOrderParams, HighOrderState, HO_DIM,
};
use crate::model::{postsync_rhs, presync_rhs, steady_theta13, BusOutputs, PostSyncState, PreSyncState};
use crate::ode::{lerp_state, rk4_step};
use crate::phase_damping::{pd_equilibrium_delta, pd_follower_control, pd_leader_rhs};
use crate::signals::{disturbance_at, load_at};
use crate::supervisor::{Crossing, SpeedCheck, Supervisor, SyncSample};
use crate::{Error, Result};

/// State of the damped two-machine system in its current mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimState {
    PreSync(PreSyncState),
    PostSync(PostSyncState),
    /// Post-synchronization with the integral loop engaged; `z` is live.
    Agc(PostSyncState),
}

impl SimState {
    fn mode(&self) -> Mode {
        match self {
            SimState::PreSync(_) => Mode::PreSync,
            SimState::PostSync(_) => Mode::PostSync,
            SimState::Agc(_) => Mode::Agc,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            SimState::PreSync(x) => x.to_array().iter().all(|v| v.is_finite()),
            SimState::PostSync(x) | SimState::Agc(x) => x.to_array().iter().all(|v| v.is_finite()),
        }
    }
}

/// Algebraic side outputs at one instant.
#[derive(Debug, Clone, Copy)]
struct Aux {
    out: BusOutputs,
    u1: f64,
    u2: f64,
    ell: f64,
    d: f64,
}

fn eval_presync(x: &PreSyncState, t: f64, sc: &Scenario) -> Result<(PreSyncState, Aux)> {
    let p = &sc.params;
    let (ell, _) = load_at(&sc.load, t);
    let d = disturbance_at(&sc.disturbance, t);
    let u1 = leader_control(x.theta1, t, p);
    let u2 = follower_control(x.theta3() + d, x.omega2, t, p);
    let (deriv, out) = presync_rhs(x, u1, u2, ell, p)?;
    Ok((deriv, Aux { out, u1, u2, ell, d }))
}

fn eval_postsync(x: &PostSyncState, agc: bool, t: f64, sc: &Scenario) -> Result<(PostSyncState, Aux)> {
    let p = &sc.params;
    let (ell, _) = load_at(&sc.load, t);
    let d = disturbance_at(&sc.disturbance, t);
    let (z_dot, u1, u2) = if agc {
        agc_control(x.omega1, x.omega2, x.z, &sc.agc.participation(), p)
    } else {
        (0.0, leader_control(x.theta1, t, p), follower_control(x.theta3 + d, x.omega2, t, p))
    };
    let (mut deriv, out) = postsync_rhs(x, u1, u2, ell, p)?;
    deriv.z = z_dot;
    Ok((deriv, Aux { out, u1, u2, ell, d }))
}

/// One RK4 step of the damped system in its current mode, with controls and
/// exogenous signals evaluated at the stage times.
pub fn step(state: &SimState, sc: &Scenario, t: f64, dt: f64) -> Result<SimState> {
    let next = match state {
        SimState::PreSync(x) => SimState::PreSync(PreSyncState::from_array(rk4_step(
            |t, y| Ok(eval_presync(&PreSyncState::from_array(*y), t, sc)?.0.to_array()),
            t,
            &x.to_array(),
            dt,
        )?)),
        SimState::PostSync(x) | SimState::Agc(x) => {
            let agc = matches!(state, SimState::Agc(_));
            let y = rk4_step(
                |t, y| Ok(eval_postsync(&PostSyncState::from_array(*y), agc, t, sc)?.0.to_array()),
                t,
                &x.to_array(),
                dt,
            )?;
            let y = PostSyncState::from_array(y);
            if agc {
                SimState::Agc(y)
            } else {
                SimState::PostSync(y)
            }
        }
    };
    if !next.is_finite() {
        return Err(Error::NonFiniteState { t: t + dt, mode: next.mode().as_str(), detail: format!("{next:?}") });
    }
    Ok(next)
}

fn record_of(state: &SimState, t: f64, sc: &Scenario) -> Result<Record> {
    Ok(match state {
        SimState::PreSync(x) => {
            let (_, a) = eval_presync(x, t, sc)?;
            Record {
                t,
                theta1: x.theta1,
                omega1: x.omega1,
                theta3: x.theta3(),
                omega3: a.out.omega3,
                theta2: x.theta2,
                omega2: x.omega2,
                e: x.omega2 - a.out.omega3,
                ell: a.ell,
                d: a.d,
                mode: Mode::PreSync,
                u1: a.u1,
                u2: a.u2,
                p1: a.out.p1,
                p2: a.out.p2,
                z: 0.0,
            }
        }
        SimState::PostSync(x) | SimState::Agc(x) => {
            let (_, a) = eval_postsync(x, matches!(state, SimState::Agc(_)), t, sc)?;
            Record {
                t,
                theta1: x.theta1,
                omega1: x.omega1,
                theta3: x.theta3,
                omega3: a.out.omega3,
                theta2: x.theta2,
                omega2: x.omega2,
                e: x.omega2 - a.out.omega3,
                ell: a.ell,
                d: a.d,
                mode: state.mode(),
                u1: a.u1,
                u2: a.u2,
                p1: a.out.p1,
                p2: a.out.p2,
                z: x.z,
            }
        }
    })
}

/// Leader at its time-varying equilibrium for the initial load, follower at rest.
pub fn initial_presync(sc: &Scenario) -> Result<PreSyncState> {
    Ok(match sc.sim.initial_conditions {
        InitialConditions::Default => {
            let p = &sc.params;
            let (ell0, _) = load_at(&sc.load, 0.0);
            PreSyncState {
                theta1: p.equilibrium_delta1(ell0),
                omega1: p.omega0,
                theta13: steady_theta13(p, ell0)?,
                theta2: 0.0,
                omega2: 0.0,
            }
        }
        InitialConditions::Explicit { theta1, omega1, theta13, theta2, omega2 } => {
            PreSyncState { theta1, omega1, theta13, theta2, omega2 }
        }
    })
}

/// `(omega1 - omega0, theta1 - omega0 t - delta1_eq(ell(t)))` of a record:
/// the leader's deviation from its time-varying equilibrium.
pub fn leader_regulation_error(r: &Record, sc: &Scenario) -> (f64, f64) {
    let p = &sc.params;
    (r.omega1 - p.omega0, r.theta1 - p.omega0 * r.t - p.equilibrium_delta1(r.ell))
}

pub fn run(sc: &Scenario) -> Result<Trajectory> {
    sc.validate()?;
    match sc.sim.model_kind {
        ModelKind::Damped => run_damped(sc),
        ModelKind::PhaseDamping => run_phase_damping(sc),
        ModelKind::HighOrder => run_high_order(sc),
    }
}

struct Grid {
    dt: f64,
    steps: usize,
    record_every: usize,
}

impl Grid {
    fn new(sc: &Scenario) -> Self {
        let dt = sc.dt();
        Grid {
            dt,
            steps: (sc.sim.horizon / dt).round() as usize,
            record_every: ((sc.sim.record_interval / dt).round() as usize).max(1),
        }
    }

    fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }
}

fn supervisor_sample(x: &PreSyncState, omega3: f64, t: f64, prev_measured: Option<f64>, dt: f64, sc: &Scenario) -> (SyncSample, f64) {
    let d = disturbance_at(&sc.disturbance, t);
    let measured = x.theta3() + d;
    let speed_error = match (sc.sim.speed_check, prev_measured) {
        (SpeedCheck::MeasuredPhaseRate, Some(m0)) => x.omega2 - (measured - m0) / dt,
        _ => x.omega2 - omega3,
    };
    let sample =
        SyncSample { t, phase_error: x.theta2 - measured, speed_error, true_phase_error: x.theta2 - x.theta3() };
    (sample, measured)
}

fn engage_agc(x: PostSyncState, t: f64, sc: &Scenario) -> Result<PostSyncState> {
    let (_, a) = eval_postsync(&x, false, t, sc)?;
    // Bumpless transfer: the integrator starts at the combined primary effort.
    Ok(PostSyncState { z: a.u1 + a.u2, ..x })
}

fn run_damped(sc: &Scenario) -> Result<Trajectory> {
    let g = Grid::new(sc);
    let mut state = SimState::PreSync(initial_presync(sc)?);
    let mut sup = Supervisor::new(sc.thresholds);
    let mut traj = Trajectory { horizon: g.time(g.steps), ..Default::default() };
    traj.records.push(record_of(&state, 0.0, sc)?);
    let mut prev_measured = None;
    if let SimState::PreSync(x) = &state {
        let omega3 = eval_presync(x, 0.0, sc)?.1.out.omega3;
        let (s, m) = supervisor_sample(x, omega3, 0.0, None, g.dt, sc);
        prev_measured = Some(m);
        sup.observe(s);
    }
    let engage_at = sc.agc.engage_time;

    for n in 0..g.steps {
        let t = g.time(n);
        let t1 = g.time(n + 1);
        state = match state {
            SimState::PreSync(x0) => {
                let next = step(&state, sc, t, g.dt)?;
                let SimState::PreSync(x1) = next else { unreachable!("pre-sync step stays pre-sync") };
                let omega3 = eval_presync(&x1, t1, sc)?.1.out.omega3;
                let (sample, m) = supervisor_sample(&x1, omega3, t1, prev_measured, g.dt, sc);
                prev_measured = Some(m);
                match sup.observe(sample) {
                    None => next,
                    Some(c) => {
                        let f = c.fraction;
                        let te = t + f * g.dt;
                        let xe = PreSyncState::from_array(lerp_state(&x0.to_array(), &x1.to_array(), f));
                        let post = PostSyncState {
                            theta1: xe.theta1,
                            omega1: xe.omega1,
                            theta2: xe.theta2,
                            omega2: xe.omega2,
                            theta3: xe.theta3(),
                            z: 0.0,
                        };
                        let mut s = SimState::PostSync(post);
                        traj.events.push(Event {
                            kind: EventKind::Connection,
                            record: record_of(&s, te, sc)?,
                            true_phase_error: Some(c.event.true_phase_error),
                        });
                        if sc.agc.enabled && te >= engage_at {
                            s = SimState::Agc(engage_agc(post, te, sc)?);
                            traj.events.push(Event {
                                kind: EventKind::AgcEngaged,
                                record: record_of(&s, te, sc)?,
                                true_phase_error: None,
                            });
                        }
                        let rest = t1 - te;
                        if rest > 1e-12 * g.dt {
                            step(&s, sc, te, rest)?
                        } else {
                            s
                        }
                    }
                }
            }
            SimState::PostSync(x0) if sc.agc.enabled && engage_at < t1 => {
                // Engage inside (or at the start of) this step, then finish it.
                let te = engage_at.max(t);
                let xe = if te > t {
                    match step(&state, sc, t, te - t)? {
                        SimState::PostSync(x) => x,
                        _ => unreachable!("post-sync step stays post-sync"),
                    }
                } else {
                    x0
                };
                let s = SimState::Agc(engage_agc(xe, te, sc)?);
                traj.events.push(Event { kind: EventKind::AgcEngaged, record: record_of(&s, te, sc)?, true_phase_error: None });
                if t1 - te > 1e-12 * g.dt {
                    step(&s, sc, te, t1 - te)?
                } else {
                    s
                }
            }
            _ => step(&state, sc, t, g.dt)?,
        };
        if (n + 1) % g.record_every == 0 || n + 1 == g.steps {
            traj.records.push(record_of(&state, t1, sc)?);
        }
    }
    if traj.connection().is_none() {
        let last = *traj.records.last().expect("initial record");
        traj.events.push(Event { kind: EventKind::NoConnection, record: last, true_phase_error: None });
    }
    Ok(traj)
}

fn run_phase_damping(sc: &Scenario) -> Result<Trajectory> {
    let settings = sc.damping.as_ref().ok_or_else(|| Error::param("damping", "missing"))?;
    let (d1, d2) = settings.profiles()?;
    let sig = settings.signal;
    let p = &sc.params;
    let g = Grid::new(sc);

    let eval = |t: f64, y: &[f64; 4]| -> ([f64; 4], f64, f64, f64) {
        let d = disturbance_at(&sc.disturbance, t);
        let u1 = leader_control(y[0], t, p);
        let (th1, w1) = pd_leader_rhs(y[0], y[1], u1, &d1, &sig, t);
        let u2 = pd_follower_control(y[0] + d, y[2], y[3], t, &d1, &d2, &sig, p);
        ([th1, w1, y[3], (u2 - d2.eval(y[2]) * y[3]) / p.inertia], u1, u2, d)
    };
    let record = |t: f64, y: &[f64; 4]| {
        let (_, u1, u2, d) = eval(t, y);
        Record {
            t,
            theta1: y[0],
            omega1: y[1],
            theta3: y[0],
            omega3: y[1],
            theta2: y[2],
            omega2: y[3],
            e: y[3] - y[1],
            ell: 0.0,
            d,
            mode: Mode::Tracking,
            u1,
            u2,
            p1: 0.0,
            p2: 0.0,
            z: 0.0,
        }
    };

    let mut y = match sc.sim.initial_conditions {
        InitialConditions::Default => [pd_equilibrium_delta(&d1, sig.xi(0.0), p), p.omega0, 0.0, 0.0],
        InitialConditions::Explicit { theta1, omega1, theta2, omega2, .. } => [theta1, omega1, theta2, omega2],
    };
    let mut traj = Trajectory { horizon: g.time(g.steps), ..Default::default() };
    traj.records.push(record(0.0, &y));
    for n in 0..g.steps {
        let t = g.time(n);
        y = rk4_step(|t, y| Ok(eval(t, y).0), t, &y, g.dt)?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + g.dt, mode: "tracking", detail: format!("{y:?}") });
        }
        if (n + 1) % g.record_every == 0 || n + 1 == g.steps {
            traj.records.push(record(g.time(n + 1), &y));
        }
    }
    Ok(traj)
}

/// Detailed leader on a stiff bus (unit voltage) whose angle comes from the
/// damped pre-synchronization system; the follower tracks that bus. The
/// detailed model's post-connection network is not modelled, so the run ends
/// at connection.
fn run_high_order(sc: &Scenario) -> Result<Trajectory> {
    let ho = sc.high_order.clone().unwrap_or_else(HighOrderParams::default_set);
    let p = reduce_to_damped_with(&ho, &sc.params)?;
    let bus_sc = Scenario { params: p, ..sc.clone() };
    let g = Grid::new(sc);
    let w0 = ho.omega0;
    const N: usize = HO_DIM + 5;

    let damped0 = initial_presync(&bus_sc)?;
    let (ell0, _) = load_at(&sc.load, 0.0);
    let (mut x0, _) = equilibrium_for_load(&ho, &BusVoltage::nominal(0.0), ell0)?;
    // Same rotor-to-bus angle as at the operating point, now against the bus.
    x0.delta1 += damped0.theta3();

    let split = |y: &[f64; N]| {
        (
            HighOrderState::from_array(y[..HO_DIM].try_into().expect("fixed length")),
            PreSyncState::from_array(y[HO_DIM..].try_into().expect("fixed length")),
        )
    };
    // Derivative plus the bus-side outputs and the leader's (u1, power).
    let eval = |t: f64, y: &[f64; N]| -> Result<([f64; N], Aux, f64, f64)> {
        let (x, b) = split(y);
        let (db, aux) = eval_presync(&b, t, &bus_sc)?;
        let bus = BusVoltage::nominal(b.theta3() - w0 * t);
        let u1 = leader_control(x.delta1 + w0 * t, t, &p);
        let (dx, c) = ho_rhs_with_setting(&x, &bus, setting_from_input(u1, &ho), &ho)?;
        let mut out = [0.0; N];
        out[..HO_DIM].copy_from_slice(&dx.to_array());
        out[HO_DIM..].copy_from_slice(&db.to_array());
        Ok((out, aux, u1, terminal_power(&x, &c, &bus)))
    };
    let record = |t: f64, y: &[f64; N]| -> Result<Record> {
        let (x, b) = split(y);
        let (_, a, u1, power) = eval(t, y)?;
        Ok(Record {
            t,
            theta1: x.delta1 + w0 * t,
            omega1: x.omega1,
            theta3: b.theta3(),
            omega3: a.out.omega3,
            theta2: b.theta2,
            omega2: b.omega2,
            e: b.omega2 - a.out.omega3,
            ell: a.ell,
            d: a.d,
            mode: Mode::PreSync,
            u1,
            u2: a.u2,
            p1: power,
            p2: 0.0,
            z: 0.0,
        })
    };

    let mut y = [0.0; N];
    y[..HO_DIM].copy_from_slice(&x0.to_array());
    y[HO_DIM..].copy_from_slice(&damped0.to_array());
    let mut traj = Trajectory { horizon: g.time(g.steps), ..Default::default() };
    traj.records.push(record(0.0, &y)?);
    let mut sup = Supervisor::new(sc.thresholds);
    let observe = |sup: &mut Supervisor, t: f64, y: &[f64; N], prev: Option<f64>| -> Result<(Option<Crossing>, f64)> {
        let (_, b) = split(y);
        let (_, a) = eval_presync(&b, t, &bus_sc)?;
        let (s, m) = supervisor_sample(&b, a.out.omega3, t, prev, g.dt, &bus_sc);
        Ok((sup.observe(s), m))
    };
    let (_, mut prev) = observe(&mut sup, 0.0, &y, None)?;

    for n in 0..g.steps {
        let t = g.time(n);
        let t1 = g.time(n + 1);
        let y1 = rk4_step(|t, y| Ok(eval(t, y)?.0), t, &y, g.dt)?;
        if !y1.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t: t1, mode: "presync", detail: format!("{y1:?}") });
        }
        let (crossing, m) = observe(&mut sup, t1, &y1, Some(prev))?;
        prev = m;
        if let Some(c) = crossing {
            let te = t + c.fraction * g.dt;
            let rec = record(te, &lerp_state(&y, &y1, c.fraction))?;
            traj.records.push(record(t1, &y1)?);
            traj.events.push(Event { kind: EventKind::Connection, record: rec, true_phase_error: Some(c.event.true_phase_error) });
            traj.events.push(Event { kind: EventKind::RunEnded, record: rec, true_phase_error: None });
            return Ok(traj);
        }
        y = y1;
        if (n + 1) % g.record_every == 0 || n + 1 == g.steps {
            traj.records.push(record(t1, &y)?);
        }
    }
    let last = *traj.records.last().expect("initial record");
    traj.events.push(Event { kind: EventKind::NoConnection, record: last, true_phase_error: None });
    Ok(traj)
}
