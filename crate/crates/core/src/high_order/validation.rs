//! Consistency checks between the detailed machine and its reduction.
//!
//! Ratio tests substitute a manifold into the fast equation it approximates
//! and compare the defect before and after halving the governing time
//! constant(s): a zero-order manifold leaves a defect linear in the time
//! constant, a first-order one a quadratic defect.

use serde::Serialize;

use super::machine::{ho_rhs_with_setting, BusVoltage, HighOrderState, HO_DIM};
use super::manifold::{
    e_d_p_first, e_d_p_zero, e_f_zero, e_q_p_zero, manifold_currents, manifold_zero, phi_d1_first, phi_d1_zero,
    phi_q2_first, phi_q2_zero, Composites, SlowContext,
};
use super::equilibrium::equilibrium_for_load;
use super::params::{HighOrderParams, PINNED_C1, PINNED_C2, PINNED_D1_0, PINNED_K1, PINNED_X1};
use super::reduction::{input_from_setting, reduce_to_damped};
use crate::model::GeneratorParams;
use crate::ode::rk4_step;
use crate::Result;

pub const RATIO_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct RatioTest {
    pub name: &'static str,
    pub scaled: &'static str,
    /// 0 or 1; `None` for exact identities.
    pub order: Option<u8>,
    pub residual: f64,
    pub residual_halved: f64,
    pub ratio: f64,
    pub expected: f64,
    pub pass: bool,
}

impl RatioTest {
    fn new(name: &'static str, scaled: &'static str, order: u8, r: f64, r_half: f64) -> Self {
        let expected = if order == 0 { 0.5 } else { 0.25 };
        let ratio = r_half.abs() / r.abs();
        RatioTest {
            name,
            scaled,
            order: Some(order),
            residual: r,
            residual_halved: r_half,
            ratio,
            expected,
            pass: (ratio - expected).abs() <= RATIO_TOLERANCE,
        }
    }

    fn identity(name: &'static str, r: f64) -> Self {
        RatioTest {
            name,
            scaled: "-",
            order: None,
            residual: r,
            residual_halved: r,
            ratio: f64::NAN,
            expected: 0.0,
            pass: r.abs() < 1e-12,
        }
    }
}

/// A slow operating point with nonzero voltage rates, so every derivative
/// term of the manifolds participates.
pub fn probe_context(p: &HighOrderParams) -> Result<SlowContext> {
    let s = reduce_to_damped(p)?.theta13_bar;
    Ok(SlowContext { v3: 1.0, s, s_dot: 0.5, s_ddot: 0.3, omega1: p.omega0 + 0.2, omega1_dot: 0.1 })
}

fn q_current(phi_q2: f64, e_d_p: f64, vd: f64, p: &HighOrderParams) -> f64 {
    let cq = p.xq_p - p.xk;
    ((p.xq_p - p.xq_pp) / cq * phi_q2 - (p.xq_pp - p.xk) / cq * e_d_p + vd) / p.xq_pp
}

fn d_current(phi_d1: f64, e_q_p: f64, vq: f64, p: &HighOrderParams) -> f64 {
    let cd = p.xd_p - p.xk;
    ((p.xd_p - p.xd_pp) / cd * phi_d1 + (p.xd_pp - p.xk) / cd * e_q_p - vq) / p.xd_pp
}

/// Zero-order slow rates of the damper/field states, given their values.
fn e_d_p_rate(e: f64, vd: f64, p: &HighOrderParams) -> f64 {
    -(p.xq * e - (p.xq - p.xq_p) * vd) / (p.tau_q_p * p.xq_p)
}

fn e_q_p_rate(e: f64, e_f: f64, vq: f64, p: &HighOrderParams) -> f64 {
    (e_f - p.xd / p.xd_p * e + (p.xd - p.xd_p) / p.xd_p * vq) / p.tau_d_p
}

fn phi_q2_defect(ctx: &SlowContext, p: &HighOrderParams, first: bool) -> f64 {
    let v = ctx.voltages();
    let c = Composites::new(p).expect("validated");
    let e = e_d_p_zero(v.vd, v.vd_dot, p, &c);
    let e_dot = e_d_p_rate(e, v.vd, p);
    let cq = p.xq_p - p.xk;
    let mut phi = phi_q2_zero(e, v.vd, p);
    let mut phi_dot = -p.xk / p.xq_p * e_dot - cq / p.xq_p * v.vd_dot;
    if first {
        phi += p.tau_q_pp * phi_q2_first(e, v.vd, v.vd_dot, p);
        phi_dot += p.tau_q_pp
            * (-p.xq_pp * p.xk / (p.tau_q_p * p.xq_p.powi(3)) * (p.xq * e_dot - (p.xq - p.xq_p) * v.vd_dot)
                + v.vd_ddot * p.xq_pp * cq / p.xq_p.powi(2));
    }
    p.tau_q_pp * phi_dot + phi + cq * q_current(phi, e, v.vd, p) + e
}

fn phi_d1_defect(ctx: &SlowContext, p: &HighOrderParams, first: bool) -> f64 {
    let v = ctx.voltages();
    let c = Composites::new(p).expect("validated");
    let e_f = e_f_zero(p);
    let e = e_q_p_zero(e_f, v.vq, v.vq_dot, p, &c);
    let e_dot = e_q_p_rate(e, e_f, v.vq, p);
    let cd = p.xd_p - p.xk;
    let mut phi = phi_d1_zero(e, v.vq, p);
    let mut phi_dot = p.xk / p.xd_p * e_dot + cd / p.xd_p * v.vq_dot;
    if first {
        phi += p.tau_d_pp * phi_d1_first(e, e_f, v.vq, v.vq_dot, p);
        phi_dot += p.tau_d_pp
            * (p.xd_pp * p.xk / (p.tau_d_p * p.xd_p.powi(3)) * (p.xd * e_dot - (p.xd - p.xd_p) * v.vq_dot)
                - v.vq_ddot * p.xd_pp * cd / p.xd_p.powi(2));
    }
    p.tau_d_pp * phi_dot + phi + cd * d_current(phi, e, v.vq, p) - e
}

fn e_d_p_defect(ctx: &SlowContext, p: &HighOrderParams, first: bool) -> f64 {
    let v = ctx.voltages();
    let c = Composites::new(p).expect("validated");
    let mut e = e_d_p_zero(v.vd, v.vd_dot, p, &c);
    let mut e_dot = (p.xq - p.xq_p) / p.xq * v.vd_dot - c.n_q / c.d_q * v.vd_ddot;
    if first {
        e += p.tau_q_p * e_d_p_first(v.vd_dot, &c);
        e_dot += p.tau_q_p * e_d_p_first(v.vd_ddot, &c);
    }
    let cq = p.xq_p - p.xk;
    let phi = phi_q2_zero(e, v.vd, p) + p.tau_q_pp * phi_q2_first(e, v.vd, v.vd_dot, p);
    let i_q = q_current(phi, e, v.vd, p);
    let rhs = -e + (p.xq - p.xq_p) * (i_q - (p.xq_p - p.xq_pp) / (cq * cq) * (phi + cq * i_q + e));
    p.tau_q_p * e_dot - rhs
}

fn e_q_p_defect(ctx: &SlowContext, p: &HighOrderParams) -> f64 {
    let v = ctx.voltages();
    let c = Composites::new(p).expect("validated");
    let e_f = e_f_zero(p);
    let e = e_q_p_zero(e_f, v.vq, v.vq_dot, p, &c);
    let e_dot = (p.xd - p.xd_p) / p.xd * v.vq_dot - c.n_d / c.d_d * v.vq_ddot;
    let cd = p.xd_p - p.xk;
    let phi = phi_d1_zero(e, v.vq, p) + p.tau_d_pp * phi_d1_first(e, e_f, v.vq, v.vq_dot, p);
    let i_d = d_current(phi, e, v.vq, p);
    let rhs = -(p.xd - p.xd_p) * (i_d - (p.xd_p - p.xd_pp) / (cd * cd) * (phi + cd * i_d - e)) + e_f - e;
    p.tau_d_p * e_dot - rhs
}

/// Stator defect with `R_s`, `1/omega0` and the relative speed deviation
/// all multiplied by `scale`.
fn stator_defect(ctx: &SlowContext, p: &HighOrderParams, scale: f64) -> f64 {
    let v = ctx.voltages();
    let c = Composites::new(p).expect("validated");
    let (i_q, i_d) = manifold_currents(ctx, p, &c);
    let inv_w0 = scale / p.omega0;
    let rel = scale * (ctx.omega1 - p.omega0) / p.omega0;
    let rs = scale * p.rs;
    let r_q = inv_w0 * (-v.vd_dot) + rel * v.vq - rs * i_q;
    let r_d = inv_w0 * v.vq_dot + rel * v.vd - rs * i_d;
    r_q.hypot(r_d)
}

fn torque_defect(ctx: &SlowContext, p: &HighOrderParams) -> f64 {
    let c = Composites::new(p).expect("validated");
    let z = manifold_zero(ctx, p, &c);
    let t_m_dot = -p.dbar0() * ctx.omega1_dot;
    p.tau_m * t_m_dot - (-z.t_m + z.p_u)
}

fn exciter_defect(ctx: &SlowContext, p: &HighOrderParams) -> f64 {
    let c = Composites::new(p).expect("validated");
    let z = manifold_zero(ctx, p, &c);
    let r_f = -p.k_f * z.e_f + z.u_f;
    let r_u = -z.u_f + p.k_u * z.u_f_bar - p.k_u * p.k_u_bar / p.tau_u_bar * z.e_f + p.k_u * p.vr_minus_v1;
    let r_ub = -z.u_f_bar + p.k_u_bar / p.tau_u_bar * z.e_f;
    r_f.abs().max(r_u.abs()).max(r_ub.abs())
}

fn halved(p: &HighOrderParams, f: impl Fn(&mut HighOrderParams)) -> HighOrderParams {
    let mut q = p.clone();
    f(&mut q);
    q
}

/// Every manifold ratio test at the probe context.
pub fn ratio_tests(p: &HighOrderParams) -> Result<Vec<RatioTest>> {
    ratio_tests_at(p, &probe_context(p)?)
}

pub fn ratio_tests_at(p: &HighOrderParams, ctx: &SlowContext) -> Result<Vec<RatioTest>> {
    p.validate()?;
    Composites::new(p)?;
    let ctx = *ctx;
    let q2 = halved(p, |q| q.tau_q_pp *= 0.5);
    let d1 = halved(p, |q| q.tau_d_pp *= 0.5);
    let qs = halved(p, |q| {
        q.tau_q_pp *= 0.5;
        q.tau_q_p *= 0.5;
    });
    let ds = halved(p, |q| {
        q.tau_d_pp *= 0.5;
        q.tau_d_p *= 0.5;
    });
    let tm = halved(p, |q| q.tau_m *= 0.5);
    Ok(vec![
        RatioTest::new("phi_q2", "tau_q_pp", 0, phi_q2_defect(&ctx, p, false), phi_q2_defect(&ctx, &q2, false)),
        RatioTest::new("phi_q2", "tau_q_pp", 1, phi_q2_defect(&ctx, p, true), phi_q2_defect(&ctx, &q2, true)),
        RatioTest::new("phi_d1", "tau_d_pp", 0, phi_d1_defect(&ctx, p, false), phi_d1_defect(&ctx, &d1, false)),
        RatioTest::new("phi_d1", "tau_d_pp", 1, phi_d1_defect(&ctx, p, true), phi_d1_defect(&ctx, &d1, true)),
        RatioTest::new("e_d_p", "tau_q_p,tau_q_pp", 0, e_d_p_defect(&ctx, p, false), e_d_p_defect(&ctx, &qs, false)),
        RatioTest::new("e_d_p", "tau_q_p,tau_q_pp", 1, e_d_p_defect(&ctx, p, true), e_d_p_defect(&ctx, &qs, true)),
        RatioTest::new("e_q_p", "tau_d_p,tau_d_pp", 0, e_q_p_defect(&ctx, p), e_q_p_defect(&ctx, &ds)),
        RatioTest::new("stator", "rs,1/omega0,omega1/omega0-1", 0, stator_defect(&ctx, p, 1.0), stator_defect(&ctx, p, 0.5)),
        RatioTest::new("t_m", "tau_m", 0, torque_defect(&ctx, p), torque_defect(&ctx, &tm)),
        RatioTest::identity("exciter", exciter_defect(&ctx, p)),
    ])
}

/// Distance of the reduced constants from the pinned reference values.
#[derive(Debug, Clone, Serialize)]
pub struct RoundTrip {
    pub reduced: GeneratorParams,
    pub k1_error: f64,
    pub x1_error: f64,
    pub d1_0_error: f64,
    pub c1_error: f64,
    pub c2_error: f64,
}

impl RoundTrip {
    pub fn max_error(&self) -> f64 {
        [self.k1_error, self.x1_error, self.d1_0_error, self.c1_error, self.c2_error].into_iter().fold(0.0, f64::max)
    }
}

pub fn round_trip(p: &HighOrderParams) -> Result<RoundTrip> {
    let g = reduce_to_damped(p)?;
    Ok(RoundTrip {
        reduced: g,
        k1_error: (g.k1 - PINNED_K1).abs(),
        x1_error: (g.x1 - PINNED_X1).abs(),
        d1_0_error: (g.d1_0 - PINNED_D1_0).abs(),
        c1_error: (g.c1 - PINNED_C1).abs(),
        c2_error: (g.c2 - PINNED_C2).abs(),
    })
}

/// Settings of the step-response comparison on a stiff bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementSetup {
    pub load: f64,
    pub setting_step: f64,
    pub horizon: f64,
    pub dt_high: f64,
    pub dt_damped: f64,
    /// Comparison starts after this many of the slowest fast time constants.
    pub fast_multiples: f64,
    /// Allowed speed mismatch as a fraction of `omega0`.
    pub envelope: f64,
}

impl Default for AgreementSetup {
    fn default() -> Self {
        AgreementSetup {
            load: 0.5,
            setting_step: 0.02,
            horizon: 20.0,
            dt_high: 1e-4,
            dt_damped: 1e-3,
            fast_multiples: 5.0,
            envelope: 0.02,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Agreement {
    pub compare_from: f64,
    pub max_speed_difference: f64,
    pub max_speed_excursion: f64,
    pub bound: f64,
    pub pass: bool,
    /// `(t, omega1 detailed, omega1 damped)` on the damped-model grid.
    #[serde(skip)]
    pub samples: Vec<(f64, f64, f64)>,
}

/// Step the governor setting of a machine sitting at its operating point on
/// a stiff bus and compare the rotor speed of the detailed and damped models.
pub fn trajectory_agreement(p: &HighOrderParams, setup: &AgreementSetup) -> Result<Agreement> {
    let bus = BusVoltage::nominal(0.0);
    let (x0, u0) = equilibrium_for_load(p, &bus, setup.load)?;
    let u_tilde = u0 + setup.setting_step;
    let g = reduce_to_damped(p)?;
    let u1 = input_from_setting(u_tilde, p);

    let slowest_fast =
        [p.tau_q_p, p.tau_q_pp, p.tau_d_p, p.tau_d_pp, p.tau_f, p.tau_u, p.tau_u_bar, p.tau_m].into_iter().fold(0.0, f64::max);
    let compare_from = setup.fast_multiples * slowest_fast;

    let ratio = (setup.dt_damped / setup.dt_high).round().max(1.0) as usize;
    let steps = (setup.horizon / setup.dt_damped).round() as usize;
    let mut xh = x0.to_array();
    let mut xd = [x0.delta1 - bus.delta3, x0.omega1];
    let damped = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let slip = y[1] - g.omega0;
        Ok([slip, (u1 - g.b1(y[0]) - g.d1(y[0]) * slip - g.d1_0 * y[1]) / g.inertia])
    };
    let high = |_t: f64, y: &[f64; HO_DIM]| -> Result<[f64; HO_DIM]> {
        Ok(ho_rhs_with_setting(&HighOrderState::from_array(*y), &bus, u_tilde, p)?.0.to_array())
    };
    let h = setup.dt_damped / ratio as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, xh[15], xd[1]));
    for n in 0..steps {
        let t = n as f64 * setup.dt_damped;
        for m in 0..ratio {
            xh = rk4_step(high, t + m as f64 * h, &xh, h)?;
        }
        xd = rk4_step(damped, t, &xd, setup.dt_damped)?;
        samples.push(((n + 1) as f64 * setup.dt_damped, xh[15], xd[1]));
    }
    let tail = samples.iter().filter(|s| s.0 >= compare_from);
    let max_diff = tail.clone().map(|s| (s.1 - s.2).abs()).fold(0.0, f64::max);
    let excursion = samples.iter().map(|s| (s.2 - p.omega0).abs()).fold(0.0, f64::max);
    let bound = setup.envelope * p.omega0;
    Ok(Agreement {
        compare_from,
        max_speed_difference: max_diff,
        max_speed_excursion: excursion,
        bound,
        pass: max_diff.is_finite() && max_diff <= bound,
        samples,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub ratio_tests: Vec<RatioTest>,
    pub round_trip: RoundTrip,
    pub agreement: Agreement,
}

impl ReductionReport {
    pub fn pass(&self) -> bool {
        self.ratio_tests.iter().all(|r| r.pass) && self.round_trip.max_error() < 1e-6 && self.agreement.pass
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.ratio_tests {
            let order = r.order.map_or("identity".to_string(), |o| format!("order {o}"));
            out += &format!(
                "ratio {:<8} {:<9} scaled={:<30} residual={:.6e} halved={:.6e} ratio={:.4} expected={} pass={}\n",
                r.name, order, r.scaled, r.residual, r.residual_halved, r.ratio, r.expected, r.pass
            );
        }
        let rt = &self.round_trip;
        out += &format!(
            "reduced k1={:.8} x1={:.8} d1_0={:.8} c1={:.8} c2={:.8} max_error={:.3e}\n",
            rt.reduced.k1,
            rt.reduced.x1,
            rt.reduced.d1_0,
            rt.reduced.c1,
            rt.reduced.c2,
            rt.max_error()
        );
        let a = &self.agreement;
        out += &format!(
            "agreement compare_from={:.3} max_speed_difference={:.6e} bound={:.6e} excursion={:.6e} pass={}\n",
            a.compare_from, a.max_speed_difference, a.bound, a.max_speed_excursion, a.pass
        );
        out += &format!("pass={}\n", self.pass());
        out
    }
}

pub fn validate_reduction(p: &HighOrderParams, setup: &AgreementSetup) -> Result<ReductionReport> {
    Ok(ReductionReport {
        ratio_tests: ratio_tests(p)?,
        round_trip: round_trip(p)?,
        agreement: trajectory_agreement(p, setup)?,
    })
}
