//! Approximate slow manifolds of the fast machine states.
//!
//! Stator fluxes, exciter and governor get zero-order (algebraic) manifolds;
//! the damper fluxes and the slow q-axis damper get first-order corrections
//! in their own time constants.

use super::params::HighOrderParams;
use crate::{Error, Result};

const COMPOSITE_FLOOR: f64 = 1e-14;

/// Composite constants of the q- and d-axis damper manifolds, and the
/// damping coefficients `C1`, `C2` they produce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composites {
    pub n_q: f64,
    pub d_q: f64,
    pub n_q_p: f64,
    pub d_q_tilde: f64,
    pub n_d: f64,
    pub d_d: f64,
    pub d_d_tilde: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Composites {
    pub fn new(p: &HighOrderParams) -> Result<Self> {
        let (xq, xq1, xq2, xk) = (p.xq, p.xq_p, p.xq_pp, p.xk);
        let (xd, xd1, xd2) = (p.xd, p.xd_p, p.xd_pp);
        let (tq1, tq2, td1, td2) = (p.tau_q_p, p.tau_q_pp, p.tau_d_p, p.tau_d_pp);

        let n_q = tq1 * tq2 * xq1 * xk * (xq - xq1) * (xq1 - xq2) * (xq1 - xk);
        let d_q = tq1 * xq * xq1.powi(2) * (xq1 - xk).powi(2) - tq2 * xq * xk.powi(2) * (xq - xq1) * (xq1 - xq2);
        let n_q_p = tq1 * xq1.powi(3) * (xq - xq1) * (xq1 - xk).powi(2);
        let d_q_tilde = xq * d_q;

        let n_d = td1 * td2 * xd1 * xk * (xd - xd1) * (xd1 - xd2) * (xd1 - xk);
        let d_d = td1 * xd * xd1.powi(2) * (xd1 - xk).powi(2) - td2 * xd * xk.powi(2) * (xd - xd1) * (xd1 - xd2);
        let d_d_tilde = xd * d_d;

        for (name, v) in [("D_q", d_q), ("D~_q", d_q_tilde), ("D_d", d_d), ("D~_d", d_d_tilde)] {
            if !(v.abs() >= COMPOSITE_FLOOR) {
                return Err(Error::DegenerateComposite { name, value: v });
            }
        }

        let c1_pp = tq2 * (xq1 - xq2) / xq1.powi(2);
        let c1_p = tq1 * xq1 * (xq1 - xk);
        let c1_pp_t = tq2 * xq * xk * (xq1 - xq2) / xq1;
        let c1_t = (xq - xq1) / d_q_tilde;
        let c1 = c1_pp + (c1_p + c1_pp_t).powi(2) * c1_t;

        let c2_pp = td2 * (xd1 - xd2) / xd1.powi(2);
        let c2_p = td1 * xd1 * (xd1 - xk);
        let c2_pp_t = td2 * xd * xk * (xd1 - xd2) / xd1;
        let c2_t = (xd - xd1) / d_d_tilde;
        let c2 = c2_pp + (c2_p + c2_pp_t) * c2_pp_t * c2_t;

        Ok(Composites { n_q, d_q, n_q_p, d_q_tilde, n_d, d_d, d_d_tilde, c1, c2 })
    }
}

/// Slow quantities the manifolds are evaluated at. The bus magnitude is
/// held constant, so terminal voltages move only through `s = delta1 - delta3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowContext {
    pub v3: f64,
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
    pub omega1: f64,
    pub omega1_dot: f64,
}

/// Terminal voltages and their first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalVoltages {
    pub vq: f64,
    pub vd: f64,
    pub vq_dot: f64,
    pub vd_dot: f64,
    pub vq_ddot: f64,
    pub vd_ddot: f64,
}

impl SlowContext {
    pub fn voltages(&self) -> TerminalVoltages {
        let (sn, cs) = self.s.sin_cos();
        let (w, a, v) = (self.s_dot, self.s_ddot, self.v3);
        TerminalVoltages {
            vq: v * cs,
            vd: v * sn,
            vq_dot: -v * sn * w,
            vd_dot: v * cs * w,
            vq_ddot: -v * (cs * w * w + sn * a),
            vd_ddot: v * (cs * a - sn * w * w),
        }
    }
}

pub fn phi_q2_zero(e_d_p: f64, vd: f64, p: &HighOrderParams) -> f64 {
    -p.xk / p.xq_p * e_d_p - (p.xq_p - p.xk) / p.xq_p * vd
}

pub fn phi_d1_zero(e_q_p: f64, vq: f64, p: &HighOrderParams) -> f64 {
    p.xk / p.xd_p * e_q_p + (p.xd_p - p.xk) / p.xd_p * vq
}

pub fn phi_q2_first(e_d_p: f64, vd: f64, vd_dot: f64, p: &HighOrderParams) -> f64 {
    -p.xq_pp * p.xk / (p.tau_q_p * p.xq_p.powi(3)) * (p.xq * e_d_p - (p.xq - p.xq_p) * vd)
        + vd_dot * p.xq_pp * (p.xq_p - p.xk) / p.xq_p.powi(2)
}

pub fn phi_d1_first(e_q_p: f64, e_f: f64, vq: f64, vq_dot: f64, p: &HighOrderParams) -> f64 {
    p.xd_pp * p.xk / (p.tau_d_p * p.xd_p.powi(3)) * (p.xd * e_q_p - (p.xd - p.xd_p) * vq)
        - p.xd_pp * p.xk / (p.tau_d_p * p.xd_p.powi(2)) * e_f
        - vq_dot * p.xd_pp * (p.xd_p - p.xk) / p.xd_p.powi(2)
}

pub fn e_d_p_zero(vd: f64, vd_dot: f64, p: &HighOrderParams, c: &Composites) -> f64 {
    (p.xq - p.xq_p) / p.xq * vd - c.n_q / c.d_q * vd_dot
}

pub fn e_d_p_first(vd_dot: f64, c: &Composites) -> f64 {
    -c.n_q_p / c.d_q_tilde * vd_dot
}

pub fn e_f_zero(p: &HighOrderParams) -> f64 {
    p.k_u * p.vr_minus_v1 / p.k_f
}

pub fn e_q_p_zero(e_f: f64, vq: f64, vq_dot: f64, p: &HighOrderParams, c: &Composites) -> f64 {
    p.xd_p / p.xd * e_f + (p.xd - p.xd_p) / p.xd * vq - c.n_d / c.d_d * vq_dot
}

/// Zero-order manifold values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroManifold {
    pub phi_q: f64,
    pub phi_d: f64,
    pub phi_q2: f64,
    pub phi_d1: f64,
    pub e_f: f64,
    pub u_f: f64,
    pub u_f_bar: f64,
    pub p_u: f64,
    pub t_m: f64,
    pub e_q_p: f64,
    pub e_d_p: f64,
}

pub fn manifold_zero(ctx: &SlowContext, p: &HighOrderParams, c: &Composites) -> ZeroManifold {
    manifold_zero_with_setting(ctx, p.u_tilde, p, c)
}

pub fn manifold_zero_with_setting(ctx: &SlowContext, u_tilde: f64, p: &HighOrderParams, c: &Composites) -> ZeroManifold {
    let v = ctx.voltages();
    let e_f = e_f_zero(p);
    let e_d_p = e_d_p_zero(v.vd, v.vd_dot, p, c);
    let e_q_p = e_q_p_zero(e_f, v.vq, v.vq_dot, p, c);
    let p_u = u_tilde - p.dbar0() * (ctx.omega1 - p.omega0);
    ZeroManifold {
        phi_q: -v.vd,
        phi_d: v.vq,
        phi_q2: phi_q2_zero(e_d_p, v.vd, p),
        phi_d1: phi_d1_zero(e_q_p, v.vq, p),
        e_f,
        u_f: p.k_f * e_f,
        u_f_bar: p.k_u_bar / p.tau_u_bar * e_f,
        p_u,
        t_m: p_u,
        e_q_p,
        e_d_p,
    }
}

/// First-order corrections and the corrected damper states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstManifold {
    pub phi_q2_1: f64,
    pub phi_d1_1: f64,
    pub e_d_p_1: f64,
    pub phi_q2: f64,
    pub phi_d1: f64,
    pub e_d_p: f64,
}

pub fn manifold_first(ctx: &SlowContext, p: &HighOrderParams, c: &Composites) -> FirstManifold {
    let v = ctx.voltages();
    let e_f = e_f_zero(p);
    let e_d_p_1 = e_d_p_first(v.vd_dot, c);
    let e_d_p = e_d_p_zero(v.vd, v.vd_dot, p, c) + p.tau_q_p * e_d_p_1;
    let e_q_p = e_q_p_zero(e_f, v.vq, v.vq_dot, p, c);
    let phi_q2_1 = phi_q2_first(e_d_p, v.vd, v.vd_dot, p);
    let phi_d1_1 = phi_d1_first(e_q_p, e_f, v.vq, v.vq_dot, p);
    FirstManifold {
        phi_q2_1,
        phi_d1_1,
        e_d_p_1,
        phi_q2: phi_q2_zero(e_d_p, v.vd, p) + p.tau_q_pp * phi_q2_1,
        phi_d1: phi_d1_zero(e_q_p, v.vq, p) + p.tau_d_pp * phi_d1_1,
        e_d_p,
    }
}

/// Stator currents on the reduced manifold (zero-order stator fluxes,
/// first-order dampers). Their `V_d` and `V_q` rate coefficients are `C1`
/// and `-C2`.
pub fn manifold_currents(ctx: &SlowContext, p: &HighOrderParams, c: &Composites) -> (f64, f64) {
    let v = ctx.voltages();
    let z = manifold_zero(ctx, p, c);
    let f = manifold_first(ctx, p, c);
    let cq = p.xq_p - p.xk;
    let cd = p.xd_p - p.xk;
    let i_q = ((p.xq_p - p.xq_pp) / cq * f.phi_q2 - (p.xq_pp - p.xk) / cq * f.e_d_p + v.vd) / p.xq_pp;
    let i_d = ((p.xd_p - p.xd_pp) / cd * f.phi_d1 + (p.xd_pp - p.xk) / cd * z.e_q_p - v.vq) / p.xd_pp;
    (i_q, i_d)
}
