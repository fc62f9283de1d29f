use serde::{Deserialize, Serialize};

use super::params::HighOrderParams;
use crate::{Error, Result};

pub const HO_DIM: usize = 17;

/// Fast and slow states of the detailed machine. `omega1` is the absolute
/// rotor speed; `delta1` is measured against a frame rotating at `omega0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HighOrderState {
    pub phi_q2: f64,
    pub phi_d1: f64,
    pub e_d_p: f64,
    pub e_q_p: f64,
    pub phi_q: f64,
    pub phi_d: f64,
    pub e_f: f64,
    pub u_f: f64,
    pub u_f_bar: f64,
    pub t_m: f64,
    pub p_u: f64,
    pub p_a1: f64,
    pub p_a2: f64,
    pub p_b1: f64,
    pub p_b2: f64,
    pub omega1: f64,
    pub delta1: f64,
}

impl HighOrderState {
    pub const NAMES: [&'static str; HO_DIM] = [
        "phi_q2", "phi_d1", "e_d_p", "e_q_p", "phi_q", "phi_d", "e_f", "u_f", "u_f_bar", "t_m", "p_u", "p_a1",
        "p_a2", "p_b1", "p_b2", "omega1", "delta1",
    ];

    pub fn to_array(self) -> [f64; HO_DIM] {
        let s = self;
        [
            s.phi_q2, s.phi_d1, s.e_d_p, s.e_q_p, s.phi_q, s.phi_d, s.e_f, s.u_f, s.u_f_bar, s.t_m, s.p_u, s.p_a1,
            s.p_a2, s.p_b1, s.p_b2, s.omega1, s.delta1,
        ]
    }

    pub fn from_array(a: [f64; HO_DIM]) -> Self {
        HighOrderState {
            phi_q2: a[0],
            phi_d1: a[1],
            e_d_p: a[2],
            e_q_p: a[3],
            phi_q: a[4],
            phi_d: a[5],
            e_f: a[6],
            u_f: a[7],
            u_f_bar: a[8],
            t_m: a[9],
            p_u: a[10],
            p_a1: a[11],
            p_a2: a[12],
            p_b1: a[13],
            p_b2: a[14],
            omega1: a[15],
            delta1: a[16],
        }
    }
}

/// Voltage magnitude and phase (against the nominal rotating frame) at the bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusVoltage {
    pub v3: f64,
    pub delta3: f64,
}

impl BusVoltage {
    pub fn nominal(delta3: f64) -> Self {
        BusVoltage { v3: 1.0, delta3 }
    }

    /// `(V_q, V_d)` seen from a rotor at angle `delta1`.
    pub fn qd(&self, delta1: f64) -> (f64, f64) {
        let (s, c) = (delta1 - self.delta3).sin_cos();
        (self.v3 * c, self.v3 * s)
    }
}

/// Stator currents, solved from the flux algebra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Currents {
    pub i_q: f64,
    pub i_d: f64,
}

pub fn stator_currents(x: &HighOrderState, p: &HighOrderParams) -> Result<Currents> {
    if p.xq_pp.abs() < 1e-14 {
        return Err(Error::SingularStatorAlgebra("xq_pp"));
    }
    if p.xd_pp.abs() < 1e-14 {
        return Err(Error::SingularStatorAlgebra("xd_pp"));
    }
    let cq = p.xq_p - p.xk;
    let cd = p.xd_p - p.xk;
    let i_q = ((p.xq_p - p.xq_pp) / cq * x.phi_q2 - (p.xq_pp - p.xk) / cq * x.e_d_p - x.phi_q) / p.xq_pp;
    let i_d = ((p.xd_p - p.xd_pp) / cd * x.phi_d1 + (p.xd_pp - p.xk) / cd * x.e_q_p - x.phi_d) / p.xd_pp;
    Ok(Currents { i_q, i_d })
}

/// Electrical torque `Phi_d I_q - Phi_q I_d`.
pub fn air_gap_torque(x: &HighOrderState, c: &Currents) -> f64 {
    x.phi_d * c.i_q - x.phi_q * c.i_d
}

/// Real power delivered at the terminals, `V_q I_q + V_d I_d`.
pub fn terminal_power(x: &HighOrderState, c: &Currents, bus: &BusVoltage) -> f64 {
    let (vq, vd) = bus.qd(x.delta1);
    vq * c.i_q + vd * c.i_d
}

pub fn ho_rhs(x: &HighOrderState, bus: &BusVoltage, p: &HighOrderParams) -> Result<(HighOrderState, Currents)> {
    ho_rhs_with_setting(x, bus, p.u_tilde, p)
}

/// Right-hand side with the governor power setting supplied externally.
pub fn ho_rhs_with_setting(
    x: &HighOrderState,
    bus: &BusVoltage,
    u_tilde: f64,
    p: &HighOrderParams,
) -> Result<(HighOrderState, Currents)> {
    let c = stator_currents(x, p)?;
    let (vq, vd) = bus.qd(x.delta1);
    let (i_q, i_d) = (c.i_q, c.i_d);
    let cq = p.xq_p - p.xk;
    let cd = p.xd_p - p.xk;
    let w0 = p.omega0;

    let e_d_p = (-x.e_d_p
        + (p.xq - p.xq_p) * (i_q - (p.xq_p - p.xq_pp) / (cq * cq) * (x.phi_q2 + cq * i_q + x.e_d_p)))
        / p.tau_q_p;
    let phi_q2 = (-x.phi_q2 - cq * i_q - x.e_d_p) / p.tau_q_pp;
    let phi_d1 = (-x.phi_d1 - cd * i_d + x.e_q_p) / p.tau_d_pp;

    let phi_q = -x.omega1 * x.phi_d + w0 * (vq + p.rs * i_q);
    let phi_d = x.omega1 * x.phi_q + w0 * (vd + p.rs * i_d);

    let e_q_p = (-(p.xd - p.xd_p) * (i_d - (p.xd_p - p.xd_pp) / (cd * cd) * (x.phi_d1 + cd * i_d - x.e_q_p))
        + x.e_f
        - x.e_q_p)
        / p.tau_d_p;
    let e_f = (-p.k_f * x.e_f + x.u_f) / p.tau_f;
    let u_f = (-x.u_f + p.k_u * x.u_f_bar - p.k_u * p.k_u_bar / p.tau_u_bar * x.e_f + p.k_u * p.vr_minus_v1) / p.tau_u;
    let u_f_bar = (-x.u_f_bar + p.k_u_bar / p.tau_u_bar * x.e_f) / p.tau_u_bar;

    let omega1 = (x.t_m - air_gap_torque(x, &c) - p.d_tilde0 * x.omega1) / p.inertia;
    let t_m = (-x.t_m + x.p_u) / p.tau_m;
    let p_u = x.p_a1 + p.tau4 * x.p_a2;
    let p_a1 = x.p_a2;
    let p_a2 = (-(x.p_a1 - p.kappa * (x.p_b1 + p.tau3 * x.p_b2)) / (p.tau5 + p.tau6) - x.p_a2) / p.tau_a2;
    let p_b1 = x.p_b2;
    // 1 / (Dbar0 omega0) is the droop coefficient itself.
    let p_b2 = (-x.p_b2 - (x.p_b1 - p.r_d * (u_tilde - x.p_u) + (x.omega1 - w0) / w0) / p.tau1) / p.tau2;

    let deriv = HighOrderState {
        phi_q2,
        phi_d1,
        e_d_p,
        e_q_p,
        phi_q,
        phi_d,
        e_f,
        u_f,
        u_f_bar,
        t_m,
        p_u,
        p_a1,
        p_a2,
        p_b1,
        p_b2,
        omega1,
        delta1: x.omega1 - w0,
    };
    Ok((deriv, c))
}
