use nalgebra::{SMatrix, SVector};

use super::machine::{ho_rhs_with_setting, BusVoltage, HighOrderState, HO_DIM};
use super::manifold::{manifold_first, manifold_zero_with_setting, Composites, SlowContext};
use super::params::HighOrderParams;
use super::reduction::reduce_to_damped;
use crate::model::steady_theta13;
use crate::{Error, Result};

type Vec17 = SVector<f64, HO_DIM>;
type Mat17 = SMatrix<f64, HO_DIM, HO_DIM>;

/// Manifold-based starting point at rotor angle `s` past the bus, nominal speed.
pub fn manifold_guess(p: &HighOrderParams, bus: &BusVoltage, s: f64, u_tilde: f64) -> Result<HighOrderState> {
    let c = Composites::new(p)?;
    let ctx = SlowContext { v3: bus.v3, s, s_dot: 0.0, s_ddot: 0.0, omega1: p.omega0, omega1_dot: 0.0 };
    let z = manifold_zero_with_setting(&ctx, u_tilde, p, &c);
    let f = manifold_first(&ctx, p, &c);
    Ok(HighOrderState {
        phi_q2: f.phi_q2,
        phi_d1: f.phi_d1,
        e_d_p: f.e_d_p,
        e_q_p: z.e_q_p,
        phi_q: z.phi_q,
        phi_d: z.phi_d,
        e_f: z.e_f,
        u_f: z.u_f,
        u_f_bar: z.u_f_bar,
        t_m: z.t_m,
        p_u: z.p_u,
        p_a1: 0.0,
        p_a2: 0.0,
        p_b1: 0.0,
        p_b2: 0.0,
        omega1: p.omega0,
        delta1: bus.delta3 + s,
    })
}

fn residual(x: &Vec17, bus: &BusVoltage, u_tilde: f64, p: &HighOrderParams) -> Result<Vec17> {
    let st = HighOrderState::from_array(x.as_slice().try_into().expect("fixed length"));
    let (d, _) = ho_rhs_with_setting(&st, bus, u_tilde, p)?;
    Ok(Vec17::from_column_slice(&d.to_array()))
}

/// Newton iteration on the full right-hand side with a central-difference
/// Jacobian, started from `guess`.
pub fn solve_equilibrium(
    guess: &HighOrderState,
    bus: &BusVoltage,
    u_tilde: f64,
    p: &HighOrderParams,
) -> Result<HighOrderState> {
    let mut x = Vec17::from_column_slice(&guess.to_array());
    for _ in 0..50 {
        let f = residual(&x, bus, u_tilde, p)?;
        if f.amax() < 1e-11 {
            return Ok(HighOrderState::from_array(x.as_slice().try_into().expect("fixed length")));
        }
        let jac = fd_jacobian(&x, bus, u_tilde, p)?;
        let dx = jac.lu().solve(&(-f)).ok_or_else(|| Error::Equilibrium("singular Jacobian".into()))?;
        x += dx;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Equilibrium("iteration diverged".into()));
        }
    }
    Err(Error::Equilibrium("no convergence in 50 Newton steps".into()))
}

/// Operating point on a stiff bus at the governor setting the reduced model
/// assigns to load `ell`. The delivered power differs from `ell` by the
/// reduction error.
pub fn equilibrium_for_load(p: &HighOrderParams, bus: &BusVoltage, ell: f64) -> Result<(HighOrderState, f64)> {
    let u_tilde = ell + p.d_tilde0 * p.omega0;
    let s = steady_theta13(&reduce_to_damped(p)?, ell)?;
    let guess = manifold_guess(p, bus, s, u_tilde)?;
    Ok((solve_equilibrium(&guess, bus, u_tilde, p)?, u_tilde))
}

/// Central-difference Jacobian of the right-hand side at `x`.
pub fn jacobian(x: &HighOrderState, bus: &BusVoltage, u_tilde: f64, p: &HighOrderParams) -> Result<Mat17> {
    fd_jacobian(&Vec17::from_column_slice(&x.to_array()), bus, u_tilde, p)
}

fn fd_jacobian(x: &Vec17, bus: &BusVoltage, u_tilde: f64, p: &HighOrderParams) -> Result<Mat17> {
    let mut jac = Mat17::zeros();
    for j in 0..HO_DIM {
        let h = 1e-7 * x[j].abs().max(1.0);
        let (mut xp, mut xm) = (*x, *x);
        xp[j] += h;
        xm[j] -= h;
        jac.set_column(j, &((residual(&xp, bus, u_tilde, p)? - residual(&xm, bus, u_tilde, p)?) / (2.0 * h)));
    }
    Ok(jac)
}

