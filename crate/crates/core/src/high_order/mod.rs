//! Detailed synchronous machine (damper windings, stator, exciter, diesel
//! governor) and its singular-perturbation reduction to the damped model.

mod equilibrium;
mod machine;
mod manifold;
mod params;
mod reduction;
mod validation;

pub use equilibrium::{equilibrium_for_load, jacobian, manifold_guess, solve_equilibrium};
pub use machine::{
    air_gap_torque, ho_rhs, ho_rhs_with_setting, stator_currents, terminal_power, BusVoltage, Currents,
    HighOrderState, HO_DIM,
};
pub use manifold::{
    e_d_p_first, e_d_p_zero, e_f_zero, e_q_p_zero, manifold_currents, manifold_first, manifold_zero,
    manifold_zero_with_setting, phi_d1_first, phi_d1_zero, phi_q2_first, phi_q2_zero, Composites, FirstManifold,
    SlowContext, TerminalVoltages, ZeroManifold,
};
pub use params::{HighOrderParams, PINNED_C1, PINNED_C2, PINNED_D1_0, PINNED_K1, PINNED_X1};
pub use reduction::{input_from_setting, reduce_to_damped, reduce_to_damped_with, setting_from_input};
pub use validation::{
    probe_context, ratio_tests, ratio_tests_at, round_trip, trajectory_agreement, validate_reduction, Agreement, AgreementSetup,
    RatioTest, ReductionReport, RoundTrip, RATIO_TOLERANCE,
};
