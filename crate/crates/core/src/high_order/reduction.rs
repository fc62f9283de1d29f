use super::manifold::Composites;
use super::params::HighOrderParams;
use crate::model::GeneratorParams;
use crate::Result;

/// Damped-model constants of the leader implied by the detailed machine.
/// Follower constants, the control gain and the nominal load are taken from
/// [`GeneratorParams::reference`].
pub fn reduce_to_damped(p: &HighOrderParams) -> Result<GeneratorParams> {
    reduce_to_damped_with(p, &GeneratorParams::reference())
}

/// Like [`reduce_to_damped`], keeping the non-leader fields of `template`.
pub fn reduce_to_damped_with(p: &HighOrderParams, template: &GeneratorParams) -> Result<GeneratorParams> {
    p.validate()?;
    let c = Composites::new(p)?;
    let g = GeneratorParams {
        omega0: p.omega0,
        d1_0: p.dbar0() + p.d_tilde0,
        k1: p.k_u * p.vr_minus_v1 / (p.k_f * p.xd),
        x1: (p.xd - p.xq) / (2.0 * p.xq * p.xd),
        c1: c.c1,
        c2: c.c2,
        inertia: p.inertia,
        ..*template
    }
    .with_steady_angle()?;
    g.validate()?;
    Ok(g)
}

/// Governor setting that realizes the damped-model input `u1`.
pub fn setting_from_input(u1: f64, p: &HighOrderParams) -> f64 {
    u1 - 1.0 / p.r_d
}

pub fn input_from_setting(u_tilde: f64, p: &HighOrderParams) -> f64 {
    u_tilde + 1.0 / p.r_d
}
