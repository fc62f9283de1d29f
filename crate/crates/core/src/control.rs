//! Control laws for the leader, the follower and the shared AGC loop.

use serde::{Deserialize, Serialize};

use crate::model::GeneratorParams;
use crate::{Error, Result};

/// Participation factors of the secondary (AGC) loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgcParams {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl Default for AgcParams {
    fn default() -> Self {
        AgcParams { alpha1: 0.5, alpha2: 0.5 }
    }
}

impl AgcParams {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::param(name, format!("must lie in [0, 1], got {a}")));
            }
        }
        if (self.alpha1 + self.alpha2 - 1.0).abs() > 1e-12 {
            return Err(Error::param("alpha2", "participation factors must sum to 1"));
        }
        Ok(())
    }
}

/// Integral control on the leader's phase drift: `u1 = -k (theta1 - omega0 t)`.
pub fn leader_control(theta1: f64, t: f64, params: &GeneratorParams) -> f64 {
    -params.k * (theta1 - params.omega0 * t)
}

/// Follower law driven by the corrupted bus phase `theta3 + d`. It cancels the
/// follower's own damping and substitutes the leader's, so that with `d = 0`
/// the follower replicates the leader's closed loop.
pub fn follower_control(measured_theta3_plus_d: f64, omega2: f64, t: f64, params: &GeneratorParams) -> f64 {
    let p = params;
    -p.k * (measured_theta3_plus_d + p.theta13_bar) + p.k * p.omega0 * t - p.b1(p.theta13_bar)
        + (p.d2_0 - p.d1_0) * omega2
}

/// Returns `(z_dot, u1, u2)`.
pub fn agc_control(omega1: f64, omega2: f64, z: f64, agc: &AgcParams, params: &GeneratorParams) -> (f64, f64, f64) {
    let (d1, d2) = (params.d1_0, params.d2_0);
    let avg = (d1 * omega1 + d2 * omega2) / (d1 + d2);
    (-(avg - params.omega0), agc.alpha1 * z, agc.alpha2 * z)
}
