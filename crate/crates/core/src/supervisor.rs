//! Connection supervisor.
//!
//! The follower may be switched onto the bus only when the measured phase
//! difference is (within a band) a multiple of 2π and the speed mismatch is
//! inside the admissible limit. The supervisor sees the corrupted phase only,
//! so the true phase error at connection can be off by the disturbance.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::model::{GeneratorParams, PreSyncState};
use crate::{Error, Result};

/// Reduce an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncThresholds {
    pub max_speed_error: f64,
    pub max_phase_error: f64,
    pub freq_band: f64,
}

impl Default for SyncThresholds {
    fn default() -> Self {
        SyncThresholds { max_speed_error: 0.134 * PI, max_phase_error: 0.055 * PI, freq_band: PI }
    }
}

impl SyncThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("max_speed_error", self.max_speed_error),
            ("max_phase_error", self.max_phase_error),
            ("freq_band", self.freq_band),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionEvent {
    pub time: f64,
    pub wrapped_phase_error: f64,
    pub speed_error: f64,
    /// `theta2 - theta3` wrapped, i.e. including the offset the supervisor cannot see.
    pub true_phase_error: f64,
}

/// Point check of the connection conditions.
pub fn check_connection(
    t: f64,
    state: &PreSyncState,
    measured_theta3_plus_d: f64,
    omega3: f64,
    thresholds: &SyncThresholds,
) -> Option<ConnectionEvent> {
    let phase = wrap_phase(state.theta2 - measured_theta3_plus_d);
    let speed = state.omega2 - omega3;
    (phase.abs() <= thresholds.max_phase_error && speed.abs() <= thresholds.max_speed_error).then(|| {
        ConnectionEvent {
            time: t,
            wrapped_phase_error: phase,
            speed_error: speed,
            true_phase_error: wrap_phase(state.theta2 - state.theta3()),
        }
    })
}

/// Worst-case true phase deviation at the instant of connection.
pub fn phase_dev_bound(disturbance_amplitude: f64, thresholds: &SyncThresholds) -> f64 {
    thresholds.max_phase_error + disturbance_amplitude.abs()
}

/// Time after which the exponentially decaying synchronization error is
/// guaranteed to have fallen from `omega0` to `e_target`.
pub fn waiting_time_estimate(params: &GeneratorParams, eps: f64, e_target: f64) -> Result<f64> {
    if !(e_target > 0.0 && e_target < params.omega0) {
        return Err(Error::InvalidTarget { target: e_target, omega0: params.omega0 });
    }
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be > 0"));
    }
    Ok((1.0 + eps) / (eps * params.d1_0) * (params.omega0 / e_target).ln())
}

/// How the supervisor obtains the speed mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedCheck {
    /// Use the simulated `omega2 - omega3` directly.
    #[default]
    TrueError,
    /// Differentiate the measured phase between steps.
    MeasuredPhaseRate,
}

/// One supervisor observation at the end of an integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncSample {
    pub t: f64,
    /// `theta2 - (theta3 + d)`, not wrapped.
    pub phase_error: f64,
    pub speed_error: f64,
    /// `theta2 - theta3`, not wrapped.
    pub true_phase_error: f64,
}

/// A detected connection together with where it sits inside the last step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Fraction of the last step at which both conditions first held.
    pub fraction: f64,
    pub event: ConnectionEvent,
}

/// Step-driven connection detector with linear crossing refinement.
#[derive(Debug, Clone)]
pub struct Supervisor {
    thresholds: SyncThresholds,
    prev: Option<SyncSample>,
}

impl Supervisor {
    pub fn new(thresholds: SyncThresholds) -> Self {
        Supervisor { thresholds, prev: None }
    }

    pub fn thresholds(&self) -> &SyncThresholds {
        &self.thresholds
    }

    fn holds(&self, phase: f64, speed: f64) -> bool {
        wrap_phase(phase).abs() <= self.thresholds.max_phase_error && speed.abs() <= self.thresholds.max_speed_error
    }

    /// Feed the sample at the end of a step. Returns the refined crossing if
    /// both conditions hold at this sample.
    pub fn observe(&mut self, s: SyncSample) -> Option<Crossing> {
        let prev = self.prev.replace(s);
        if !self.holds(s.phase_error, s.speed_error) {
            return None;
        }
        let th = self.thresholds;
        let Some(p) = prev else {
            return Some(Crossing {
                fraction: 1.0,
                event: ConnectionEvent {
                    time: s.t,
                    wrapped_phase_error: wrap_phase(s.phase_error),
                    speed_error: s.speed_error,
                    true_phase_error: wrap_phase(s.true_phase_error),
                },
            });
        };
        // Work on the branch of the wrapped phase that ends inside the band.
        let ph1 = wrap_phase(s.phase_error);
        let ph0 = ph1 - wrap_phase(s.phase_error - p.phase_error);
        let f = entry_fraction(ph0, ph1, th.max_phase_error)
            .max(entry_fraction(p.speed_error, s.speed_error, th.max_speed_error));
        let lerp = |a: f64, b: f64| a + f * (b - a);
        let tr1 = s.true_phase_error;
        let tr0 = tr1 - wrap_phase(s.true_phase_error - p.true_phase_error);
        let phase = lerp(ph0, ph1).clamp(-th.max_phase_error, th.max_phase_error);
        let speed = lerp(p.speed_error, s.speed_error).clamp(-th.max_speed_error, th.max_speed_error);
        Some(Crossing {
            fraction: f,
            event: ConnectionEvent {
                time: lerp(p.t, s.t),
                wrapped_phase_error: phase,
                speed_error: speed,
                true_phase_error: wrap_phase(lerp(tr0, tr1)),
            },
        })
    }
}

/// Smallest `f` in `[0, 1]` with `|x0 + f (x1 - x0)| <= bound`, given `|x1| <= bound`.
fn entry_fraction(x0: f64, x1: f64, bound: f64) -> f64 {
    let f = if x0 > bound {
        (x0 - bound) / (x0 - x1)
    } else if x0 < -bound {
        (-bound - x0) / (x1 - x0)
    } else {
        0.0
    };
    f.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_fraction_linear() {
        assert_eq!(entry_fraction(3.0, 1.0, 2.0), 0.5);
        assert_eq!(entry_fraction(-3.0, -1.0, 2.0), 0.5);
        assert_eq!(entry_fraction(0.5, 1.0, 2.0), 0.0);
    }

    #[test]
    fn supervisor_refines_inside_step() {
        let th = SyncThresholds { max_speed_error: 1.0, max_phase_error: 0.1, freq_band: 1.0 };
        let mut sup = Supervisor::new(th);
        let mk = |t, ph| SyncSample { t, phase_error: ph, speed_error: 0.0, true_phase_error: ph };
        assert!(sup.observe(mk(0.0, 0.3)).is_none());
        let c = sup.observe(mk(1.0, 0.0)).unwrap();
        assert!((c.fraction - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.event.time - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.event.wrapped_phase_error - 0.1).abs() < 1e-12);
    }

    #[test]
    fn supervisor_handles_wrap_across_2pi() {
        let th = SyncThresholds { max_speed_error: 1.0, max_phase_error: 0.1, freq_band: 1.0 };
        let mut sup = Supervisor::new(th);
        let mk = |t, ph| SyncSample { t, phase_error: ph, speed_error: 0.0, true_phase_error: ph };
        assert!(sup.observe(mk(0.0, 4.0 * PI - 0.3)).is_none());
        let c = sup.observe(mk(1.0, 4.0 * PI + 0.0)).unwrap();
        assert!((c.fraction - 2.0 / 3.0).abs() < 1e-9);
    }
}
