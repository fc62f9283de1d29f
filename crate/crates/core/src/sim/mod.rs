//! Scenario description, fixed-step simulation and parameter sweeps.

mod engine;
mod sweep;
mod trajectory;

pub use engine::{initial_presync, leader_regulation_error, run, step, SimState};
pub use sweep::{sweep, SweepCell, SweepResult};
pub use trajectory::{Event, EventKind, Mode, Record, Trajectory, CSV_COLUMNS, TAIL_FRACTION};

use serde::{Deserialize, Serialize};

use crate::control::AgcParams;
use crate::high_order::HighOrderParams;
use crate::model::GeneratorParams;
use crate::phase_damping::{DampingFn, DampingProfile, KnownSignal};
use crate::signals::{Disturbance, LoadProfile};
use crate::supervisor::{SpeedCheck, SyncThresholds};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[default]
    Damped,
    HighOrder,
    PhaseDamping,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialConditions {
    /// Leader at its time-varying equilibrium, follower at rest.
    #[default]
    Default,
    Explicit { theta1: f64, omega1: f64, theta13: f64, theta2: f64, omega2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgcSettings {
    pub alpha1: f64,
    pub alpha2: f64,
    /// The loop is engaged at this time or at connection, whichever is later.
    pub engage_time: f64,
    pub enabled: bool,
}

impl Default for AgcSettings {
    fn default() -> Self {
        AgcSettings { alpha1: 0.5, alpha2: 0.5, engage_time: 400.0, enabled: true }
    }
}

impl AgcSettings {
    pub fn participation(&self) -> AgcParams {
        AgcParams { alpha1: self.alpha1, alpha2: self.alpha2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    pub horizon: f64,
    /// Step size; `None` picks 1e-3 s for the reduced models and 1e-4 s for
    /// the detailed one.
    pub dt: Option<f64>,
    pub record_interval: f64,
    pub model_kind: ModelKind,
    pub speed_check: SpeedCheck,
    pub initial_conditions: InitialConditions,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            horizon: 600.0,
            dt: None,
            record_interval: 0.05,
            model_kind: ModelKind::Damped,
            speed_check: SpeedCheck::TrueError,
            initial_conditions: InitialConditions::Default,
        }
    }
}

impl SimSettings {
    pub fn step_size(&self) -> f64 {
        self.dt.unwrap_or(match self.model_kind {
            ModelKind::HighOrder => 1e-4,
            _ => 1e-3,
        })
    }
}

/// Damping functions and known leader signal for phase-dependent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDampingSettings {
    pub leader: DampingFn,
    /// Defaults to the leader's damping.
    #[serde(default)]
    pub follower: Option<DampingFn>,
    #[serde(default)]
    pub signal: KnownSignal,
}

impl PhaseDampingSettings {
    /// `(leader, follower)` profiles with their bounds.
    pub fn profiles(&self) -> Result<(DampingProfile, DampingProfile)> {
        let leader = DampingProfile::from_fn(self.leader.clone())?;
        let follower = match &self.follower {
            Some(f) => DampingProfile::from_fn(f.clone())?,
            None => leader.clone(),
        };
        Ok((leader, follower))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: GeneratorParams,
    pub load: LoadProfile,
    pub disturbance: Disturbance,
    #[serde(default)]
    pub thresholds: SyncThresholds,
    #[serde(default)]
    pub agc: AgcSettings,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default)]
    pub damping: Option<PhaseDampingSettings>,
    #[serde(default)]
    pub high_order: Option<HighOrderParams>,
}

impl Scenario {
    /// The published operating point with a constant phase offset `d`.
    pub fn reference(load: LoadProfile, d: f64) -> Self {
        Scenario {
            params: GeneratorParams::reference(),
            load,
            disturbance: Disturbance::Constant { amplitude: d },
            thresholds: SyncThresholds::default(),
            agc: AgcSettings::default(),
            sim: SimSettings::default(),
            damping: None,
            high_order: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.sim.step_size()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.load.validate()?;
        self.disturbance.validate()?;
        self.thresholds.validate()?;
        self.agc.participation().validate()?;
        let dt = self.dt();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("sim.dt", format!("must be > 0, got {dt}")));
        }
        if !(self.sim.horizon >= dt && self.sim.horizon.is_finite()) {
            return Err(Error::param("sim.horizon", format!("must be >= dt = {dt}, got {}", self.sim.horizon)));
        }
        if !(self.sim.record_interval > 0.0) {
            return Err(Error::param("sim.record_interval", "must be > 0"));
        }
        if !self.agc.engage_time.is_finite() || self.agc.engage_time < 0.0 {
            return Err(Error::param("agc.engage_time", "must be finite and >= 0"));
        }
        match self.sim.model_kind {
            ModelKind::PhaseDamping => {
                let d = self
                    .damping
                    .as_ref()
                    .ok_or_else(|| Error::param("damping", "required for model_kind phase-damping"))?;
                d.profiles()?;
            }
            ModelKind::HighOrder => {
                if let Some(h) = &self.high_order {
                    h.validate()?;
                }
            }
            ModelKind::Damped => {}
        }
        Ok(())
    }
}
