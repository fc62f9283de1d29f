//! Bounded exogenous signals: the electrical load and the phase-measurement
//! disturbance.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::path::Path;

use crate::{Error, Result};

/// Piecewise-linear signal through `(t, value)` samples, held constant outside
/// the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl SampledSignal {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() {
            return Err(Error::BadSamples(format!("{} times but {} values", t.len(), v.len())));
        }
        if t.is_empty() {
            return Err(Error::BadSamples("no samples".into()));
        }
        if t.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::BadSamples("non-finite sample".into()));
        }
        if let Some(w) = t.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::BadSamples(format!("time not strictly increasing at {}", w[1])));
        }
        Ok(SampledSignal { t, v })
    }

    /// Two-column CSV `(t, value)`; a header row is tolerated.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let (mut t, mut v) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::BadSamples(format!("row {} has {} columns", i + 1, rec.len())));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    t.push(a);
                    v.push(b);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::BadSamples(format!("row {} is not numeric", i + 1))),
            }
        }
        SampledSignal::new(t, v)
    }

    /// Value and slope at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.t.len();
        if n == 1 || t <= self.t[0] {
            return (self.v[0], 0.0);
        }
        if t >= self.t[n - 1] {
            return (self.v[n - 1], 0.0);
        }
        let i = self.t.partition_point(|&x| x <= t) - 1;
        let slope = (self.v[i + 1] - self.v[i]) / (self.t[i + 1] - self.t[i]);
        (self.v[i] + slope * (t - self.t[i]), slope)
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn max_slope(&self) -> (f64, f64) {
        self.t
            .windows(2)
            .zip(self.v.windows(2))
            .map(|(t, v)| (t[0], ((v[1] - v[0]) / (t[1] - t[0])).abs()))
            .fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampDirection {
    Up,
    Down,
}

impl RampDirection {
    fn sign(self) -> f64 {
        match self {
            RampDirection::Up => 1.0,
            RampDirection::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum LoadShape {
    Constant,
    /// `ell_bar + delta_ell * sin(rate * (t - onset))` with `rate = delta_ell_dot / delta_ell`,
    /// so both bounds are attained.
    Sinusoid,
    /// Ramp by `delta_ell` at slope `delta_ell_dot`, then hold.
    RampHold { direction: RampDirection },
    /// Absolute load samples, linearly interpolated.
    Samples { signal: SampledSignal },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub ell_bar: f64,
    pub delta_ell: f64,
    pub delta_ell_dot: f64,
    pub onset_time: f64,
    pub shape: LoadShape,
}

impl LoadProfile {
    pub fn constant(ell_bar: f64) -> Self {
        LoadProfile { ell_bar, delta_ell: 0.0, delta_ell_dot: 0.0, onset_time: 0.0, shape: LoadShape::Constant }
    }

    pub fn sinusoid(ell_bar: f64, delta_ell: f64, delta_ell_dot: f64, onset_time: f64) -> Self {
        LoadProfile { ell_bar, delta_ell, delta_ell_dot, onset_time, shape: LoadShape::Sinusoid }
    }

    pub fn ramp_hold(
        ell_bar: f64,
        delta_ell: f64,
        delta_ell_dot: f64,
        onset_time: f64,
        direction: RampDirection,
    ) -> Self {
        LoadProfile { ell_bar, delta_ell, delta_ell_dot, onset_time, shape: LoadShape::RampHold { direction } }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ell_bar", self.ell_bar),
            ("delta_ell", self.delta_ell),
            ("delta_ell_dot", self.delta_ell_dot),
            ("onset_time", self.onset_time),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.delta_ell < 0.0 || self.delta_ell_dot < 0.0 {
            return Err(Error::param("delta_ell", "bounds must be nonnegative"));
        }
        if self.onset_time < 0.0 {
            return Err(Error::param("onset_time", "must be >= 0"));
        }
        match &self.shape {
            LoadShape::Sinusoid if self.delta_ell == 0.0 && self.delta_ell_dot > 0.0 => {
                Err(Error::param("delta_ell", "a sinusoid needs delta_ell > 0"))
            }
            LoadShape::Samples { signal } => {
                let (t, slope) = signal.max_slope();
                if slope > self.delta_ell_dot * (1.0 + 1e-12) {
                    return Err(Error::RateViolation { what: "load rate", t, value: slope, bound: self.delta_ell_dot });
                }
                for (i, v) in signal.values().iter().enumerate() {
                    let dev = (v - self.ell_bar).abs();
                    if dev > self.delta_ell * (1.0 + 1e-12) {
                        return Err(Error::RateViolation {
                            what: "load deviation",
                            t: signal.t[i],
                            value: dev,
                            bound: self.delta_ell,
                        });
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Load and its time derivative.
pub fn load_at(profile: &LoadProfile, t: f64) -> (f64, f64) {
    let p = profile;
    let tau = t - p.onset_time;
    match &p.shape {
        LoadShape::Constant => (p.ell_bar, 0.0),
        LoadShape::Sinusoid => {
            if tau < 0.0 || p.delta_ell == 0.0 {
                return (p.ell_bar, 0.0);
            }
            let rate = p.delta_ell_dot / p.delta_ell;
            let (s, c) = (rate * tau).sin_cos();
            (p.ell_bar + p.delta_ell * s, p.delta_ell_dot * c)
        }
        LoadShape::RampHold { direction } => {
            if tau < 0.0 || p.delta_ell_dot == 0.0 {
                return (p.ell_bar, 0.0);
            }
            let sign = direction.sign();
            let end = p.delta_ell / p.delta_ell_dot;
            if tau < end {
                (p.ell_bar + sign * p.delta_ell_dot * tau, sign * p.delta_ell_dot)
            } else {
                (p.ell_bar + sign * p.delta_ell, 0.0)
            }
        }
        LoadShape::Samples { signal } => signal.eval(t),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Disturbance {
    Zero,
    Constant { amplitude: f64 },
    Sinusoid { amplitude: f64, frequency: f64 },
    Samples { signal: SampledSignal },
}

/// Largest phase offset a spoofer is assumed to inject undetected.
pub const SPOOF_CAP: f64 = 0.25 * PI;

impl Disturbance {
    /// Supremum of `|d(t)|`.
    pub fn amplitude(&self) -> f64 {
        match self {
            Disturbance::Zero => 0.0,
            Disturbance::Constant { amplitude } | Disturbance::Sinusoid { amplitude, .. } => amplitude.abs(),
            Disturbance::Samples { signal } => signal.values().iter().fold(0.0, |m, v| v.abs().max(m)),
        }
    }

    /// Whether the offset is larger than an undetected spoof is assumed to be.
    pub fn exceeds_spoof_cap(&self) -> bool {
        self.amplitude() > SPOOF_CAP + 1e-12
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Disturbance::Constant { amplitude } if !amplitude.is_finite() => {
                Err(Error::param("amplitude", "must be finite"))
            }
            Disturbance::Sinusoid { amplitude, frequency } if !(amplitude.is_finite() && frequency.is_finite()) => {
                Err(Error::param("amplitude", "amplitude and frequency must be finite"))
            }
            _ => Ok(()),
        }
    }
}

pub fn disturbance_at(dist: &Disturbance, t: f64) -> f64 {
    match dist {
        Disturbance::Zero => 0.0,
        Disturbance::Constant { amplitude } => *amplitude,
        Disturbance::Sinusoid { amplitude, frequency } => amplitude * (frequency * t).sin(),
        Disturbance::Samples { signal } => signal.eval(t).0,
    }
}

/// The corrupted bus phase as a PMU would report it, reduced to `[0, 2 pi)`.
pub fn measured_phase(theta3: f64, d: f64) -> f64 {
    let r = (theta3 + d).rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}
