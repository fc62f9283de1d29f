//! Leader and follower with phase-dependent damping.
//!
//! Here the leader obeys `omega1' = u1 - D1(theta1) omega1 + xi1(t)` with a
//! known signal `xi1`, and the follower sees the leader's phase corrupted by
//! `d`. The leader's shifted dynamics become a slowly varying linear system;
//! the constants below are the ones a standard slowly-varying stability lemma
//! needs. The follower's synchronization error is quasi-ISS with gain
//! `phi(r) / D_lower`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::analysis::overshoot_constant;
use crate::model::GeneratorParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingFn {
    Constant { value: f64 },
    /// `d0 + a sin(theta)`
    Sinusoidal { d0: f64, a: f64 },
    /// Periodic piecewise-linear table over `[0, 2 pi)` at equally spaced nodes.
    Table { values: Vec<f64> },
}

impl DampingFn {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            DampingFn::Constant { value } => *value,
            DampingFn::Sinusoidal { d0, a } => d0 + a * r.sin(),
            DampingFn::Table { values } => {
                let (i, f, n) = table_cell(values.len(), r);
                values[i] + f * (values[(i + 1) % n] - values[i])
            }
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            DampingFn::Constant { .. } => 0.0,
            DampingFn::Sinusoidal { a, .. } => a * r.cos(),
            DampingFn::Table { values } => {
                let (i, _, n) = table_cell(values.len(), r);
                (values[(i + 1) % n] - values[i]) / (TAU / n as f64)
            }
        }
    }
}

fn table_cell(n: usize, r: f64) -> (usize, f64, usize) {
    let h = TAU / n as f64;
    let x = r.rem_euclid(TAU) / h;
    let i = (x.floor() as usize).min(n - 1);
    (i, x - i as f64, n)
}

/// A damping function together with its bounds and derivative bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingProfile {
    pub d_fn: DampingFn,
    pub d_lower: f64,
    pub d_upper: f64,
    pub eps_deriv: f64,
}

impl DampingProfile {
    pub fn constant(d: f64) -> Result<Self> {
        Self::from_fn(DampingFn::Constant { value: d })
    }

    pub fn sinusoidal(d0: f64, a: f64) -> Result<Self> {
        if a.abs() > d0 / 2.0 {
            return Err(Error::param("a", format!("|a| must not exceed d0/2 = {}", d0 / 2.0)));
        }
        Self::from_fn(DampingFn::Sinusoidal { d0, a })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::param("values", "a damping table needs at least two nodes"));
        }
        Self::from_fn(DampingFn::Table { values })
    }

    /// Derive bounds analytically where possible, from the nodes otherwise.
    pub fn from_fn(d_fn: DampingFn) -> Result<Self> {
        let (lo, hi, eps) = match &d_fn {
            DampingFn::Constant { value } => (*value, *value, 0.0),
            DampingFn::Sinusoidal { d0, a } => (d0 - a.abs(), d0 + a.abs(), a.abs()),
            DampingFn::Table { values } => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let h = TAU / values.len() as f64;
                let eps = (0..values.len())
                    .map(|i| (values[(i + 1) % values.len()] - values[i]).abs() / h)
                    .fold(0.0, f64::max);
                (lo, hi, eps)
            }
        };
        let p = DampingProfile { d_fn, d_lower: lo, d_upper: hi, eps_deriv: eps };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_lower > 0.0 && self.d_lower.is_finite()) {
            return Err(Error::param("d_lower", format!("damping must stay positive, lower bound {}", self.d_lower)));
        }
        if self.d_upper < self.d_lower || !self.d_upper.is_finite() {
            return Err(Error::param("d_upper", "must be finite and >= d_lower"));
        }
        if !(self.eps_deriv >= 0.0) {
            return Err(Error::param("eps_deriv", "must be >= 0"));
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.d_fn.eval(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.d_fn.derivative(r)
    }

    /// Worst violations of the stated bounds over `n` samples of one period:
    /// `(below lower, above upper, derivative excess, periodicity error)`.
    pub fn dense_check(&self, n: usize) -> (f64, f64, f64, f64) {
        (0..n).fold((0.0f64, 0.0f64, 0.0f64, 0.0f64), |acc, i| {
            let r = TAU * i as f64 / n as f64;
            let v = self.eval(r);
            (
                acc.0.max(self.d_lower - v),
                acc.1.max(v - self.d_upper),
                acc.2.max(self.derivative(r).abs() - self.eps_deriv),
                acc.3.max((self.eval(r + TAU) - v).abs()),
            )
        })
    }
}

/// The known additive signal on the leader's speed equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KnownSignal {
    Constant { value: f64 },
    Sinusoid { mean: f64, amplitude: f64, frequency: f64 },
}

impl Default for KnownSignal {
    fn default() -> Self {
        KnownSignal::Constant { value: 0.0 }
    }
}

impl KnownSignal {
    pub fn xi(&self, t: f64) -> f64 {
        match *self {
            KnownSignal::Constant { value } => value,
            KnownSignal::Sinusoid { mean, amplitude, frequency } => mean + amplitude * (frequency * t).sin(),
        }
    }

    pub fn xi_dot(&self, t: f64) -> f64 {
        match *self {
            KnownSignal::Constant { .. } => 0.0,
            KnownSignal::Sinusoid { amplitude, frequency, .. } => amplitude * frequency * (frequency * t).cos(),
        }
    }

    /// Bound `M` on `|xi'|`.
    pub fn xi_dot_bound(&self) -> f64 {
        match *self {
            KnownSignal::Constant { .. } => 0.0,
            KnownSignal::Sinusoid { amplitude, frequency, .. } => (amplitude * frequency).abs(),
        }
    }
}

/// `(theta1', omega1')`
pub fn pd_leader_rhs(
    theta1: f64,
    omega1: f64,
    u1: f64,
    profile: &DampingProfile,
    signal: &KnownSignal,
    t: f64,
) -> (f64, f64) {
    (omega1, u1 - profile.eval(theta1) * omega1 + signal.xi(t))
}

/// Follower input built from the corrupted leader phase `theta1 + d`.
#[allow(clippy::too_many_arguments)]
pub fn pd_follower_control(
    measured_theta1_plus_d: f64,
    theta2: f64,
    omega2: f64,
    t: f64,
    d1: &DampingProfile,
    d2: &DampingProfile,
    signal: &KnownSignal,
    params: &GeneratorParams,
) -> f64 {
    let m = measured_theta1_plus_d;
    (d2.eval(theta2) - d1.eval(m)) * omega2 - params.k * m + params.k * params.omega0 * t + signal.xi(t)
}

/// Frozen-time equilibrium offset: the root of `k delta + D(delta) omega0 = xi`
/// nearest the value for the mean damping. With a strongly varying profile
/// the equation has many roots spaced by at most one period.
pub fn pd_equilibrium_delta(profile: &DampingProfile, xi: f64, params: &GeneratorParams) -> f64 {
    let (k, w0) = (params.k, params.omega0);
    let g = |d: f64| k * d + profile.eval(d) * w0 - xi;
    let center = (xi - 0.5 * (profile.d_lower + profile.d_upper) * w0) / k;
    if g(center) == 0.0 {
        return center;
    }
    // Walk outwards on both sides until the sign changes.
    let h = 1e-2;
    let reach = 0.5 * (profile.d_upper - profile.d_lower) * w0 / k + std::f64::consts::TAU;
    let mut step = 0.0;
    while step < reach {
        for (a, b) in [(center + step, center + step + h), (center - step - h, center - step)] {
            if g(a) * g(b) <= 0.0 {
                return bisect(&g, a, b);
            }
        }
        step += h;
    }
    center
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let rising = g(hi) >= g(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LtvConstants {
    pub lambda: f64,
    pub c: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub mu_max: f64,
    pub c_bar: f64,
    /// Decay rate of the state transition matrix at `mu`.
    pub lambda_bar: f64,
    pub mu: f64,
}

/// Stability constants for the leader's slowly varying closed loop, evaluated
/// at a derivative bound `mu` on `|A'(t)|`.
///
/// The norm bound `L` uses `A^T A = [[D^2 + 1, D k], [D k, 0]]`, i.e. it omits
/// the `k^2` entry of the exact product; for small `k` the difference is
/// negligible and `L` is reproduced as commonly stated.
pub fn ltv_constants(profile: &DampingProfile, params: &GeneratorParams, mu: f64) -> Result<LtvConstants> {
    let (k, dl, du) = (params.k, profile.d_lower, profile.d_upper);
    let c = overshoot_constant(k, du)?;
    let lambda = dl / 2.0;
    let s = du * du + 1.0;
    let l = (0.5 * (s + (s * s + 4.0 * du * du * k * k).sqrt())).sqrt();
    let beta1 = 1.0 / (2.0 * l);
    let beta2 = c * c / (2.0 * lambda);
    Ok(LtvConstants {
        lambda,
        c,
        l,
        beta1,
        beta2,
        mu_max: beta1 / (2.0 * beta2.powi(3)),
        c_bar: (beta2 / beta1).sqrt(),
        lambda_bar: 1.0 / beta2 - 2.0 * beta2 * beta2 * mu / beta1,
        mu,
    })
}

/// Exact `sup |A(t)|` over the damping range (the norm grows with `D`).
pub fn exact_norm_bound(profile: &DampingProfile, params: &GeneratorParams) -> f64 {
    nalgebra::Matrix2::new(-profile.d_upper, -params.k, 1.0, 0.0)
        .svd(false, false)
        .singular_values
        .max()
}

/// The region where `(theta1 mod 2 pi, omega1)` is assumed to evolve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaBox {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
}

impl OmegaBox {
    /// Full rotation, speeds within `pi` rad/s of nominal.
    pub fn nominal(omega0: f64) -> Self {
        OmegaBox { theta_lo: 0.0, theta_hi: TAU, omega_lo: omega0 - PI, omega_hi: omega0 + PI }
    }

    pub fn is_empty(&self) -> bool {
        !(self.theta_hi >= self.theta_lo && self.omega_hi >= self.omega_lo)
            || [self.theta_lo, self.theta_hi, self.omega_lo, self.omega_hi].iter().any(|v| !v.is_finite())
    }

    pub fn max_abs_omega(&self) -> f64 {
        self.omega_lo.abs().max(self.omega_hi.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiGain {
    /// Grid-search value of `phi(r)`.
    pub grid: f64,
    /// Certified Lipschitz envelope `(eps W + k) r`.
    pub envelope: f64,
}

pub const PHI_RESOLUTION: f64 = 1e-3;

pub fn iss_gain_phi(profile: &DampingProfile, omega_box: &OmegaBox, r: f64, params: &GeneratorParams) -> Result<PhiGain> {
    iss_gain_phi_with(profile, omega_box, r, params, PHI_RESOLUTION)
}

/// `phi(r) = max over the box and |d| <= r of |(D(theta + d) - D(theta)) omega| + k r`.
///
/// The objective is linear in `omega`, so only the box's speed endpoints are
/// visited; `theta` and `d` are gridded at `resolution` (both ends included).
pub fn iss_gain_phi_with(
    profile: &DampingProfile,
    omega_box: &OmegaBox,
    r: f64,
    params: &GeneratorParams,
    resolution: f64,
) -> Result<PhiGain> {
    if omega_box.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if !(r >= 0.0 && resolution > 0.0) {
        return Err(Error::param("r", "need r >= 0 and resolution > 0"));
    }
    let w = omega_box.max_abs_omega();
    let envelope = (profile.eps_deriv * w + params.k) * r;
    let nt = ((omega_box.theta_hi - omega_box.theta_lo) / resolution).ceil().max(1.0) as usize;
    let nd = (2.0 * r / resolution).ceil().max(1.0) as usize;
    let worst = (0..=nt)
        .into_par_iter()
        .map(|i| {
            let th = omega_box.theta_lo + (omega_box.theta_hi - omega_box.theta_lo) * i as f64 / nt as f64;
            let base = profile.eval(th);
            (0..=nd)
                .map(|j| {
                    let d = -r + 2.0 * r * j as f64 / nd as f64;
                    (profile.eval(th + d) - base).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(PhiGain { grid: worst * w + params.k * r, envelope })
}
