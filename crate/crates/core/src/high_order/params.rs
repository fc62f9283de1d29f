use serde::{Deserialize, Serialize};

use super::manifold::Composites;
use crate::{Error, Result};

/// Constants of the detailed machine: damper windings, stator, exciter and
/// a diesel-engine speed governor. Primes are spelled `_p`, double primes `_pp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighOrderParams {
    pub xq: f64,
    pub xd: f64,
    pub xq_p: f64,
    pub xd_p: f64,
    pub xq_pp: f64,
    pub xd_pp: f64,
    pub xk: f64,
    /// Field winding reactance; listed for completeness, not used by the equations.
    pub xf: f64,
    pub rs: f64,

    pub tau_q_p: f64,
    pub tau_q_pp: f64,
    pub tau_d_p: f64,
    pub tau_d_pp: f64,
    pub tau_f: f64,
    pub tau_u: f64,
    pub tau_u_bar: f64,
    pub tau_m: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub tau4: f64,
    pub tau5: f64,
    pub tau6: f64,
    pub tau_a2: f64,

    pub k_f: f64,
    pub k_u: f64,
    pub k_u_bar: f64,
    pub kappa: f64,

    pub inertia: f64,
    /// Friction and windage damping.
    pub d_tilde0: f64,
    /// Droop coefficient.
    pub r_d: f64,
    /// Steady voltage-regulator error `V_r - V_1`.
    pub vr_minus_v1: f64,
    /// Power change setting of the governor.
    pub u_tilde: f64,
    pub omega0: f64,
}

/// The reference damped-model constants the default set is pinned to.
pub const PINNED_K1: f64 = 0.6434;
pub const PINNED_X1: f64 = 0.0742;
pub const PINNED_D1_0: f64 = 0.0531;
pub const PINNED_C1: f64 = 0.0656;
pub const PINNED_C2: f64 = 0.00548;

impl HighOrderParams {
    /// Typical per-unit machine data; not a published parameter set. The
    /// reducible constants (and the damper time constants `tau_q_p`,
    /// `tau_d_pp`, which set `C1` and `C2`) are overwritten by [`Self::default_set`].
    pub fn typical() -> Self {
        let tau5 = 0.02;
        let tau6 = 0.02;
        HighOrderParams {
            xq: 1.4,
            xd: 1.8,
            xq_p: 0.6,
            xd_p: 0.3,
            xq_pp: 0.3,
            xd_pp: 0.25,
            xk: 0.15,
            xf: 1.7,
            rs: 0.003,
            tau_q_p: 0.1,
            tau_q_pp: 0.02,
            tau_d_p: 0.5,
            tau_d_pp: 0.005,
            tau_f: 0.05,
            tau_u: 0.02,
            tau_u_bar: 0.05,
            tau_m: 0.05,
            tau1: 0.01,
            tau2: 0.02,
            tau3: 0.005,
            tau4: 0.005,
            tau5,
            tau6,
            tau_a2: tau5 * tau6 / (tau5 + tau6),
            k_f: 1.0,
            k_u: 1.0,
            k_u_bar: 0.01,
            kappa: 200.0,
            inertia: 1.0,
            d_tilde0: 0.0,
            r_d: 0.05,
            vr_minus_v1: 1.0,
            u_tilde: 0.5,
            omega0: 120.0 * std::f64::consts::PI,
        }
    }

    /// [`Self::typical`] with every damped-model constant pinned to the
    /// reference operating point by inverting the reduction formulas.
    pub fn default_set() -> Self {
        let base = Self::typical().pin_reduced(PINNED_K1, PINNED_X1, PINNED_D1_0).expect("typical data is valid");
        base.pin_damping(PINNED_C1, PINNED_C2).expect("typical data admits the reference damping")
    }

    /// Choose `xq`, `k_u` and `d_tilde0` so that the reduction yields the given
    /// `K1`, `X1` and `D1_0`.
    pub fn pin_reduced(mut self, k1: f64, x1: f64, d1_0: f64) -> Result<Self> {
        self.xq = self.xd / (1.0 + 2.0 * x1 * self.xd);
        self.k_u = k1 * self.k_f * self.xd / self.vr_minus_v1;
        self.d_tilde0 = d1_0 - self.dbar0();
        if self.d_tilde0 < 0.0 {
            return Err(Error::param("r_d", format!("droop alone gives D = {} > {d1_0}", self.dbar0())));
        }
        self.validate()?;
        Ok(self)
    }

    /// Choose `tau_q_p` (on the branch where `C1` grows with it) and
    /// `tau_d_pp` so that the composite damping constants equal `c1`, `c2`.
    pub fn pin_damping(mut self, c1: f64, c2: f64) -> Result<Self> {
        let c1_of = |p: &mut Self, tau: f64| {
            p.tau_q_p = tau;
            Composites::new(p).map(|c| c.c1).unwrap_or(f64::NAN)
        };
        // C1 blows up where D_q vanishes, dips, then grows linearly in tau_q_p.
        let mut probe = self.clone();
        let grid: Vec<f64> = (0..400).map(|i| 1e-3 * 1.03f64.powi(i)).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| c1_of(&mut probe, t)).collect();
        let i_min = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite() && **v > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::param("tau_q_p", "no admissible value"))?;
        let hi = grid.iter().zip(&vals).skip(i_min).find(|(_, v)| **v > c1).map(|(t, _)| *t);
        let Some(hi) = hi else {
            return Err(Error::param("tau_q_p", format!("C1 = {c1} not reachable")));
        };
        if vals[i_min] > c1 {
            return Err(Error::param("tau_q_p", format!("C1 = {c1} below attainable minimum {}", vals[i_min])));
        }
        self.tau_q_p = bisect(grid[i_min], hi, |t| c1_of(&mut probe, t) - c1);

        let mut probe = self.clone();
        let c2_of = |p: &mut Self, tau: f64| {
            p.tau_d_pp = tau;
            Composites::new(p).map(|c| c.c2).unwrap_or(f64::NAN)
        };
        let (lo, hi) = (1e-6, 0.5 * self.tau_d_p);
        if !((c2_of(&mut probe, lo) - c2) * (c2_of(&mut probe, hi) - c2) < 0.0) {
            return Err(Error::param("tau_d_pp", format!("C2 = {c2} not bracketed")));
        }
        self.tau_d_pp = bisect(lo, hi, |t| c2_of(&mut probe, t) - c2);
        self.validate()?;
        Ok(self)
    }

    pub fn dbar0(&self) -> f64 {
        1.0 / (self.r_d * self.omega0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.named_values();
        if let Some((name, _)) = all.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(*name, "must be finite"));
        }
        let taus = [
            ("tau_q_p", self.tau_q_p),
            ("tau_q_pp", self.tau_q_pp),
            ("tau_d_p", self.tau_d_p),
            ("tau_d_pp", self.tau_d_pp),
            ("tau_f", self.tau_f),
            ("tau_u", self.tau_u),
            ("tau_u_bar", self.tau_u_bar),
            ("tau_m", self.tau_m),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("tau3", self.tau3),
            ("tau4", self.tau4),
            ("tau5", self.tau5),
            ("tau6", self.tau6),
            ("tau_a2", self.tau_a2),
        ];
        for (name, v) in taus {
            if v <= 0.0 {
                return Err(Error::param(name, format!("time constant must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("xq", self.xq),
            ("xd", self.xd),
            ("xq_pp", self.xq_pp),
            ("xd_pp", self.xd_pp),
            ("k_f", self.k_f),
            ("inertia", self.inertia),
            ("r_d", self.r_d),
            ("omega0", self.omega0),
        ] {
            if v <= 0.0 {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        for (name, big, small, what) in [
            ("xq_p", self.xq_p, self.xk, "xq_p > xk"),
            ("xd_p", self.xd_p, self.xk, "xd_p > xk"),
            ("xq_pp", self.xq_p, self.xq_pp, "xq_p > xq_pp"),
            ("xd_pp", self.xd_p, self.xd_pp, "xd_p > xd_pp"),
        ] {
            if big <= small {
                return Err(Error::param(name, format!("reactance ordering requires {what}")));
            }
        }
        let a2 = self.tau5 * self.tau6 / (self.tau5 + self.tau6);
        if (self.tau_a2 - a2).abs() > 1e-12 {
            return Err(Error::param("tau_a2", format!("must equal tau5 tau6 / (tau5 + tau6) = {a2}")));
        }
        if self.d_tilde0 < 0.0 || self.rs < 0.0 || self.k_u_bar < 0.0 {
            return Err(Error::param("d_tilde0", "d_tilde0, rs and k_u_bar must be >= 0"));
        }
        Ok(())
    }

    fn named_values(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("xq", self.xq),
            ("xd", self.xd),
            ("xq_p", self.xq_p),
            ("xd_p", self.xd_p),
            ("xq_pp", self.xq_pp),
            ("xd_pp", self.xd_pp),
            ("xk", self.xk),
            ("xf", self.xf),
            ("rs", self.rs),
            ("k_f", self.k_f),
            ("k_u", self.k_u),
            ("k_u_bar", self.k_u_bar),
            ("kappa", self.kappa),
            ("d_tilde0", self.d_tilde0),
            ("vr_minus_v1", self.vr_minus_v1),
            ("u_tilde", self.u_tilde),
        ]
    }
}

fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
