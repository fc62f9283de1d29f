//! Second-order damped generator, bus and follower dynamics.
//!
//! Before synchronization the leader serves the load alone. The bus angle is
//! carried as the leader–bus difference `theta13`, which turns the implicit
//! power balance `ell = B1(theta13) + D1(theta13) * d/dt theta13` into an
//! explicit ODE. After synchronization both machines feed the bus and the bus
//! frequency is resolved algebraically from the combined power balance.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::{Error, Result};

/// Below this the damping function is treated as zero.
pub const DAMPING_FLOOR: f64 = 1e-12;

/// `K sin s + X sin 2s`
pub fn eval_b(kcoef: f64, xcoef: f64, s: f64) -> f64 {
    kcoef * s.sin() + xcoef * (2.0 * s).sin()
}

pub fn eval_b_prime(kcoef: f64, xcoef: f64, s: f64) -> f64 {
    kcoef * s.cos() + 2.0 * xcoef * (2.0 * s).cos()
}

/// `C1 cos^2 s + C2 sin^2 s`
pub fn eval_d(c1: f64, c2: f64, s: f64) -> f64 {
    let (sn, cs) = s.sin_cos();
    c1 * cs * cs + c2 * sn * sn
}

pub fn eval_d_prime(c1: f64, c2: f64, s: f64) -> f64 {
    (c2 - c1) * (2.0 * s).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub k: f64,
    pub omega0: f64,
    pub d1_0: f64,
    pub d2_0: f64,
    pub k1: f64,
    pub k2: f64,
    pub x1: f64,
    pub x2: f64,
    pub c1: f64,
    pub c2: f64,
    pub ell_bar: f64,
    pub theta13_bar: f64,
    pub inertia: f64,
}

impl GeneratorParams {
    /// The published operating point: 60 Hz, k = 0.01, half-load.
    pub fn reference() -> Self {
        let mut p = GeneratorParams {
            k: 0.01,
            omega0: 120.0 * PI,
            d1_0: 0.0531,
            d2_0: 0.0531,
            k1: 0.6434,
            k2: 0.4167,
            x1: 0.0742,
            x2: 0.0742,
            c1: 0.0656,
            c2: 0.00548,
            ell_bar: 0.5,
            theta13_bar: 0.0,
            inertia: 1.0,
        };
        p.theta13_bar = steady_theta13(&p, p.ell_bar).expect("reference operating point has a root");
        p
    }

    /// Recompute `theta13_bar` from `ell_bar`.
    pub fn with_steady_angle(mut self) -> Result<Self> {
        self.theta13_bar = steady_theta13(&self, self.ell_bar)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("k", self.k),
            ("omega0", self.omega0),
            ("d1_0", self.d1_0),
            ("d2_0", self.d2_0),
            ("k1", self.k1),
            ("k2", self.k2),
            ("x1", self.x1),
            ("x2", self.x2),
            ("c1", self.c1),
            ("c2", self.c2),
            ("ell_bar", self.ell_bar),
            ("theta13_bar", self.theta13_bar),
            ("inertia", self.inertia),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        let positive = [
            ("k", self.k),
            ("omega0", self.omega0),
            ("d1_0", self.d1_0),
            ("d2_0", self.d2_0),
            ("k1", self.k1),
            ("inertia", self.inertia),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        for (name, v) in [("x1", self.x1), ("x2", self.x2), ("c1", self.c1), ("c2", self.c2)] {
            if v < 0.0 {
                return Err(Error::param(name, format!("must be >= 0, got {v}")));
            }
        }
        if self.c1 + self.c2 <= 0.0 {
            return Err(Error::param("c1", "c1 and c2 cannot both be zero"));
        }
        let resid = (self.b1(self.theta13_bar) - self.ell_bar).abs();
        if resid > 1e-9 {
            return Err(Error::param(
                "theta13_bar",
                format!("B1(theta13_bar) differs from ell_bar by {resid:.3e}"),
            ));
        }
        Ok(())
    }

    pub fn b1(&self, s: f64) -> f64 {
        eval_b(self.k1, self.x1, s)
    }

    pub fn b2(&self, s: f64) -> f64 {
        eval_b(self.k2, self.x2, s)
    }

    pub fn b1_prime(&self, s: f64) -> f64 {
        eval_b_prime(self.k1, self.x1, s)
    }

    pub fn d1(&self, s: f64) -> f64 {
        eval_d(self.c1, self.c2, s)
    }

    /// The follower shares the damping coefficients of the leader.
    pub fn d2(&self, s: f64) -> f64 {
        eval_d(self.c1, self.c2, s)
    }

    /// Leader integral-control offset at the time-varying equilibrium.
    pub fn equilibrium_delta1(&self, ell: f64) -> f64 {
        -(ell + self.d1_0 * self.omega0) / self.k
    }
}

/// Upper end of the interval where B1 increases, capped at pi/2.
pub fn increasing_limit(params: &GeneratorParams) -> f64 {
    let f = |s| params.b1_prime(s);
    if f(FRAC_PI_2) > 0.0 {
        return FRAC_PI_2;
    }
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of `B1(theta) = ell` on the increasing branch inside `(0, pi/2)`.
pub fn steady_theta13(params: &GeneratorParams, ell: f64) -> Result<f64> {
    let slope0 = params.b1_prime(0.0);
    if slope0 <= 0.0 {
        return Err(Error::NonMonotoneBracket { slope: slope0 });
    }
    let upper = increasing_limit(params);
    let max = params.b1(upper);
    if !(0.0..=max).contains(&ell) {
        return Err(Error::NoRoot { ell, upper, max });
    }
    if ell == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-16 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if params.b1(mid) < ell {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PreSyncState {
    pub theta1: f64,
    pub omega1: f64,
    pub theta13: f64,
    pub theta2: f64,
    pub omega2: f64,
}

impl PreSyncState {
    pub fn theta3(&self) -> f64 {
        self.theta1 - self.theta13
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.theta1, self.omega1, self.theta13, self.theta2, self.omega2]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        PreSyncState { theta1: a[0], omega1: a[1], theta13: a[2], theta2: a[3], omega2: a[4] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PostSyncState {
    pub theta1: f64,
    pub omega1: f64,
    pub theta2: f64,
    pub omega2: f64,
    pub theta3: f64,
    pub z: f64,
}

impl PostSyncState {
    pub fn theta13(&self) -> f64 {
        self.theta1 - self.theta3
    }

    pub fn theta23(&self) -> f64 {
        self.theta2 - self.theta3
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.theta1, self.omega1, self.theta2, self.omega2, self.theta3, self.z]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        PostSyncState { theta1: a[0], omega1: a[1], theta2: a[2], omega2: a[3], theta3: a[4], z: a[5] }
    }
}

/// Algebraic quantities accompanying a right-hand-side evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BusOutputs {
    pub omega3: f64,
    pub p1: f64,
    pub p2: f64,
}

fn damping_checked(value: f64, angle: f64) -> Result<f64> {
    if value <= DAMPING_FLOOR || !value.is_finite() {
        Err(Error::DegenerateDamping { angle, value })
    } else {
        Ok(value)
    }
}

/// Pre-synchronization derivative and bus outputs.
pub fn presync_rhs(
    state: &PreSyncState,
    u1: f64,
    u2: f64,
    ell: f64,
    params: &GeneratorParams,
) -> Result<(PreSyncState, BusOutputs)> {
    let d1 = damping_checked(params.d1(state.theta13), state.theta13)?;
    let theta13_dot = (ell - params.b1(state.theta13)) / d1;
    let m = params.inertia;
    let deriv = PreSyncState {
        theta1: state.omega1,
        omega1: (u1 - ell - params.d1_0 * state.omega1) / m,
        theta13: theta13_dot,
        theta2: state.omega2,
        omega2: (u2 - params.d2_0 * state.omega2) / m,
    };
    let out = BusOutputs { omega3: state.omega1 - theta13_dot, p1: ell, p2: 0.0 };
    Ok((deriv, out))
}

/// Post-synchronization derivative (with `z` left at zero for the caller's
/// integrator law) and bus outputs.
pub fn postsync_rhs(
    state: &PostSyncState,
    u1: f64,
    u2: f64,
    ell: f64,
    params: &GeneratorParams,
) -> Result<(PostSyncState, BusOutputs)> {
    let (s13, s23) = (state.theta13(), state.theta23());
    let d1 = params.d1(s13);
    let d2 = params.d2(s23);
    damping_checked(d1 + d2, s13)?;
    let (b1, b2) = (params.b1(s13), params.b2(s23));
    let omega3 = (d1 * state.omega1 + d2 * state.omega2 + b1 + b2 - ell) / (d1 + d2);
    let p1 = b1 + d1 * (state.omega1 - omega3);
    let p2 = b2 + d2 * (state.omega2 - omega3);
    let m = params.inertia;
    let deriv = PostSyncState {
        theta1: state.omega1,
        omega1: (u1 - p1 - params.d1_0 * state.omega1) / m,
        theta2: state.omega2,
        omega2: (u2 - p2 - params.d2_0 * state.omega2) / m,
        theta3: omega3,
        z: 0.0,
    };
    Ok((deriv, BusOutputs { omega3, p1, p2 }))
}

/// Linearization of the bus-angle equation about `(theta13_bar, ell_bar)`.
///
/// Scalar form: `d/dt dtheta = a dtheta + b dell`. The augmented form writes
/// `d/dt (dtheta, d/dt dtheta)` as `state * dtheta + input * (dell, d/dt dell)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallSignal {
    pub a: f64,
    /// Coefficients on `(dell, d/dt dell)` in the scalar form.
    pub input: [f64; 2],
    pub augmented_state: [f64; 2],
    pub augmented_input: [[f64; 2]; 2],
}

pub fn small_signal_jacobian(params: &GeneratorParams, theta13_bar: f64) -> Result<SmallSignal> {
    let d = damping_checked(params.d1(theta13_bar), theta13_bar)?;
    let a = -params.b1_prime(theta13_bar) / d;
    let b = 1.0 / d;
    Ok(SmallSignal {
        a,
        input: [b, 0.0],
        augmented_state: [a, a * a],
        augmented_input: [[b, 0.0], [a * b, b]],
    })
}

/// The augmented small-signal system with the input matrix carrying the
/// opposite sign to the direct linearization, as it is commonly printed.
/// Exposed only for side-by-side comparison with [`small_signal_jacobian`].
pub fn paper_small_signal(params: &GeneratorParams, theta13_bar: f64) -> Result<SmallSignal> {
    let mut s = small_signal_jacobian(params, theta13_bar)?;
    s.input = s.input.map(|v| -v);
    s.augmented_input = s.augmented_input.map(|row| row.map(|v| -v));
    Ok(s)
}
