//! Closed-form robustness constants and ultimate bounds.
//!
//! With the leader under integral control, the shifted state
//! `(omega1 - omega0, delta1 - delta0(t))` obeys `x' = A x + (0, ell'/k)` with
//! `A = [[-D, -k], [1, 0]]`. A quadratic Lyapunov function with
//! `P = [[1, D/2], [D/2, k]]` gives `|e^{At}| <= c e^{-lambda t}` with
//! `lambda = D/2`, from which the regulation and synchronization bounds follow.

use serde::Serialize;

use crate::model::{GeneratorParams, PreSyncState};
use crate::ode::rk4_step;
use crate::signals::{load_at, LoadProfile};
use crate::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub lambda: f64,
    pub c: f64,
}

/// Overshoot constant of the quadratic Lyapunov certificate for
/// `A = [[-d, -k], [1, 0]]`.
pub fn overshoot_constant(k: f64, d: f64) -> Result<f64> {
    if !(k > d * d / 4.0) {
        return Err(Error::GainTooSmall { k, min: d * d / 4.0 });
    }
    let s = ((k - 1.0).powi(2) + d * d).sqrt();
    Ok(((k + 1.0 + s) / (k + 1.0 - s)).sqrt())
}

pub fn decay_constants(params: &GeneratorParams) -> Result<DecayConstants> {
    let c = overshoot_constant(params.k, params.d1_0)?;
    Ok(DecayConstants { lambda: params.d1_0 / 2.0, c })
}

pub fn system_matrix(k: f64, d: f64) -> Mat2 {
    [[-d, -k], [1.0, 0.0]]
}

pub fn lyapunov_matrix(k: f64, d: f64) -> Mat2 {
    [[1.0, d / 2.0], [d / 2.0, k]]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Largest entry of `|P A + A^T P + D P|`.
pub fn lyapunov_residual(k: f64, d: f64) -> f64 {
    let a = system_matrix(k, d);
    let p = lyapunov_matrix(k, d);
    let pa = mat_mul(&p, &a);
    let atp = mat_mul(&transpose(&a), &p);
    (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (pa[i][j] + atp[i][j] + d * p[i][j]).abs())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a real 2×2 matrix as `(re, im)` pairs.
pub fn eigenvalues(a: &Mat2) -> [(f64, f64); 2] {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(tr / 2.0 + r, 0.0), (tr / 2.0 - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(tr / 2.0, r), (tr / 2.0, -r)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtiMatrix {
    pub a: Mat2,
    pub eigenvalues: [(f64, f64); 2],
}

/// The leader's closed-loop matrix; Hurwitz for every `k > 0`.
pub fn lti_matrix(params: &GeneratorParams) -> Result<LtiMatrix> {
    if !(params.k > 0.0) {
        return Err(Error::param("k", "must be > 0"));
    }
    let a = system_matrix(params.k, params.d1_0);
    let eigenvalues = eigenvalues(&a);
    debug_assert!(eigenvalues.iter().all(|e| e.0 < 0.0));
    Ok(LtiMatrix { a, eigenvalues })
}

/// Ultimate bound on `|(omega1 - omega0, delta1 - delta0)|`.
pub fn regulation_bound(params: &GeneratorParams, delta_ell_dot: f64) -> Result<f64> {
    let dc = decay_constants(params)?;
    Ok(dc.c * delta_ell_dot / (dc.lambda * params.k))
}

/// Ultimate bound on the synchronization error `|omega2 - omega3|`.
pub fn sync_error_bound(params: &GeneratorParams, d_sup: f64, delta_theta: f64, delta_theta_dot: f64) -> f64 {
    let p = params;
    (p.k * d_sup + (p.c1 + p.c2 + p.d1_0) * delta_theta_dot + (p.k + p.k1 + 2.0 * p.x1) * delta_theta) / p.d1_0
}

pub const THETA_SAFETY: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaBounds {
    pub delta_theta: f64,
    pub delta_theta_dot: f64,
    pub raw_theta: f64,
    pub raw_theta_dot: f64,
    pub safety: f64,
}

pub fn estimate_theta_bounds(params: &GeneratorParams, profile: &LoadProfile, horizon: f64) -> Result<ThetaBounds> {
    estimate_theta_bounds_with(params, profile, horizon, 1e-3, THETA_SAFETY)
}

/// Sup norms of the leader–bus angle deviation and rate over a leader-only
/// run starting from the steady angle, inflated by `safety`.
pub fn estimate_theta_bounds_with(
    params: &GeneratorParams,
    profile: &LoadProfile,
    horizon: f64,
    dt: f64,
    safety: f64,
) -> Result<ThetaBounds> {
    if !(dt > 0.0 && horizon >= 0.0) {
        return Err(Error::param("dt", "need dt > 0 and horizon >= 0"));
    }
    let rate = |t: f64, s: f64| -> Result<f64> {
        let st = PreSyncState { theta13: s, ..Default::default() };
        let (ell, _) = load_at(profile, t);
        Ok(crate::model::presync_rhs(&st, 0.0, 0.0, ell, params)?.0.theta13)
    };
    let steps = (horizon / dt).round() as usize;
    let mut x = [params.theta13_bar];
    let (mut sup_th, mut sup_rate) = (0.0f64, rate(0.0, x[0])?.abs());
    for n in 0..steps {
        let t = n as f64 * dt;
        x = rk4_step(|t, x: &[f64; 1]| Ok([rate(t, x[0])?]), t, &x, dt)?;
        let t1 = (n + 1) as f64 * dt;
        sup_th = sup_th.max((x[0] - params.theta13_bar).abs());
        sup_rate = sup_rate.max(rate(t1, x[0])?.abs());
        if !x[0].is_finite() {
            return Err(Error::NonFiniteState { t: t1, mode: "leader-only", detail: "theta13".into() });
        }
    }
    Ok(ThetaBounds {
        delta_theta: safety * sup_th,
        delta_theta_dot: safety * sup_rate,
        raw_theta: sup_th,
        raw_theta_dot: sup_rate,
        safety,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub lambda: f64,
    pub c: f64,
    pub regulation_bound: f64,
    pub sync_error_bound: f64,
    pub slope_in_d: f64,
    pub delta_theta: f64,
    pub delta_theta_dot: f64,
    pub d_sup: f64,
    pub delta_ell_dot: f64,
}

impl BoundsReport {
    pub fn from_parts(params: &GeneratorParams, delta_ell_dot: f64, d_sup: f64, theta: &ThetaBounds) -> Result<Self> {
        let dc = decay_constants(params)?;
        Ok(BoundsReport {
            lambda: dc.lambda,
            c: dc.c,
            regulation_bound: regulation_bound(params, delta_ell_dot)?,
            sync_error_bound: sync_error_bound(params, d_sup, theta.delta_theta, theta.delta_theta_dot),
            slope_in_d: params.k / params.d1_0,
            delta_theta: theta.delta_theta,
            delta_theta_dot: theta.delta_theta_dot,
            d_sup,
            delta_ell_dot,
        })
    }

    pub const FIELD_NAMES: [&'static str; 9] = [
        "lambda",
        "c",
        "regulation_bound",
        "sync_error_bound",
        "slope_in_d",
        "delta_theta",
        "delta_theta_dot",
        "d_sup",
        "delta_ell_dot",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.lambda,
            self.c,
            self.regulation_bound,
            self.sync_error_bound,
            self.slope_in_d,
            self.delta_theta,
            self.delta_theta_dot,
            self.d_sup,
            self.delta_ell_dot,
        ]
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        Self::FIELD_NAMES.iter().zip(self.values()).map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn csv_header() -> String {
        Self::FIELD_NAMES.join(",")
    }

    pub fn csv_row(&self) -> String {
        self.values().map(|v| v.to_string()).join(",")
    }
}

/// Full report for a parameter set, load profile and disturbance size.
pub fn bounds_report(params: &GeneratorParams, profile: &LoadProfile, d_sup: f64, horizon: f64) -> Result<BoundsReport> {
    decay_constants(params)?;
    let theta = estimate_theta_bounds(params, profile, horizon)?;
    BoundsReport::from_parts(params, profile.delta_ell_dot, d_sup, &theta)
}

/// Result of searching Lyapunov matrices for a smaller overshoot constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvershootSearch {
    pub lambda: f64,
    pub c: f64,
    pub p: Mat2,
}

fn sym_eigs(p: &Mat2) -> (f64, f64) {
    let tr = p[0][0] + p[1][1];
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    let r = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 - r, tr / 2.0 + r)
}

/// Is `P A + A^T P + 2 lambda P` negative semidefinite (with a little slack)?
fn certifies(p: &Mat2, a: &Mat2, lambda: f64) -> bool {
    let pa = mat_mul(p, a);
    let s: Mat2 = std::array::from_fn(|i| std::array::from_fn(|j| pa[i][j] + pa[j][i] + 2.0 * lambda * p[i][j]));
    let (_, hi) = sym_eigs(&s);
    let scale = s.iter().flatten().fold(1e-300f64, |m, v| m.max(v.abs()));
    hi <= 1e-9 * scale.max(p[1][1])
}

/// Search over `P = [[1, p], [p, q]]` certifying decay rate `lambda` for the
/// one with the smallest `sqrt(cond P)`. At `lambda = D/2` the certificate
/// is unique and this reproduces [`decay_constants`].
pub fn refine_overshoot(params: &GeneratorParams, lambda: f64) -> Result<OvershootSearch> {
    let (k, d) = (params.k, params.d1_0);
    if !(lambda > 0.0 && lambda <= d / 2.0) {
        return Err(Error::param("lambda", format!("must lie in (0, {}]", d / 2.0)));
    }
    decay_constants(params)?;
    let a = system_matrix(k, d);
    let cost = |p: f64, q: f64| -> Option<f64> {
        let m = [[1.0, p], [p, q]];
        if q <= p * p || !certifies(&m, &a, lambda) {
            return None;
        }
        let (lo, hi) = sym_eigs(&m);
        Some((hi / lo).sqrt())
    };
    let closed = lyapunov_matrix(k, d);
    let mut best = (closed[0][1], closed[1][1]);
    let mut best_c = cost(best.0, best.1).unwrap_or(f64::INFINITY);
    // Coarse grid: p in (0, D - lambda], q in (p^2, p k / lambda].
    let n = 200;
    let p_hi = d - lambda;
    for i in 1..=n {
        let p = p_hi * i as f64 / n as f64;
        let q_lo = p * p;
        let q_hi = p * k / lambda;
        for j in 1..=n {
            let q = q_lo + (q_hi - q_lo) * j as f64 / n as f64;
            if let Some(c) = cost(p, q) {
                if c < best_c {
                    best_c = c;
                    best = (p, q);
                }
            }
        }
    }
    // Pattern search polish.
    let (mut hp, mut hq) = (p_hi / n as f64, best.1.max(1e-12) / 10.0);
    while hp > 1e-14 || hq > 1e-14 * best.1 {
        let mut moved = false;
        for (dp, dq) in [(hp, 0.0), (-hp, 0.0), (0.0, hq), (0.0, -hq)] {
            if let Some(c) = cost(best.0 + dp, best.1 + dq) {
                if c < best_c {
                    best_c = c;
                    best = (best.0 + dp, best.1 + dq);
                    moved = true;
                }
            }
        }
        if !moved {
            hp /= 2.0;
            hq /= 2.0;
        }
    }
    if !best_c.is_finite() {
        return Err(Error::param("lambda", "no certificate found"));
    }
    Ok(OvershootSearch { lambda, c: best_c, p: [[1.0, best.0], [best.0, best.1]] })
}

/// `sup_t |e^{At}| e^{lambda t}` sampled on `[0, t_max]`, a lower bound on any
/// certified overshoot constant for decay rate `lambda`.
pub fn sampled_overshoot(params: &GeneratorParams, lambda: f64, t_max: f64, samples: usize) -> f64 {
    let a = nalgebra::Matrix2::new(-params.d1_0, -params.k, 1.0, 0.0);
    (0..=samples)
        .map(|i| {
            let t = t_max * i as f64 / samples as f64;
            let e = (a * t).exp();
            e.svd(false, false).singular_values.max() * (lambda * t).exp()
        })
        .fold(0.0, f64::max)
}
