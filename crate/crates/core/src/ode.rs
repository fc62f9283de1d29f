//! Classical fixed-step Runge–Kutta integration over fixed-size states.

use crate::Result;

fn axpy<const N: usize>(x: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// One RK4 step. The right-hand side is evaluated at the stage times, so
/// time-dependent inputs see `t`, `t + dt/2` and `t + dt`.
pub fn rk4_step<const N: usize, F>(mut f: F, t: f64, x: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let h2 = 0.5 * dt;
    let k1 = f(t, x)?;
    let k2 = f(t + h2, &axpy(x, h2, &k1))?;
    let k3 = f(t + h2, &axpy(x, h2, &k2))?;
    let k4 = f(t + dt, &axpy(x, dt, &k3))?;
    Ok(std::array::from_fn(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Integrate from `t0` over `steps` steps of size `dt`, calling `observe`
/// after every step (including the initial point).
pub fn integrate<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    x0: [f64; N],
    dt: f64,
    steps: usize,
    mut observe: O,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(f64, &[f64; N]),
{
    let mut x = x0;
    observe(t0, &x);
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        x = rk4_step(&mut f, t, &x, dt)?;
        observe(t0 + (n + 1) as f64 * dt, &x);
    }
    Ok(x)
}

pub fn lerp_state<const N: usize>(a: &[f64; N], b: &[f64; N], f: f64) -> [f64; N] {
    std::array::from_fn(|i| a[i] + f * (b[i] - a[i]))
}
