use proptest::prelude::*;

use gensync_core::ode::{integrate, lerp_state, rk4_step};

#[test]
fn exact_for_time_only_quadratics() {
    // With a time-only right-hand side one step is Simpson's rule.
    let f = |t: f64, _: &[f64; 1]| Ok([3.0 * t * t]);
    let x = rk4_step(f, 0.5, &[1.0], 0.25).unwrap();
    assert!((x[0] - (1.0 + 0.75f64.powi(3) - 0.5f64.powi(3))).abs() < 1e-15);
}

#[test]
fn observer_sees_every_step() {
    let mut ts = Vec::new();
    let x = integrate(|_, x: &[f64; 1]| Ok([-x[0]]), 2.0, [1.0], 0.1, 10, |t, _| ts.push(t)).unwrap();
    assert_eq!(ts.len(), 11);
    assert!((ts[10] - 3.0).abs() < 1e-12);
    assert!((x[0] - (-1.0f64).exp()).abs() < 1e-6);
}

#[test]
fn fourth_order_on_harmonic_oscillator() {
    let err = |dt: f64| {
        let steps = (10.0 / dt).round() as usize;
        let x = integrate(|_, x: &[f64; 2]| Ok([x[1], -x[0]]), 0.0, [1.0, 0.0], dt, steps, |_, _| {}).unwrap();
        ((x[0] - 10f64.cos()).powi(2) + (x[1] + 10f64.sin()).powi(2)).sqrt()
    };
    let order = (err(0.1) / err(0.05)).log2();
    assert!((order - 4.0).abs() < 0.2, "order {order}");
}

#[test]
fn rhs_errors_propagate() {
    let r = rk4_step(
        |_, _: &[f64; 1]| Err(gensync_core::Error::EmptyDomain),
        0.0,
        &[0.0],
        0.1,
    );
    assert!(r.is_err());
}

proptest! {
    #[test]
    fn lerp_endpoints(a in prop::array::uniform3(-1e3f64..1e3), b in prop::array::uniform3(-1e3f64..1e3)) {
        prop_assert_eq!(lerp_state(&a, &b, 0.0), a);
        let end = lerp_state(&a, &b, 1.0);
        for i in 0..3 {
            prop_assert!((end[i] - b[i]).abs() <= 1e-12 * b[i].abs().max(1.0));
        }
    }
}
