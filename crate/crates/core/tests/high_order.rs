use proptest::prelude::*;

use gensync_core::high_order::{
    equilibrium_for_load, ho_rhs_with_setting, manifold_currents, ratio_tests, ratio_tests_at, reduce_to_damped,
    round_trip, stator_currents, terminal_power, trajectory_agreement, AgreementSetup, BusVoltage, Composites,
    HighOrderParams, SlowContext, PINNED_C1, PINNED_C2, PINNED_D1_0, PINNED_K1, PINNED_X1,
};
use gensync_core::Error;

fn default_set() -> HighOrderParams {
    HighOrderParams::default_set()
}

#[test]
fn reduction_reproduces_the_reference_constants() {
    let g = reduce_to_damped(&default_set()).unwrap();
    for (got, want) in [(g.k1, PINNED_K1), (g.x1, PINNED_X1), (g.d1_0, PINNED_D1_0), (g.c1, PINNED_C1), (g.c2, PINNED_C2)] {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!(round_trip(&default_set()).unwrap().max_error() < 1e-6);
}

#[test]
fn residuals_scale_with_their_time_constants() {
    for t in ratio_tests(&default_set()).unwrap() {
        assert!(t.pass, "{} ratio {} expected {}", t.name, t.ratio, t.expected);
    }
}

/// The damper contributions enter the currents through the voltage rates
/// only; the coefficients of those rates are the damping constants.
#[test]
fn damping_constants_are_current_sensitivities() {
    let p = default_set();
    let c = Composites::new(&p).unwrap();
    let h = 1e-5;
    let at = |s: f64, s_dot: f64| {
        let ctx = SlowContext { v3: 1.0, s, s_dot, s_ddot: 0.0, omega1: p.omega0, omega1_dot: 0.0 };
        manifold_currents(&ctx, &p, &c)
    };
    // s = 0: V_d' = s', V_q' = 0.
    let di_q = (at(0.0, h).0 - at(0.0, -h).0) / (2.0 * h);
    // s = pi/2: V_q' = -s', V_d' = 0.
    let s = std::f64::consts::FRAC_PI_2;
    let di_d_dvq = -(at(s, h).1 - at(s, -h).1) / (2.0 * h);
    assert!((di_q - c.c1).abs() < 1e-6 * c.c1, "{di_q} vs {}", c.c1);
    assert!((di_d_dvq + c.c2).abs() < 1e-6 * c.c2, "{di_d_dvq} vs {}", -c.c2);
}

#[test]
fn operating_point_is_an_equilibrium() {
    let p = default_set();
    let bus = BusVoltage::nominal(0.0);
    let (x, u) = equilibrium_for_load(&p, &bus, 0.5).unwrap();
    let (d, cur) = ho_rhs_with_setting(&x, &bus, u, &p).unwrap();
    assert!(d.to_array().iter().all(|v| v.abs() < 1e-9));
    let pe = terminal_power(&x, &stator_currents(&x, &p).unwrap(), &bus);
    // The reduction is accurate to the order of the neglected terms.
    assert!((pe - 0.5).abs() < 5e-3, "{pe}");
    assert_eq!(cur, stator_currents(&x, &p).unwrap());
}

#[test]
fn speed_follows_the_reduced_model() {
    let a = trajectory_agreement(&default_set(), &AgreementSetup { horizon: 10.0, ..Default::default() }).unwrap();
    assert!(a.pass);
    assert!(a.max_speed_difference < 0.05, "{}", a.max_speed_difference);
}

#[test]
fn reactance_ordering_is_enforced() {
    let mut p = default_set();
    p.xq_pp = p.xq_p + 0.1;
    assert!(matches!(p.validate(), Err(Error::InvalidParam { ref field, .. }) if field == "xq_pp"));
    let mut p = default_set();
    p.xk = p.xd_p;
    assert!(matches!(p.validate(), Err(Error::InvalidParam { .. })));
    let mut p = default_set();
    p.tau_a2 *= 2.0;
    assert!(p.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ratio_tests_hold_at_random_contexts(
        s in 0.2f64..1.2, s_dot in -1.0f64..1.0, s_ddot in -1.0f64..1.0, dw in -1.0f64..1.0, w_dot in -0.5f64..0.5,
    ) {
        let p = default_set();
        let ctx = SlowContext { v3: 1.0, s, s_dot, s_ddot, omega1: p.omega0 + dw, omega1_dot: w_dot };
        for t in ratio_tests_at(&p, &ctx).unwrap() {
            // Residuals that vanish identically at this point carry no ratio.
            prop_assert!(t.pass || t.residual.abs() < 1e-12, "{} ratio {}", t.name, t.ratio);
        }
    }
}
