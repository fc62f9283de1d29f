use approx::assert_relative_eq;
use nalgebra::{Matrix2, SymmetricEigen};
use proptest::prelude::*;

use gensync_core::analysis::{
    decay_constants, eigenvalues, lyapunov_matrix, lyapunov_residual, overshoot_constant, refine_overshoot,
    regulation_bound, sampled_overshoot, sync_error_bound, system_matrix,
};
use gensync_core::model::GeneratorParams;
use gensync_core::Error;

fn cond_sqrt(p: [[f64; 2]; 2]) -> f64 {
    let m = Matrix2::new(p[0][0], p[0][1], p[1][0], p[1][1]);
    let e = SymmetricEigen::new(m).eigenvalues;
    (e.max() / e.min()).sqrt()
}

fn spectral_norm(m: Matrix2<f64>) -> f64 {
    m.svd(false, false).singular_values.max()
}

#[test]
fn reference_decay_constants() {
    let dc = decay_constants(&GeneratorParams::reference()).unwrap();
    assert_relative_eq!(dc.c, 10.3796, epsilon = 1e-3);
    assert_relative_eq!(dc.lambda, 0.02655, epsilon = 1e-12);
}

#[test]
fn reference_regulation_bound() {
    let p = GeneratorParams::reference();
    let c = cond_sqrt(lyapunov_matrix(p.k, p.d1_0));
    let expected = c * 0.01 / (p.d1_0 / 2.0 * p.k);
    assert_relative_eq!(regulation_bound(&p, 0.01).unwrap(), expected, max_relative = 1e-12);
}

#[test]
fn weak_gain_is_rejected() {
    assert!(matches!(overshoot_constant(0.0005, 0.0531), Err(Error::GainTooSmall { .. })));
    let mut p = GeneratorParams::reference();
    p.k = 1e-4;
    assert!(matches!(decay_constants(&p), Err(Error::GainTooSmall { .. })));
}

#[test]
fn refinement_at_half_damping_is_the_closed_form() {
    let p = GeneratorParams::reference();
    let r = refine_overshoot(&p, p.d1_0 / 2.0).unwrap();
    assert_relative_eq!(r.c, decay_constants(&p).unwrap().c, max_relative = 1e-6);
    // No certificate can beat the true transient peak.
    assert!(sampled_overshoot(&p, p.d1_0 / 2.0, 400.0, 4000) <= r.c * (1.0 + 1e-9));
}

proptest! {
    #[test]
    fn overshoot_is_root_condition_number(k in 1e-3f64..2.0, d in 1e-3f64..1.0) {
        prop_assume!(k > d * d / 4.0 * 1.01);
        let c = overshoot_constant(k, d).unwrap();
        prop_assert!((c - cond_sqrt(lyapunov_matrix(k, d))).abs() <= 1e-8 * c);
    }

    #[test]
    fn lyapunov_identity_holds(k in 1e-4f64..10.0, d in 1e-4f64..3.0) {
        prop_assert!(lyapunov_residual(k, d) < 1e-12);
    }

    #[test]
    fn certified_decay_envelope(k in 1e-3f64..0.5, d in 0.01f64..0.5, t in 0.0f64..200.0) {
        prop_assume!(k > d * d / 4.0 * 1.01);
        let c = overshoot_constant(k, d).unwrap();
        let a = system_matrix(k, d);
        let m = Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]);
        let norm = spectral_norm((m * t).exp());
        prop_assert!(norm <= c * (-d / 2.0 * t).exp() * (1.0 + 1e-9));
    }

    #[test]
    fn eigenvalues_match_nalgebra(k in 1e-4f64..2.0, d in 1e-4f64..2.0) {
        let a = system_matrix(k, d);
        let ours = eigenvalues(&a);
        let theirs = Matrix2::new(a[0][0], a[0][1], a[1][0], a[1][1]).complex_eigenvalues();
        for (re, im) in ours {
            prop_assert!(re < 0.0);
            let hit = theirs.iter().any(|z| (z.re - re).abs() < 1e-9 && (z.im - im).abs() < 1e-9);
            prop_assert!(hit, "{re} {im} not in {theirs:?}");
        }
    }

    #[test]
    fn sync_bound_is_affine_in_offset(d1 in 0.0f64..1.5, d2 in 0.0f64..1.5, th in 0.0f64..0.1, thd in 0.0f64..0.1) {
        prop_assume!((d1 - d2).abs() > 1e-3);
        let p = GeneratorParams::reference();
        let slope = (sync_error_bound(&p, d2, th, thd) - sync_error_bound(&p, d1, th, thd)) / (d2 - d1);
        prop_assert!((slope - p.k / p.d1_0).abs() <= 1e-9 * slope);
    }
}
