mod common;

use common::*;
use refraction_core::{presets, Error, LevyModel, Variation};

#[test]
fn psi_values() {
    let a = model_a();
    assert!((a.psi(1.0).unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(a.psi(0.0).unwrap(), 0.0);
    assert_eq!(random_ph_model(3).psi(0.0).unwrap(), 0.0);
    assert!((exp_jump_model().psi(1.0).unwrap() - 1.5).abs() < 1e-14);
}

#[test]
fn psi_prime_values() {
    let a = model_a();
    assert!((a.psi_prime(0.0).unwrap() - 1.0).abs() < 1e-14);
    assert!((a.psi_prime(1.0).unwrap() - 3.0).abs() < 1e-14);
    assert!((exp_jump_model().psi_prime(0.0).unwrap() - 1.0).abs() < 1e-13);
}

#[test]
fn psi_prime_matches_finite_differences() {
    for seed in 0..5 {
        let m = random_ph_model(seed);
        for k in 0..20 {
            let t = 0.25 * k as f64;
            let h = 1e-6;
            let fd = (m.psi(t + h).unwrap() - m.psi(t - h).unwrap()) / (2.0 * h);
            let d = m.psi_prime(t).unwrap();
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "seed {seed} θ={t}: {fd} vs {d}");
        }
    }
}

#[test]
fn roots_of_psi() {
    let a = model_a();
    assert!((a.root_of_psi(2.0).unwrap() - 1.0).abs() < 1e-13);
    // θ² + 0.5θ − 2 = 0
    let y = a.with_drift(0.5).unwrap();
    let exact = (-0.5 + (0.25f64 + 8.0).sqrt()) / 2.0;
    assert!((y.root_of_psi(2.0).unwrap() - exact).abs() < 1e-12);
    assert!((exact - 1.186140661).abs() < 1e-9);
    // 2θ² + 0.5θ − 0.5 = 0
    let e = exp_jump_model();
    let exact = (-0.5 + (0.25f64 + 4.0).sqrt()) / 4.0;
    let r = e.root_of_psi(0.5).unwrap();
    assert!((r - exact).abs() < 1e-12 && (r - 0.39039).abs() < 1e-5);
    assert!((e.psi(r).unwrap() - 0.5).abs() <= 1e-12);
}

#[test]
fn root_matches_bisection_on_random_models() {
    for seed in 0..10 {
        let m = random_ph_model(seed);
        for q in [0.05, 0.5, 3.0] {
            let r = m.root_of_psi(q).unwrap();
            assert!((r - root_by_bisection(&m, q)).abs() < 1e-10);
            assert!((m.psi(r).unwrap() - q).abs() <= 1e-12 * q.max(1.0) * 10.0);
            let y = m.with_drift(m.gamma_tilde() - 0.7).unwrap();
            assert!(r < y.root_of_psi(q).unwrap());
        }
    }
}

#[test]
fn root_rejects_bad_rate() {
    assert!(matches!(model_a().root_of_psi(0.0), Err(Error::InvalidParameter { .. })));
    assert!(model_a().root_of_psi(-1.0).is_err());
}

#[test]
fn rational_forms() {
    let a = model_a().as_rational(2.0).unwrap();
    for (c, want) in a.numerator.coeffs().iter().zip([-2.0, 1.0, 1.0]) {
        assert!((c - want).abs() < 1e-14);
    }
    assert_eq!(a.numerator.degree(), 2);
    assert_eq!(a.denominator.coeffs(), &[1.0]);
    let e = exp_jump_model().as_rational(0.5).unwrap();
    let num = e.numerator.coeffs();
    for (c, want) in num.iter().zip([-0.5, 0.5, 2.0]) {
        assert!((c - want).abs() < 1e-13, "{num:?}");
    }
    assert_eq!(e.denominator.coeffs(), &[1.0, 1.0]);
    assert_eq!(e.numerator.degree(), e.denominator.degree() + 1);
}

#[test]
fn rational_form_matches_psi_at_random_points() {
    use rand::{Rng, SeedableRng};
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for seed in 0..5 {
        let m = random_ph_model(seed);
        let rat = m.as_rational(0.3).unwrap();
        assert_eq!(rat.numerator.degree(), rat.denominator.degree() + 2);
        for _ in 0..10 {
            let t = r.random_range(0.0..5.0);
            let direct = m.psi(t).unwrap() - 0.3;
            assert!((rat.eval(t) - direct).abs() <= 1e-10 * direct.abs().max(1.0));
        }
    }
}

#[test]
fn degree_cap() {
    let m = presets::phase_type_reference(5.5).unwrap();
    assert!(matches!(m.as_rational_with_cap(0.05, 4), Err(Error::DegreeCap { .. })));
    assert!(m.as_rational(0.05).is_ok());
}

#[test]
fn variation_classes() {
    assert_eq!(presets::phase_type_reference(5.5).unwrap().variation(), Variation::UnboundedVariation);
    assert_eq!(exp_jump_model().variation(), Variation::BoundedVariation);
    assert_eq!(LevyModel::brownian(1.0, 0.0).unwrap().variation(), Variation::BoundedVariation);
}

#[test]
fn invalid_models_rejected() {
    assert!(LevyModel::brownian(-1.0, 0.0).is_err());
    assert!(LevyModel::<f64>::new(1.0, -0.1, 0.0, None).is_err());
    assert!(LevyModel::<f64>::new(1.0, 0.1, 1.0, None).is_err());
    assert!(refraction_core::PhaseTypeLaw::new(vec![0.5, 0.4], &[vec![-1.0, 0.0], vec![0.0, -1.0]]).is_err());
    assert!(refraction_core::PhaseTypeLaw::new(vec![1.0], &[vec![1.0]]).is_err());
}

#[test]
fn mean_infimum_matches_wiener_hopf() {
    for seed in 0..5 {
        let m = random_ph_model(seed);
        let s = refraction_core::ScaleSet::new(&m, &m.with_drift(m.gamma_tilde() - 0.5).unwrap(), 0.4).unwrap();
        let oracle = mean_infimum_wh(&m, 0.4);
        assert!((s.mean_running_infimum() - oracle).abs() < 1e-7, "{} vs {oracle}", s.mean_running_infimum());
        let via_theta = s.theta_first_moment() * s.q / s.phi_q;
        assert!((s.mean_running_infimum() - via_theta).abs() < 1e-9);
    }
}
