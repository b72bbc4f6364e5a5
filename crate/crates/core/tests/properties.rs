mod common;

use common::*;
use proptest::prelude::*;
use refraction_core::{build_scale, CostFunction, Extended, Growth, RefractionProblem, ScaleSet};

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn psi_strictly_convex(seed in 0u64..500, a in 0.0f64..5.0, t in 0.05f64..0.95, w in 0.05f64..3.0) {
        let m = random_ph_model(seed);
        let c = (a + w).min(5.0);
        prop_assume!(c - a > 1e-3);
        let b = a + t * (c - a);
        let chord = (1.0 - t) * m.psi(a).unwrap() + t * m.psi(c).unwrap();
        prop_assert!(m.psi(b).unwrap() < chord);
    }

    #[test]
    fn refracted_root_exceeds_free_root(seed in 0u64..500, delta in 0.01f64..5.0, q in 0.01f64..3.0) {
        let m = random_ph_model(seed);
        let y = m.with_drift(m.gamma_tilde() - delta).unwrap();
        prop_assert!(m.root_of_psi(q).unwrap() < y.root_of_psi(q).unwrap());
    }

    #[test]
    fn threshold_function_nondecreasing(seed in 0u64..200, b1 in -5.0f64..5.0, gap in 0.0f64..4.0, beta in -3.0f64..3.0) {
        let m = random_ph_model(seed);
        let p = RefractionProblem::new(m, 0.7, 0.3, beta, CostFunction::quadratic(1.0, 0.0).unwrap()).unwrap();
        prop_assert!(p.i_of_b(b1).unwrap() <= p.i_of_b(b1 + gap).unwrap() + 1e-10);
    }

    #[test]
    fn theta_positive_and_scale_ordered(seed in 0u64..200, x in 0.01f64..6.0, dx in 0.01f64..2.0) {
        let m = random_ph_model(seed);
        let s = ScaleSet::new(&m, &m.with_drift(m.gamma_tilde() - 0.5).unwrap(), 0.2).unwrap();
        prop_assert!(s.theta_kernel(x).unwrap() > 0.0);
        let w = &s.w;
        prop_assert!(w.eval(x + dx, 1) / w.eval(x + dx, 0) <= w.eval(x, 1) / w.eval(x, 0) + 1e-12);
        let v = w.eval(x, 0);
        prop_assert!(w.imaginary_residue(x) <= 1e-9 * (1.0 + v.abs()));
    }

    #[test]
    fn resolvent_mass_is_reciprocal_rate(seed in 0u64..200, x in -4.0f64..4.0, b in -4.0f64..4.0) {
        let m = random_ph_model(seed);
        let p = RefractionProblem::new(m, 0.9, 0.25, 0.0, CostFunction::quadratic(1.0, 0.0).unwrap()).unwrap();
        prop_assert!((p.resolvent(Extended::Finite(b), x).mass().unwrap() - 4.0).abs() < 1e-7);
    }

    #[test]
    fn generic_quadrature_agrees_with_closed_form(seed in 0u64..100, b in -3.0f64..3.0, x in -3.0f64..3.0) {
        let m = random_ph_model(seed);
        let p = RefractionProblem::new(m, 0.8, 0.3, 0.5, CostFunction::linear(0.7, 0.2).unwrap()).unwrap();
        let g = p.with_cost(CostFunction::generic(|y: f64| 0.7 * y + 0.2, |_| 0.7, Growth { degree: 1, k1: 1.0, k2: 1.0 }).unwrap());
        let (a, c) = (p.value_v_b(Extended::Finite(b), x).unwrap(), g.value_v_b(Extended::Finite(b), x).unwrap());
        prop_assert!((a - c).abs() < 1e-8 * (1.0 + a.abs()));
    }

    #[test]
    fn scale_vanishes_below_zero(seed in 0u64..100, x in -10.0f64..-1e-9) {
        let w = build_scale(&random_ph_model(seed), 0.4).unwrap();
        prop_assert_eq!(w.eval(x, 0), 0.0);
        prop_assert_eq!(w.eval(x, 1), 0.0);
    }
}
