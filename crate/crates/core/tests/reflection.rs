mod common;

use common::*;
use refraction_core::{presets, CostFunction, LevyModel, ReflectionProblem};

fn y_model() -> LevyModel<f64> {
    presets::phase_type_reference(0.5).unwrap()
}

fn problem(alpha: f64, shift: f64, bt: f64) -> ReflectionProblem<f64> {
    ReflectionProblem::new(y_model(), 0.05, bt, CostFunction::quadratic(alpha, shift).unwrap()).unwrap()
}

#[test]
fn closed_form_threshold() {
    let vphi = root_by_bisection(&y_model(), 0.05);
    for (alpha, shift, bt) in [(1.0, 0.0, 5.0), (2.0, 1.0, -3.0), (0.5, -2.0, 0.0)] {
        let p = problem(alpha, shift, bt);
        let b = p.b_star_inf().unwrap();
        let want = shift - 1.0 / vphi - bt * 0.05 / (2.0 * alpha);
        assert!((b - want).abs() < 1e-8, "{b} vs {want}");
        assert!(p.i_inf(b).unwrap().abs() < 1e-9);
        assert!(p.i_inf(b - 1.0).unwrap() < p.i_inf(b + 1.0).unwrap());
    }
}

#[test]
fn value_below_threshold_reduces() {
    let p = problem(1.0, 0.0, 5.0);
    let b = p.b_star_inf().unwrap();
    let vphi = p.varphi();
    let mean_y = y_model().mean_drift().unwrap();
    let tail = simpson(|y| (-vphi * y).exp() * (y + b) * (y + b), 0.0, 4000.0, 400_000);
    for x in [b - 2.0, b - 0.5, b] {
        let want = -5.0 * (x - b + mean_y / 0.05) + vphi / 0.05 * tail + 5.0 / vphi;
        let v = p.v_tilde_inf(x).unwrap();
        assert!((v - want).abs() < 1e-6 * (1.0 + want.abs()), "{v} vs {want}");
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let p = problem(1.0, 0.0, 5.0);
    let b = p.b_star_inf().unwrap();
    for x in [b - 1.0, b + 0.5, b + 2.0] {
        let h = 1e-4;
        let fd = (p.v_tilde_inf(x + h).unwrap() - p.v_tilde_inf(x - h).unwrap()) / (2.0 * h);
        let d = p.v_tilde_inf_derivative(x).unwrap();
        assert!((fd - d).abs() < 1e-5 * d.abs().max(1.0), "{fd} vs {d}");
    }
    // Below the threshold the slope is −β̃.
    assert!((p.v_tilde_inf_derivative(b - 1.0).unwrap() + 5.0).abs() < 1e-12);
}

#[test]
fn reflection_value_is_lower_than_refraction() {
    let p = problem(1.0, 0.0, 5.0);
    let b = p.b_star_inf().unwrap();
    let xs: Vec<f64> = (0..13).map(|k| b - 3.0 + 0.5 * k as f64).collect();
    let t = p.convergence_sweep(&[100.0], &xs).unwrap();
    for (i, &x) in xs.iter().enumerate() {
        assert!(t.v_tilde_inf[i] <= t.rows[0].v_tilde[i] + 1e-9, "x={x}");
    }
}

#[test]
fn threshold_converges_for_large_delta() {
    let p = problem(1.0, 0.0, 5.0);
    let b = p.b_star_inf().unwrap();
    for delta in [1e3, 1e4] {
        let bd = match p.refraction_problem(delta).unwrap().solve().unwrap().b_star {
            refraction_core::BStar::Finite(v) => v,
            other => panic!("{other:?}"),
        };
        assert!((bd - b).abs() <= 1e-2, "δ={delta}: {bd} vs {b}");
    }
}

#[test]
fn sweep_monotone_in_delta() {
    let p = problem(1.0, 0.0, 5.0);
    let b = p.b_star_inf().unwrap();
    let xs: Vec<f64> = (0..=12).map(|k| b - 3.0 + 0.5 * k as f64).collect();
    let t = p.convergence_sweep(&refraction_core::default_delta_grid(), &xs).unwrap();
    for w in t.rows.windows(2) {
        for i in 0..xs.len() {
            assert!(w[0].v_tilde[i] >= w[1].v_tilde[i] - 1e-9);
        }
        assert!((w[1].delta_phi_q - 0.05).abs() <= (w[0].delta_phi_q - 0.05).abs());
    }
    let last = t.rows.last().unwrap();
    for i in 0..xs.len() {
        assert!((last.v_tilde[i] - t.v_tilde_inf[i]).abs() <= 1e-1 * (1.0 + t.v_tilde_inf[i].abs()));
    }
}

#[test]
fn translation_equivariance() {
    let b0 = problem(1.0, 0.0, 2.0).b_star_inf().unwrap();
    let b1 = problem(1.0, 1.25, 2.0).b_star_inf().unwrap();
    assert!((b1 - b0 - 1.25).abs() < 1e-9);
}

#[test]
fn assumption_violations_rejected() {
    // h' + β̃q ≡ 0 never changes sign.
    let c = CostFunction::linear(-5.0 * 0.05, 0.0).unwrap();
    assert!(ReflectionProblem::new(y_model(), 0.05, 5.0, c).is_err());
    let c = CostFunction::linear(1.0, 0.0).unwrap();
    assert!(ReflectionProblem::new(y_model(), 0.05, 5.0, c).is_err());
}
