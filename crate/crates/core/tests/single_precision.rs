use refraction_core::{BStar, CostFunction32, LevyModel32, RefractionProblem32, ScaleSet32};

#[test]
fn f32_pipeline_runs() {
    let m = LevyModel32::brownian(1.0, 2f32.sqrt()).unwrap();
    let s = ScaleSet32::new(&m, &m.with_drift(0.5).unwrap(), 2.0).unwrap();
    let exact = (1f32.exp() - (-2f32).exp()) / 3.0;
    assert!((s.w.eval(1.0, 0) - exact).abs() < 1e-5);
    let p = RefractionProblem32::new(m, 0.5, 2.0, 0.1, CostFunction32::quadratic(1.0, 0.0).unwrap()).unwrap();
    match p.solve().unwrap().b_star {
        BStar::Finite(b) => assert!((b + 0.243_070_33).abs() < 1e-4, "{b}"),
        other => panic!("{other:?}"),
    }
}
