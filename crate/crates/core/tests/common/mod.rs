#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refraction_core::{LevyModel, PhaseTypeLaw};

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Plain bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest root of `ψ = q` by bisection on `[0, 1e3]`.
pub fn root_by_bisection(model: &LevyModel<f64>, q: f64) -> f64 {
    let mut hi = 1.0;
    while model.psi(hi).unwrap() < q {
        hi *= 2.0;
    }
    bisect(|t| model.psi(t).unwrap() - q, 1e-12, hi)
}

/// `E[−X̲_{e_q}]` from a central difference of the Wiener–Hopf factor
/// `E[e^{θX̲}] = (q/Φ)(Φ − θ)/(q − ψ(θ))` at `θ = 0`.
pub fn mean_infimum_wh(model: &LevyModel<f64>, q: f64) -> f64 {
    let phi = root_by_bisection(model, q);
    let factor = |t: f64| (q / phi) * (phi - t) / (q - model.psi(t).unwrap());
    let h = 1e-5;
    -(factor(h) - factor(-h)) / (2.0 * h)
}

/// Random Coxian model with Brownian part.
pub fn random_ph_model(seed: u64) -> LevyModel<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let m = r.random_range(2..=4);
    let rates: Vec<f64> = (0..m).map(|i| r.random_range(1.0..5.0) + 0.37 * i as f64).collect();
    let cont: Vec<f64> = (0..m - 1).map(|_| r.random_range(0.3..1.0)).collect();
    let law = PhaseTypeLaw::coxian(&rates, &cont).unwrap();
    LevyModel::new(r.random_range(1.0..3.0), r.random_range(0.2..1.0), r.random_range(0.5..2.0), Some(law)).unwrap()
}

pub fn model_a() -> LevyModel<f64> {
    LevyModel::brownian(1.0, 2f64.sqrt()).unwrap()
}

/// `γ̃ = 2`, `σ = 0`, unit-rate exponential jumps at rate 1.
pub fn exp_jump_model() -> LevyModel<f64> {
    LevyModel::new(2.0, 0.0, 1.0, Some(PhaseTypeLaw::exponential(1.0).unwrap())).unwrap()
}
