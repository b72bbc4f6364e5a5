use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{LevyModel, Variation};
use crate::scalar::{cr, exprel, exprel2, Real};

/// One exponential term `coef · e^{rate·x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm<T> {
    pub coef: Complex<T>,
    pub rate: Complex<T>,
}

/// `f(x) = Σ c_i e^{ζ_i x}` on `[0, ∞)`, zero on `(−∞, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumFunction<T> {
    terms: Vec<ExpTerm<T>>,
    dominant: Option<usize>,
}

impl<T: Real> ExpSumFunction<T> {
    /// `dominant` marks the real term with the largest rate, if there is one.
    pub fn new(terms: Vec<ExpTerm<T>>, dominant: Option<usize>) -> Self {
        Self { terms, dominant }
    }

    pub fn terms(&self) -> &[ExpTerm<T>] {
        &self.terms
    }

    pub fn dominant_index(&self) -> Option<usize> {
        self.dominant
    }

    /// Terms other than the dominant one.
    pub fn subdominant(&self) -> impl Iterator<Item = &ExpTerm<T>> + '_ {
        let d = self.dominant;
        self.terms.iter().enumerate().filter(move |(i, _)| Some(*i) != d).map(|(_, t)| t)
    }

    pub fn dominant_term(&self) -> Option<ExpTerm<T>> {
        self.dominant.map(|i| self.terms[i])
    }

    fn sum_c(&self, x: T, order: i32) -> Complex<T> {
        self.terms
            .iter()
            .fold(cr(T::zero()), |s, t| s + t.coef * t.rate.powi(order) * (t.rate * x).exp())
    }

    /// Value or derivative of order ≤ 2; right limit at `x = 0`.
    pub fn eval(&self, x: T, order: u8) -> T {
        assert!(order <= 2, "order must be at most 2");
        if x < T::zero() {
            return T::zero();
        }
        self.sum_c(x, order as i32).re
    }

    /// Imaginary residue left over by the conjugate-pair cancellation.
    pub fn imaginary_residue(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        self.sum_c(x, 0).im.abs()
    }

    /// `∫_0^x f`.
    pub fn antiderivative(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        self.terms
            .iter()
            .fold(cr(T::zero()), |s, t| s + t.coef * exprel(t.rate * x) * x)
            .re
    }

    /// `x ↦ e^{−λx} f(x)`.
    pub fn tilted(&self, lambda: T) -> Self {
        Self {
            terms: self.terms.iter().map(|t| ExpTerm { coef: t.coef, rate: t.rate - lambda }).collect(),
            dominant: self.dominant,
        }
    }

    /// `∫_0^∞ e^{−θx} f(x) dx` for `θ` beyond every rate.
    pub fn laplace(&self, theta: T) -> T {
        self.terms.iter().fold(cr(T::zero()), |s, t| s + t.coef / (cr(theta) - t.rate)).re
    }

    /// `(1 + q∫_0^x f, ∫_0^x (1 + q∫_0^y f) dy)`, equal to `(1, x)` for `x ≤ 0`.
    pub fn z_functions(&self, q: T, x: T) -> (T, T) {
        if x <= T::zero() {
            return (T::one(), x);
        }
        let mut z = cr(T::zero());
        let mut zb = cr(T::zero());
        for t in &self.terms {
            let u = t.rate * x;
            z = z + t.coef * exprel(u) * x;
            zb = zb + t.coef * exprel2(u) * (x * x);
        }
        (T::one() + q * z.re, x + q * zb.re)
    }
}

/// Max over `theta_grid` of `|Σ c_i/(θ − ζ_i) − 1/(ψ(θ) − q)|`.
pub fn laplace_residual<T: Real, F>(f: &ExpSumFunction<T>, psi_minus_q: F, theta_grid: &[T]) -> Result<T>
where
    F: Fn(T) -> Result<T>,
{
    let mut worst = T::zero();
    for &th in theta_grid {
        let r = (f.laplace(th) - T::one() / psi_minus_q(th)?).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Scale function of `model` at rate `q` by partial fractions of `1/(ψ(θ) − q)`.
pub fn build_scale<T: Real>(model: &LevyModel<T>, q: T) -> Result<ExpSumFunction<T>> {
    let phi = model.root_of_psi(q)?;
    let rational = model.as_rational(q)?;
    let mut roots = rational.numerator.roots()?;
    let resid = |z: Complex<T>| -> Result<Complex<T>> { Ok(model.psi_c(z)? - q) };

    for z in roots.iter_mut() {
        let r0 = resid(*z)?;
        let step = r0 / model.psi_prime_c(*z)?;
        let cand = *z - step;
        if let Ok(r1) = resid(cand) {
            if r1.norm() < r0.norm() {
                *z = cand;
            }
        }
    }

    // Snap near-real roots onto the axis and enforce exact conjugate pairs.
    let snap = T::tol(1e-10, 64.0);
    for z in roots.iter_mut() {
        if z.im.abs() <= snap * (T::one() + z.norm()) {
            z.im = T::zero();
        }
    }
    let n = roots.len();
    let mut paired = vec![false; n];
    for i in 0..n {
        if roots[i].im > T::zero() && !paired[i] {
            let target = roots[i].conj();
            let j = (0..n)
                .filter(|&j| !paired[j] && j != i && roots[j].im < T::zero())
                .min_by(|&a, &b| (roots[a] - target).norm().partial_cmp(&(roots[b] - target).norm()).unwrap())
                .ok_or_else(|| Error::ScaleBuild("complex root without conjugate partner".into()))?;
            roots[j] = target;
            paired[i] = true;
            paired[j] = true;
        }
    }

    let sep = T::tol(1e-7, 1024.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (roots[i] - roots[j]).norm() < sep {
                return Err(Error::RepeatedRoot {
                    a: format!("{}", roots[i]),
                    b: format!("{}", roots[j]),
                    tol: sep.as_f64(),
                });
            }
        }
    }

    let dom = (0..n)
        .filter(|&i| roots[i].im == T::zero())
        .min_by(|&a, &b| (roots[a].re - phi).abs().partial_cmp(&(roots[b].re - phi).abs()).unwrap())
        .ok_or_else(|| Error::ScaleBuild("no real root near Φ(q)".into()))?;
    if (roots[dom].re - phi).abs() > T::tol(1e-6, 1e4) * (T::one() + phi) {
        return Err(Error::ScaleBuild(format!("companion root {} disagrees with Φ(q) = {phi}", roots[dom].re)));
    }
    roots[dom] = cr(phi);
    if let Some(bad) = (0..n).find(|&i| i != dom && !(roots[i].re < T::zero())) {
        return Err(Error::ScaleBuild(format!("root {} lies in the right half-plane", roots[bad])));
    }

    let mut terms = Vec::with_capacity(n);
    for &z in &roots {
        let d = model.psi_prime_c(z)?;
        terms.push(ExpTerm { coef: Complex::new(T::one(), T::zero()) / d, rate: z });
    }
    let f = ExpSumFunction::new(terms, Some(dom));

    let grid: Vec<T> = (0..50).map(|k| phi + T::lit(0.1 + 4.9 * k as f64 / 49.0)).collect();
    let mut worst = T::zero();
    for &th in &grid {
        let exact = T::one() / (model.psi(th)? - q);
        worst = worst.max((f.laplace(th) - exact).abs() / (T::one() + exact.abs()));
    }
    if worst > T::tol(1e-8, 4096.0) {
        return Err(Error::ScaleBuild(format!("Laplace residual {worst} too large")));
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    X,
    Y,
}

/// Scale functions of `X` and of `Y = X − δt` at a common rate `q`.
#[derive(Debug, Clone)]
pub struct ScaleSet<T> {
    pub w: ExpSumFunction<T>,
    pub wd: ExpSumFunction<T>,
    pub phi_q: T,
    pub varphi_q: T,
    pub w_at_0: T,
    pub w_prime_at_0plus: T,
    pub q: T,
    pub delta: T,
    /// `ψ'(Φ(q))`.
    pub psi_prime_at_phi: T,
    /// `ψ_Y'(φ(q)) = ψ'(φ(q)) − δ`.
    pub psi_y_prime_at_varphi: T,
    /// `ψ'(0+)` and `ψ_Y'(0+)`.
    pub mean_x: T,
    pub mean_y: T,
}

impl<T: Real> ScaleSet<T> {
    pub fn new(model_x: &LevyModel<T>, model_y: &LevyModel<T>, q: T) -> Result<Self> {
        let delta = model_x.gamma_tilde() - model_y.gamma_tilde();
        let w = build_scale(model_x, q)?;
        let wd = build_scale(model_y, q)?;
        let phi_q = w.dominant_term().unwrap().rate.re;
        let varphi_q = wd.dominant_term().unwrap().rate.re;
        if !(varphi_q > phi_q && phi_q > T::zero()) {
            return Err(Error::ScaleBuild(format!("expected φ(q) > Φ(q) > 0, got {varphi_q}, {phi_q}")));
        }
        Ok(Self {
            w_at_0: match model_x.variation() {
                Variation::UnboundedVariation => T::zero(),
                Variation::BoundedVariation => T::one() / model_x.gamma_tilde(),
            },
            w_prime_at_0plus: w.eval(T::zero(), 1),
            psi_prime_at_phi: model_x.psi_prime(phi_q)?,
            psi_y_prime_at_varphi: model_y.psi_prime(varphi_q)?,
            mean_x: model_x.mean_drift()?,
            mean_y: model_y.mean_drift()?,
            w,
            wd,
            phi_q,
            varphi_q,
            q,
            delta,
        })
    }

    pub fn scale(&self, which: Process) -> &ExpSumFunction<T> {
        match which {
            Process::X => &self.w,
            Process::Y => &self.wd,
        }
    }

    /// `Θ(x) = W'(x+) − Φ W(x) = Σ_{i≠Φ} c_i (ζ_i − Φ) e^{ζ_i x}`.
    pub fn theta_kernel(&self, x: T) -> Result<T> {
        let mut s = cr(T::zero());
        let mut mag = T::zero();
        for t in self.w.subdominant() {
            let v = t.coef * (t.rate - self.phi_q) * (t.rate * x).exp();
            mag = mag.max(v.norm());
            s = s + v;
        }
        if !(s.re > T::zero()) && mag > T::min_positive_value() / T::epsilon() {
            return Err(Error::ScaleBuild(format!("Θ({x}) = {} is not positive", s.re)));
        }
        Ok(s.re)
    }

    /// `∫_0^∞ e^{−a u} Θ(u) du`; `a = 0` gives the total mass.
    pub fn theta_laplace(&self, a: T) -> T {
        self.w.subdominant().fold(cr(T::zero()), |s, t| s + t.coef * (t.rate - self.phi_q) / (cr(a) - t.rate)).re
    }

    /// `∫_0^∞ u Θ(u) du`.
    pub fn theta_first_moment(&self) -> T {
        self.w
            .subdominant()
            .fold(cr(T::zero()), |s, t| s + t.coef * (t.rate - self.phi_q) / (t.rate * t.rate))
            .re
    }

    /// `Z` and `Z̄` built on the scale function of `Y`.
    pub fn z_functions(&self, x: T) -> (T, T) {
        self.wd.z_functions(self.q, x)
    }

    /// `e^{Φw}/ψ'(Φ) − W(w)` (X) or `e^{φw}/ψ_Y'(φ) − 𝕎(w)` (Y), without
    /// forming the growing exponentials.
    pub fn free_resolvent_density(&self, which: Process, w: T) -> Result<T> {
        let f = self.scale(which);
        let s = f.subdominant().fold(cr(T::zero()), |s, t| s - t.coef * (t.rate * w.max(T::zero())).exp());
        if s.re < -T::tol(1e-10, 64.0) {
            return Err(Error::NegativeDensity { y: w.as_f64(), value: s.re.as_f64() });
        }
        Ok(s.re)
    }

    pub fn free_resolvent_mass(&self, which: Process) -> T {
        let f = self.scale(which);
        let d = f.dominant_term().unwrap();
        let tail = (d.coef / d.rate).re;
        f.subdominant().fold(tail, |s, t| s + (t.coef / t.rate).re)
    }

    /// `E[−X̲_{e_q}] = 1/Φ(q) − ψ'(0+)/q`.
    pub fn mean_running_infimum(&self) -> T {
        T::one() / self.phi_q - self.mean_x / self.q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_a() -> LevyModel<f64> {
        LevyModel::brownian(1.0, 2f64.sqrt()).unwrap()
    }

    #[test]
    fn model_a_terms() {
        let w = build_scale(&model_a(), 2.0).unwrap();
        let mut t: Vec<_> = w.terms().to_vec();
        t.sort_by(|a, b| a.rate.re.partial_cmp(&b.rate.re).unwrap());
        assert!((t[0].rate.re + 2.0).abs() < 1e-13 && (t[0].coef.re + 1.0 / 3.0).abs() < 1e-13);
        assert!((t[1].rate.re - 1.0).abs() < 1e-13 && (t[1].coef.re - 1.0 / 3.0).abs() < 1e-13);
        let e = 1f64.exp();
        assert!((w.eval(1.0, 0) - (e - (-2f64).exp()) / 3.0).abs() < 1e-14);
        assert!((w.eval(1.0, 1) - (e + 2.0 * (-2f64).exp()) / 3.0).abs() < 1e-14);
        assert_eq!(w.eval(-0.5, 0), 0.0);
        assert_eq!(w.eval(-1.0, 2), 0.0);
        assert!(w.eval(0.0, 0).abs() < 1e-15);
    }

    #[test]
    fn bounded_variation_starts_at_inverse_drift() {
        let m = LevyModel::<f64>::new(2.0, 0.0, 1.0, Some(crate::model::PhaseTypeLaw::exponential(1.0).unwrap())).unwrap();
        let w = build_scale(&m, 0.5).unwrap();
        assert!((w.eval(0.0, 0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn theta_and_free_resolvent_model_a() {
        let x = model_a();
        let y = x.with_drift(0.5).unwrap();
        let s = ScaleSet::new(&x, &y, 2.0).unwrap();
        assert!((s.theta_kernel(1.0).unwrap() - (-2f64).exp()).abs() < 1e-14);
        assert!((s.theta_laplace(0.0) - 0.5).abs() < 1e-14);
        assert!((s.free_resolvent_density(Process::X, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((s.free_resolvent_mass(Process::X) - 0.5).abs() < 1e-14);
        assert!((s.free_resolvent_mass(Process::Y) - 0.5).abs() < 1e-14);
        assert!((s.mean_running_infimum() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn z_functions_conventions() {
        let w = build_scale(&model_a(), 2.0).unwrap();
        assert_eq!(w.z_functions(2.0, 0.0), (1.0, 0.0));
        assert_eq!(w.z_functions(2.0, -0.3), (1.0, -0.3));
    }

    #[test]
    fn residual_detects_perturbation() {
        let m = model_a();
        let w = build_scale(&m, 2.0).unwrap();
        let grid: Vec<f64> = (0..50).map(|k| 1.1 + 0.1 * k as f64).collect();
        let r = laplace_residual(&w, |t| Ok(m.psi(t)? - 2.0), &grid).unwrap();
        assert!(r <= 1e-12);
        let mut terms = w.terms().to_vec();
        terms[0].coef = terms[0].coef * 1.001;
        let bad = ExpSumFunction::new(terms, w.dominant_index());
        let r = laplace_residual(&bad, |t| Ok(m.psi(t)? - 2.0), &grid).unwrap();
        assert!(r >= 1e-4);
    }
}
