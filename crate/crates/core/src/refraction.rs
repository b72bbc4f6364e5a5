use num_complex::Complex;

use crate::cost::{CostFunction, Extended};
use crate::error::{Error, Result};
use crate::kernel::PiecewiseExp;
use crate::model::LevyModel;
use crate::roots::{bisect_level, expand_bracket};
use crate::scalar::{cr, divided_exp, Real};
use crate::scale::ScaleSet;

/// Optimal threshold: a level, one of the degenerate strategies, or
/// indifference (every threshold gives the same value).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BStar<T> {
    NegInf,
    Finite(T),
    PosInf,
    Indifferent,
}

impl<T: Real> BStar<T> {
    /// Threshold used for evaluation; indifference evaluates at `b = 0`.
    pub fn level(self) -> Extended<T> {
        match self {
            BStar::NegInf => Extended::NegInf,
            BStar::Finite(b) => Extended::Finite(b),
            BStar::PosInf => Extended::PosInf,
            BStar::Indifferent => Extended::Finite(T::zero()),
        }
    }
}

/// Resolvent density `r_b(x, ·)` split by the side of the threshold.
#[derive(Debug, Clone)]
pub struct Resolvent<T> {
    pub below: PiecewiseExp<T>,
    pub above: PiecewiseExp<T>,
}

impl<T: Real> Resolvent<T> {
    pub fn eval(&self, y: T) -> T {
        self.below.eval(y) + self.above.eval(y)
    }

    pub fn mass(&self) -> Result<T> {
        Ok(self.below.mass()? + self.above.mass()?)
    }
}

type Terms<T> = Vec<(Complex<T>, Complex<T>)>;

/// Minimise `E_x ∫ e^{−qt} (h(U_t) dt + β dL_t)` over refraction strategies
/// paying at rate `δ`.
#[derive(Debug, Clone)]
pub struct RefractionProblem<T> {
    model_x: LevyModel<T>,
    model_y: LevyModel<T>,
    delta: T,
    q: T,
    beta: T,
    cost: CostFunction<T>,
    scale: ScaleSet<T>,
    // (c_i, ζ_i) for the non-dominant roots of X and (d_j, ρ_j) for Y.
    xs: Terms<T>,
    ys: Terms<T>,
    c_phi: T,
    d_varphi: T,
}

impl<T: Real> RefractionProblem<T> {
    pub fn new(model_x: LevyModel<T>, delta: T, q: T, beta: T, cost: CostFunction<T>) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::InvalidParameter { name: "delta", reason: format!("must be positive, got {delta}") });
        }
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::InvalidParameter { name: "q", reason: format!("must be positive, got {q}") });
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParameter { name: "beta", reason: "must be finite".into() });
        }
        let model_y = model_x.with_drift(model_x.gamma_tilde() - delta).map_err(|_| Error::InvalidParameter {
            name: "delta",
            reason: format!(
                "bounded-variation model needs gamma_tilde − delta > 0, got {}",
                model_x.gamma_tilde() - delta
            ),
        })?;
        let scale = ScaleSet::new(&model_x, &model_y, q)?;
        let xs = scale.w.subdominant().map(|t| (t.coef, t.rate)).collect();
        let ys = scale.wd.subdominant().map(|t| (t.coef, t.rate)).collect();
        let c_phi = scale.w.dominant_term().unwrap().coef.re;
        let d_varphi = scale.wd.dominant_term().unwrap().coef.re;
        Ok(Self { model_x, model_y, delta, q, beta, cost, scale, xs, ys, c_phi, d_varphi })
    }

    pub fn model_x(&self) -> &LevyModel<T> {
        &self.model_x
    }

    pub fn model_y(&self) -> &LevyModel<T> {
        &self.model_y
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn cost(&self) -> &CostFunction<T> {
        &self.cost
    }

    pub fn scale(&self) -> &ScaleSet<T> {
        &self.scale
    }

    /// Same problem with another cost.
    pub fn with_cost(&self, cost: CostFunction<T>) -> Self {
        Self { cost, ..self.clone() }
    }

    pub fn mean_running_infimum(&self) -> T {
        self.scale.mean_running_infimum()
    }

    fn phis(&self) -> (T, T) {
        (self.scale.phi_q, self.scale.varphi_q)
    }

    /// `(φ − Φ)/(δΦ)`.
    fn a_const(&self) -> T {
        let (p, v) = self.phis();
        (v - p) / (self.delta * p)
    }

    /// `(φ−Φ)/Φ · c_i ζ_i/(φ − ζ_i)`.
    fn g(&self, c: Complex<T>, z: Complex<T>) -> Complex<T> {
        let (p, v) = self.phis();
        c * z * ((v - p) / p) / (cr(v) - z)
    }

    /// `(φ − Φ) Σ_{j≠φ} d_j e^{ρ_j a}/(ρ_j − Φ)`.
    fn r_tail(&self, a: T) -> T {
        let (p, v) = self.phis();
        self.ys
            .iter()
            .fold(cr(T::zero()), |s, &(d, r)| s + d * (r * a).exp() / (r - p))
            .re
            * (v - p)
    }

    /// `M(x; b)`.
    pub fn m_function(&self, b: T, x: T) -> T {
        let a = x - b;
        let (p, v) = self.phis();
        self.d_varphi * (v * a).exp() - self.a_const() * (p * a).exp() + self.r_tail(a)
    }

    /// Kernel `K` with `I(b) = ∫ h'(y) K(y) dy − δβΦ/φ`.
    fn i_kernel(&self, b: T) -> PiecewiseExp<T> {
        let (p, v) = self.phis();
        let mut k = PiecewiseExp::new();
        k.piece(b, T::infinity()).push_real((v - p) / v, -v, b);
        let lower = k.piece(T::neg_infinity(), b);
        for &(c, z) in &self.xs {
            let kc = c * (z - p) / (cr(v) - z) * self.delta;
            lower.push(kc, -z, b);
        }
        k
    }

    pub fn i_of_b(&self, b: T) -> Result<T> {
        let (p, v) = self.phis();
        Ok(self.i_kernel(b).integrate_cost(&self.cost, 1)? - self.delta * self.beta * p / v)
    }

    /// `(I(−∞), I(+∞)) = (δΦ/φ)(h'(∓∞)/q − β)`.
    pub fn i_limits(&self) -> (Extended<T>, Extended<T>) {
        let (p, v) = self.phis();
        let s = self.delta * p / v;
        let (lo, hi) = self.cost.slope_limits();
        let map = |e: Extended<T>| match e {
            Extended::Finite(d) => Extended::Finite(s * (d / self.q - self.beta)),
            other => other,
        };
        (map(lo), map(hi))
    }

    fn classify(&self) -> Option<BStar<T>> {
        let (lo, hi) = self.i_limits();
        let scale = self.delta * self.scale.phi_q / self.scale.varphi_q;
        let zero = |e: Extended<T>| {
            matches!(e, Extended::Finite(v) if v.abs() <= T::tol(1e-12, 16.0) * scale * (T::one() + self.beta.abs()))
        };
        if zero(lo) && zero(hi) {
            return Some(BStar::Indifferent);
        }
        let le0 = |e: Extended<T>| match e {
            Extended::NegInf => true,
            Extended::Finite(v) => v <= T::zero() || zero(e),
            Extended::PosInf => false,
        };
        let ge0 = |e: Extended<T>| match e {
            Extended::PosInf => true,
            Extended::Finite(v) => v >= T::zero() || zero(e),
            Extended::NegInf => false,
        };
        if le0(hi) {
            Some(BStar::PosInf)
        } else if ge0(lo) {
            Some(BStar::NegInf)
        } else {
            None
        }
    }

    /// Threshold search: classification by the limits of `I`, otherwise
    /// bracket expansion and bisection on both ends of the zero set.
    pub fn find_b_star(&self) -> Result<ThresholdSearch<T>> {
        if let Some(b) = self.classify() {
            return Ok(ThresholdSearch { b_star: b, zero_set: None, tol_i: T::zero() });
        }
        let tol_i = T::tol(1e-10, 64.0) * (T::one() + self.i_of_b(T::zero())?.abs());
        let (lo, hi, _, _) = expand_bracket(|b| self.i_of_b(b), 200)?;
        let width = |b: T| T::tol(1e-10, 4.0).max(T::lit(4.0) * T::epsilon() * b.abs());
        let w = width(lo.abs().max(hi.abs()));
        let left = bisect_level(|b| self.i_of_b(b), lo, hi, -tol_i, w)?;
        let right = bisect_level(|b| self.i_of_b(b), lo, hi, tol_i, w)?;
        let mut b = (left + right) * T::lit(0.5);
        if self.i_of_b(b)?.abs() > tol_i {
            // Steep I: the tol-band is narrower than the bracket resolution.
            b = bisect_level(|b| self.i_of_b(b), lo, hi, T::zero(), w)?;
        }
        Ok(ThresholdSearch { b_star: BStar::Finite(b), zero_set: Some((left.min(b), right.max(b))), tol_i })
    }

    pub fn solve(&self) -> Result<RefractionSolution<T>> {
        let s = self.find_b_star()?;
        Ok(RefractionSolution { problem: self.clone(), b_star: s.b_star, zero_set: s.zero_set })
    }

    /// Resolvent density of the process refracted at `level`, started at `x`.
    pub fn resolvent(&self, level: Extended<T>, x: T) -> Resolvent<T> {
        let (p, v) = self.phis();
        let mut below = PiecewiseExp::new();
        let mut above = PiecewiseExp::new();
        match level {
            Extended::PosInf => {
                below.piece(x, T::infinity()).push_real(T::one() / self.scale.psi_prime_at_phi, -p, x);
                let pc = below.piece(T::neg_infinity(), x);
                for &(c, z) in &self.xs {
                    pc.push(-c, -z, x);
                }
            }
            Extended::NegInf => {
                above.piece(x, T::infinity()).push_real(T::one() / self.scale.psi_y_prime_at_varphi, -v, x);
                let pc = above.piece(T::neg_infinity(), x);
                for &(d, r) in &self.ys {
                    pc.push(-d, -r, x);
                }
            }
            Extended::Finite(b) => {
                let a = x - b;
                let ac = self.a_const();
                if a <= T::zero() {
                    let s = (p * a).exp();
                    above.piece(b, T::infinity()).push_real(ac * s, -v, b);
                    if a < T::zero() {
                        let mid = below.piece(x, b);
                        mid.push_real(self.c_phi, -p, x);
                        for &(c, z) in &self.xs {
                            mid.push(self.g(c, z) * s, -z, b);
                        }
                    }
                    let low = below.piece(T::neg_infinity(), x);
                    for &(c, z) in &self.xs {
                        let coef = self.g(c, z) * ((cr(p) - z) * a).exp() - c;
                        low.push(coef, -z, x);
                    }
                } else {
                    let top_coef = self.d_varphi
                        + (v - p)
                            * self
                                .ys
                                .iter()
                                .fold(cr(T::zero()), |s, &(d, r)| s + d * ((r - v) * a).exp() / (r - p))
                                .re;
                    above.piece(x, T::infinity()).push_real(top_coef, -v, x);
                    let band = above.piece(b, x);
                    band.push_real(self.r_tail(a), -v, b);
                    for &(d, r) in &self.ys {
                        band.push(-d, -r, x);
                    }
                    let rt = self.r_tail(a);
                    let low = below.piece(T::neg_infinity(), b);
                    for &(c, z) in &self.xs {
                        let eza = (z * a).exp();
                        let mut conv = cr(T::zero());
                        for &(d, r) in &self.ys {
                            conv = conv + d * divided_exp(z, r, a);
                        }
                        let bracket = (cr(rt) + eza * self.d_varphi) / (cr(v) - z) - conv;
                        let coef = -c * eza + c * z * bracket * self.delta;
                        low.push(coef, -z, b);
                    }
                }
            }
        }
        Resolvent { below, above }
    }

    /// `r_b(x, y)`.
    pub fn refraction_resolvent(&self, b: T, x: T, y: T) -> Result<T> {
        let r = self.resolvent(Extended::Finite(b), x).eval(y);
        if r < -T::tol(1e-10, 64.0) {
            return Err(Error::NegativeDensity { y: y.as_f64(), value: r.as_f64() });
        }
        Ok(r)
    }

    /// `v_b(x) = ∫ h r_b + βδ ∫_{y > b} r_b`.
    pub fn value_v_b(&self, level: Extended<T>, x: T) -> Result<T> {
        let r = self.resolvent(level, x);
        let running = r.below.integrate_cost(&self.cost, 0)? + r.above.integrate_cost(&self.cost, 0)?;
        Ok(running + self.beta * self.delta * r.above.mass()?)
    }

    /// `∫ h'(y) r_b(x, y) dy`, the derivative of `v_b` at `b = b*`.
    pub fn value_derivative(&self, level: Extended<T>, x: T) -> Result<T> {
        let r = self.resolvent(level, x);
        Ok(r.below.integrate_cost(&self.cost, 1)? + r.above.integrate_cost(&self.cost, 1)?)
    }

    /// Positive factor `u_b(x)/I(b)`.
    pub fn u_factor(&self, b: T, x: T) -> T {
        let a = x - b;
        if a <= T::zero() {
            self.a_const() * (self.scale.phi_q * a).exp()
        } else {
            let (p, v) = self.phis();
            self.ys
                .iter()
                .fold(cr(T::zero()), |s, &(d, r)| s + d * (r * a).exp() * (cr(v) - r) / (r - p))
                .re
        }
    }

    /// `∂v_b(x)/∂b`.
    pub fn u_b(&self, b: T, x: T) -> Result<T> {
        Ok(self.u_factor(b, x) * self.i_of_b(b)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSearch<T> {
    pub b_star: BStar<T>,
    /// Interval on which `|I| ≤ tol_i`, for finite thresholds.
    pub zero_set: Option<(T, T)>,
    pub tol_i: T,
}

#[derive(Debug, Clone)]
pub struct RefractionSolution<T> {
    problem: RefractionProblem<T>,
    pub b_star: BStar<T>,
    pub zero_set: Option<(T, T)>,
}

impl<T: Real> RefractionSolution<T> {
    /// Candidate solution refracting at an arbitrary threshold.
    pub fn with_threshold(problem: &RefractionProblem<T>, b_star: BStar<T>) -> Self {
        Self { problem: problem.clone(), b_star, zero_set: None }
    }

    pub fn problem(&self) -> &RefractionProblem<T> {
        &self.problem
    }

    pub fn value(&self, x: T) -> Result<T> {
        self.problem.value_v_b(self.b_star.level(), x)
    }

    pub fn derivative(&self, x: T) -> Result<T> {
        self.problem.value_derivative(self.b_star.level(), x)
    }

    /// `|v'(b*) − β|` for finite thresholds.
    pub fn smooth_fit_residual(&self) -> Result<Option<T>> {
        match self.b_star {
            BStar::Finite(b) => Ok(Some((self.derivative(b)? - self.problem.beta).abs())),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome<T> {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation amount (zero when none).
    pub worst: T,
    /// `(x, amount)` for every violating grid point.
    pub violations: Vec<(T, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport<T> {
    pub checks: Vec<CheckOutcome<T>>,
    pub smooth_fit_residual: Option<T>,
}

impl<T: Real> VerificationReport<T> {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome<T>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn outcome<T: Real>(name: &'static str, violations: Vec<(T, T)>) -> CheckOutcome<T> {
    let worst = violations.iter().fold(T::zero(), |m, v| m.max(v.1));
    CheckOutcome { name, passed: violations.is_empty(), worst, violations }
}

pub const CHECK_INEQUALITIES: &str = "variational_inequalities";
pub const CHECK_SMOOTH_FIT: &str = "smooth_fit";
pub const CHECK_CONVEXITY: &str = "convexity";
pub const CHECK_DOMINANCE: &str = "dominance";

/// Numerical optimality checks on `grid`: sign of `v' − β` on both sides of
/// the threshold, smooth fit, monotone `v'`, and dominance over nearby thresholds.
pub fn verify_solution<T: Real>(
    problem: &RefractionProblem<T>,
    solution: &RefractionSolution<T>,
    grid: &[T],
) -> Result<VerificationReport<T>> {
    let beta = problem.beta();
    let level = solution.b_star.level();
    let mut xs = grid.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dv: Vec<T> = xs.iter().map(|&x| problem.value_derivative(level, x)).collect::<Result<_>>()?;

    let ineq_tol = T::tol(1e-8, 1024.0) * (T::one() + beta.abs());
    let mut ineq = Vec::new();
    for (&x, &d) in xs.iter().zip(&dv) {
        let below = match level {
            Extended::NegInf => false,
            Extended::PosInf => true,
            Extended::Finite(b) => x <= b,
        };
        let excess = if below { d - beta } else { beta - d };
        if excess > ineq_tol {
            ineq.push((x, excess));
        }
    }

    let smooth = solution.smooth_fit_residual()?;
    let sf = match smooth {
        Some(r) if r > T::tol(1e-6, 4096.0) * (T::one() + beta.abs()) => {
            vec![(solution.b_star.level().finite().unwrap(), r)]
        }
        _ => Vec::new(),
    };

    let mut conv = Vec::new();
    for k in 1..dv.len() {
        let drop = dv[k - 1] - dv[k];
        if drop > T::tol(1e-9, 1024.0) * (T::one() + dv[k].abs()) {
            conv.push((xs[k], drop));
        }
    }

    let comparators: Vec<T> = match level {
        Extended::Finite(b) => [-1.0, -0.5, 0.5, 1.0].iter().map(|&o| b + T::lit(o)).collect(),
        _ => match (xs.first(), xs.last()) {
            (Some(&lo), Some(&hi)) => vec![lo, (lo + hi) * T::lit(0.5), hi],
            _ => Vec::new(),
        },
    };
    let mut dom = Vec::new();
    for &x in &xs {
        let v = problem.value_v_b(level, x)?;
        let tol = T::tol(1e-7, 1e4) * T::one().max(v.abs() * T::epsilon() / T::lit(1e-10));
        for &b in &comparators {
            let other = problem.value_v_b(Extended::Finite(b), x)?;
            if v > other + tol {
                dom.push((x, v - other));
            }
        }
    }

    Ok(VerificationReport {
        checks: vec![
            outcome(CHECK_INEQUALITIES, ineq),
            outcome(CHECK_SMOOTH_FIT, sf),
            outcome(CHECK_CONVEXITY, conv),
            outcome(CHECK_DOMINANCE, dom),
        ],
        smooth_fit_residual: smooth,
    })
}

