use crate::cost::{CostFunction, Extended};
use crate::error::{Error, Result};
use crate::kernel::PiecewiseExp;
use crate::model::LevyModel;
use crate::refraction::{BStar, RefractionProblem};
use crate::roots::{bisect_level, expand_bracket};
use crate::scalar::Real;
use crate::scale::{build_scale, ExpSumFunction};

/// The `δ → ∞` limit: `Y` is fixed and controlled by reflection at `b*(∞)`
/// with unit cost `−β̃` per unit paid.
#[derive(Debug, Clone)]
pub struct ReflectionProblem<T> {
    model_y: LevyModel<T>,
    q: T,
    beta_tilde: T,
    cost: CostFunction<T>,
    wd: ExpSumFunction<T>,
    varphi: T,
    mean_y: T,
}

impl<T: Real> ReflectionProblem<T> {
    pub fn new(model_y: LevyModel<T>, q: T, beta_tilde: T, cost: CostFunction<T>) -> Result<Self> {
        if !beta_tilde.is_finite() {
            return Err(Error::InvalidParameter { name: "beta_tilde", reason: "must be finite".into() });
        }
        let wd = build_scale(&model_y, q)?;
        let varphi = wd.dominant_term().unwrap().rate.re;
        let shift = beta_tilde * q;
        // h' + β̃q must be negative far left and bounded away from zero far right.
        let (lo, hi) = cost.slope_limits();
        let left_ok = match lo {
            Extended::NegInf => true,
            Extended::Finite(s) => s + shift < T::zero(),
            Extended::PosInf => false,
        };
        let right_ok = match hi {
            Extended::PosInf => true,
            Extended::Finite(s) => s + shift > T::zero(),
            Extended::NegInf => false,
        };
        if !(left_ok && right_ok) {
            return Err(Error::InvalidCost(
                "h'(x) + beta_tilde*q must change sign from negative to positive".into(),
            ));
        }
        let mean_y = model_y.mean_drift()?;
        Ok(Self { model_y, q, beta_tilde, cost, wd, varphi, mean_y })
    }

    pub fn model_y(&self) -> &LevyModel<T> {
        &self.model_y
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn beta_tilde(&self) -> T {
        self.beta_tilde
    }

    pub fn cost(&self) -> &CostFunction<T> {
        &self.cost
    }

    pub fn varphi(&self) -> T {
        self.varphi
    }

    pub fn scale_y(&self) -> &ExpSumFunction<T> {
        &self.wd
    }

    /// `∫_0^∞ h'(y + b) e^{−φy} dy + β̃q/φ`.
    pub fn i_inf(&self, b: T) -> Result<T> {
        Ok(self.cost.tail_integral(1, b, self.varphi)? + self.beta_tilde * self.q / self.varphi)
    }

    pub fn b_star_inf(&self) -> Result<T> {
        let tol = T::tol(1e-10, 64.0) * (T::one() + self.i_inf(T::zero())?.abs());
        let (lo, hi, _, _) = expand_bracket(|b| self.i_inf(b), 200)?;
        let w = T::tol(1e-10, 4.0).max(T::lit(4.0) * T::epsilon() * lo.abs().max(hi.abs()));
        let left = bisect_level(|b| self.i_inf(b), lo, hi, -tol, w)?;
        let right = bisect_level(|b| self.i_inf(b), lo, hi, tol, w)?;
        Ok((left + right) * T::lit(0.5))
    }

    /// Kernel `y ↦ 𝕎(x − y)` on `[b, x)`.
    fn convolution_kernel(&self, b: T, x: T) -> PiecewiseExp<T> {
        let mut k = PiecewiseExp::new();
        if x > b {
            let pc = k.piece(b, x);
            for t in self.wd.terms() {
                pc.push(t.coef, -t.rate, x);
            }
        }
        k
    }

    /// Value of the reflection strategy at `b*(∞)`.
    pub fn v_tilde_inf(&self, x: T) -> Result<T> {
        let b = self.b_star_inf()?;
        self.v_tilde_inf_at(b, x)
    }

    pub fn v_tilde_inf_at(&self, b: T, x: T) -> Result<T> {
        let (z, zbar) = self.wd.z_functions(self.q, x - b);
        let conv = self.convolution_kernel(b, x).integrate_cost(&self.cost, 0)?;
        let tail = self.cost.tail_integral(0, b, self.varphi)?;
        let bt = self.beta_tilde;
        Ok(-bt * (zbar + self.mean_y / self.q) - conv + z * (self.varphi / self.q * tail + bt / self.varphi))
    }

    /// `−β̃ − ∫_{b*}^x (h'(y) + β̃q) 𝕎(x − y) dy`.
    pub fn v_tilde_inf_derivative(&self, x: T) -> Result<T> {
        let b = self.b_star_inf()?;
        let k = self.convolution_kernel(b, x);
        Ok(-self.beta_tilde - k.integrate_cost(&self.cost, 1)? - self.beta_tilde * self.q * k.mass()?)
    }

    /// Refraction problem with `X = Y + δt` and `β = −β̃`.
    pub fn refraction_problem(&self, delta: T) -> Result<RefractionProblem<T>> {
        let x = self.model_y.with_drift(self.model_y.gamma_tilde() + delta)?;
        RefractionProblem::new(x, delta, self.q, -self.beta_tilde, self.cost.clone())
    }

    /// Solves the refraction problem for every `δ` and the reflection limit.
    pub fn convergence_sweep(&self, delta_grid: &[T], x_grid: &[T]) -> Result<ConvergenceTable<T>> {
        let mut rows = Vec::with_capacity(delta_grid.len());
        for &delta in delta_grid {
            let p = self.refraction_problem(delta)?;
            let sol = p.solve()?;
            let b_star = match sol.b_star {
                BStar::Finite(b) => b,
                other => {
                    return Err(Error::BracketFailure(format!("threshold {other:?} at delta = {delta}")));
                }
            };
            let shift = self.beta_tilde * delta / self.q;
            let v_tilde = x_grid.iter().map(|&x| Ok(sol.value(x)? + shift)).collect::<Result<Vec<_>>>()?;
            rows.push(SweepRow {
                delta,
                b_star,
                delta_phi_q: delta * p.scale().phi_q,
                delta_w_at_1: delta * p.scale().w.eval(T::one(), 0),
                v_tilde,
            });
        }
        let b_star_inf = self.b_star_inf()?;
        let v_tilde_inf = x_grid.iter().map(|&x| self.v_tilde_inf_at(b_star_inf, x)).collect::<Result<Vec<_>>>()?;
        Ok(ConvergenceTable { x_grid: x_grid.to_vec(), rows, b_star_inf, v_tilde_inf })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub delta: T,
    pub b_star: T,
    pub delta_phi_q: T,
    pub delta_w_at_1: T,
    /// `ṽ(x; δ)` on the sweep's x-grid.
    pub v_tilde: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub x_grid: Vec<T>,
    pub rows: Vec<SweepRow<T>>,
    pub b_star_inf: T,
    pub v_tilde_inf: Vec<T>,
}

/// Sweep grid `{1, …, 20, 40, 60, 80, 100}`.
pub fn default_delta_grid<T: Real>() -> Vec<T> {
    (1..=20).chain([40, 60, 80, 100]).map(|d| T::lit(d as f64)).collect()
}
