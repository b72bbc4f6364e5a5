use num_complex::Complex;

use crate::eigen::Mat;
use crate::error::{Error, Result};
use crate::linalg::{faddeev_leverrier, solve_shifted};
use crate::poly::Polynomial;
use crate::roots::newton_bisect;
use crate::scalar::{cr, Real};

pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Absorption-time law of a finite Markov chain with initial law `alpha`
/// and sub-generator `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTypeLaw<T> {
    alpha: Vec<T>,
    t: Mat<T>,
    exit: Vec<T>,
    abscissa: T,
}

impl<T: Real> PhaseTypeLaw<T> {
    pub fn new(alpha: Vec<T>, t_rows: &[Vec<T>]) -> Result<Self> {
        let m = alpha.len();
        let bad = |r: String| Err(Error::InvalidModel(r));
        if m == 0 {
            return bad("phase-type law needs at least one phase".into());
        }
        if t_rows.len() != m || t_rows.iter().any(|r| r.len() != m) {
            return bad(format!("T must be {m}x{m} to match alpha"));
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a >= T::zero())) {
            return bad("alpha entries must be finite and nonnegative".into());
        }
        let s = alpha.iter().fold(T::zero(), |s, &a| s + a);
        if (s - T::one()).abs() > T::tol(1e-12, 8.0) {
            return bad(format!("alpha sums to {s}, not 1"));
        }
        let t = Mat::from_rows(t_rows);
        let mut exit = vec![T::zero(); m];
        let mut strict = false;
        for i in 0..m {
            if !(t[(i, i)] < T::zero()) {
                return bad(format!("T[{i}][{i}] must be strictly negative"));
            }
            let mut row = T::zero();
            for j in 0..m {
                let v = t[(i, j)];
                if !v.is_finite() {
                    return bad("T entries must be finite".into());
                }
                if i != j && v < T::zero() {
                    return bad(format!("T[{i}][{j}] must be nonnegative"));
                }
                row += v;
            }
            let tol = T::tol(1e-12, 8.0) * t[(i, i)].abs();
            if row > tol {
                return bad(format!("row {i} of T sums to {row} > 0"));
            }
            exit[i] = if row < -tol { -row } else { T::zero() };
            strict |= row < -tol;
        }
        if !strict {
            return bad("T needs at least one row with a strictly negative sum".into());
        }
        let (charpoly, _) = faddeev_leverrier(&t);
        let eig = charpoly.roots()?;
        let abscissa = eig.iter().map(|z| z.re).fold(T::neg_infinity(), T::max);
        if !(abscissa < T::zero()) {
            return bad("T has an eigenvalue with nonnegative real part".into());
        }
        let law = Self { alpha, t, exit, abscissa };
        let z0 = law.transform(cr(T::zero()))?;
        if (z0.re - T::one()).abs() > T::tol(1e-10, 64.0) {
            return bad(format!("transform at 0 equals {} instead of 1", z0.re));
        }
        Ok(law)
    }

    pub fn exponential(rate: T) -> Result<Self> {
        Self::new(vec![T::one()], &[vec![-rate]])
    }

    /// Coxian law: phase `i` has exit rate `rates[i]` and continues to phase
    /// `i + 1` with probability `cont[i]`.
    pub fn coxian(rates: &[T], cont: &[T]) -> Result<Self> {
        let m = rates.len();
        if cont.len() + 1 != m {
            return Err(Error::InvalidModel("Coxian needs m − 1 continuation probabilities".into()));
        }
        let mut rows = vec![vec![T::zero(); m]; m];
        for i in 0..m {
            rows[i][i] = -rates[i];
            if i + 1 < m {
                rows[i][i + 1] = cont[i] * rates[i];
            }
        }
        let mut alpha = vec![T::zero(); m];
        alpha[0] = T::one();
        Self::new(alpha, &rows)
    }

    pub fn phases(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn generator(&self) -> &Mat<T> {
        &self.t
    }

    pub fn exit(&self) -> &[T] {
        &self.exit
    }

    /// Largest real part of the eigenvalues of `T`.
    pub fn abscissa(&self) -> T {
        self.abscissa
    }

    fn exit_c(&self) -> Vec<Complex<T>> {
        self.exit.iter().map(|&v| cr(v)).collect()
    }

    fn dot_alpha(&self, w: &[Complex<T>]) -> Complex<T> {
        self.alpha.iter().zip(w).fold(cr(T::zero()), |s, (&a, &v)| s + v * a)
    }

    /// `α (zI − T)^{-1} t`.
    pub fn transform(&self, z: Complex<T>) -> Result<Complex<T>> {
        let w = solve_shifted(&self.t, z, &self.exit_c())?;
        Ok(self.dot_alpha(&w))
    }

    /// Derivatives of the transform of order 0..=k at `z`.
    pub fn transform_derivs(&self, z: Complex<T>, k: usize) -> Result<Vec<Complex<T>>> {
        let mut w = self.exit_c();
        let mut out = Vec::with_capacity(k + 1);
        let mut fact = T::one();
        for n in 0..=k {
            w = solve_shifted(&self.t, z, &w)?;
            let sign = if n % 2 == 0 { T::one() } else { -T::one() };
            out.push(self.dot_alpha(&w) * (sign * fact));
            fact *= T::lit((n + 1) as f64);
        }
        Ok(out)
    }

    /// `E[Z^n] = n! α (−T)^{−n} 1`.
    pub fn moment(&self, n: usize) -> Result<T> {
        let mut w: Vec<Complex<T>> = vec![cr(T::one()); self.phases()];
        let mut fact = T::one();
        for k in 1..=n {
            w = solve_shifted(&self.t, cr(T::zero()), &w)?;
            fact *= T::lit(k as f64);
        }
        Ok(self.dot_alpha(&w).re * fact)
    }

    pub fn mean(&self) -> Result<T> {
        self.moment(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variation {
    BoundedVariation,
    UnboundedVariation,
}

/// `ψ(θ) − q = numerator(θ)/denominator(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalExponent<T> {
    pub numerator: Polynomial<T>,
    pub denominator: Polynomial<T>,
}

impl<T: Real> RationalExponent<T> {
    pub fn eval(&self, theta: T) -> T {
        self.numerator.eval(theta) / self.denominator.eval(theta)
    }
}

/// Spectrally negative Lévy process: drift, Brownian part and compound
/// Poisson negative jumps with phase-type sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel<T> {
    gamma_tilde: T,
    sigma: T,
    kappa: T,
    jumps: Option<PhaseTypeLaw<T>>,
}

impl<T: Real> LevyModel<T> {
    pub fn new(gamma_tilde: T, sigma: T, kappa: T, jumps: Option<PhaseTypeLaw<T>>) -> Result<Self> {
        if !gamma_tilde.is_finite() || !sigma.is_finite() || !kappa.is_finite() {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if sigma < T::zero() {
            return Err(Error::InvalidModel("sigma must be nonnegative".into()));
        }
        if kappa < T::zero() {
            return Err(Error::InvalidModel("kappa must be nonnegative".into()));
        }
        if kappa > T::zero() && jumps.is_none() {
            return Err(Error::InvalidModel("kappa > 0 requires a phase-type jump law".into()));
        }
        let jumps = if kappa > T::zero() { jumps } else { None };
        if sigma == T::zero() && !(gamma_tilde > T::zero()) {
            return Err(Error::InvalidModel(format!(
                "bounded-variation model needs a positive drift, got {gamma_tilde}"
            )));
        }
        Ok(Self { gamma_tilde, sigma, kappa, jumps })
    }

    pub fn brownian(gamma_tilde: T, sigma: T) -> Result<Self> {
        Self::new(gamma_tilde, sigma, T::zero(), None)
    }

    /// Same model with drift replaced.
    pub fn with_drift(&self, gamma_tilde: T) -> Result<Self> {
        Self::new(gamma_tilde, self.sigma, self.kappa, self.jumps.clone())
    }

    pub fn gamma_tilde(&self) -> T {
        self.gamma_tilde
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn jumps(&self) -> Option<&PhaseTypeLaw<T>> {
        self.jumps.as_ref()
    }

    pub fn variation(&self) -> Variation {
        if self.sigma == T::zero() {
            Variation::BoundedVariation
        } else {
            Variation::UnboundedVariation
        }
    }

    /// Real arguments must exceed this value.
    pub fn domain_lower_bound(&self) -> T {
        self.jumps.as_ref().map_or(T::neg_infinity(), |j| j.abscissa())
    }

    fn check_real(&self, theta: T) -> Result<()> {
        if theta > self.domain_lower_bound() {
            Ok(())
        } else {
            Err(Error::OutsideDomain(theta.as_f64()))
        }
    }

    pub fn psi_c(&self, z: Complex<T>) -> Result<Complex<T>> {
        let half = T::lit(0.5);
        let mut v = z * self.gamma_tilde + z * z * (half * self.sigma * self.sigma);
        if let Some(j) = &self.jumps {
            v = v + (j.transform(z)? - T::one()) * self.kappa;
        }
        Ok(v)
    }

    pub fn psi_prime_c(&self, z: Complex<T>) -> Result<Complex<T>> {
        let mut v = z * (self.sigma * self.sigma) + self.gamma_tilde;
        if let Some(j) = &self.jumps {
            v = v + j.transform_derivs(z, 1)?[1] * self.kappa;
        }
        Ok(v)
    }

    pub fn psi(&self, theta: T) -> Result<T> {
        if theta == T::zero() {
            return Ok(T::zero());
        }
        self.check_real(theta)?;
        Ok(self.psi_c(cr(theta))?.re)
    }

    pub fn psi_prime(&self, theta: T) -> Result<T> {
        self.check_real(theta)?;
        Ok(self.psi_prime_c(cr(theta))?.re)
    }

    pub fn psi_second(&self, theta: T) -> Result<T> {
        self.check_real(theta)?;
        let mut v = self.sigma * self.sigma;
        if let Some(j) = &self.jumps {
            v += j.transform_derivs(cr(theta), 2)?[2].re * self.kappa;
        }
        Ok(v)
    }

    /// `ψ'(0+) = E[X_1]`.
    pub fn mean_drift(&self) -> Result<T> {
        self.psi_prime(T::zero())
    }

    /// Unique positive root of `ψ(λ) = q`.
    pub fn root_of_psi(&self, q: T) -> Result<T> {
        if !(q > T::zero()) || !q.is_finite() {
            return Err(Error::InvalidParameter { name: "q", reason: format!("must be positive, got {q}") });
        }
        let mut hi = T::one();
        let mut n = 0;
        while self.psi(hi)? <= q {
            hi = hi + hi;
            n += 1;
            if n > 2000 || !hi.is_finite() {
                return Err(Error::BracketFailure("ψ(θ) stays below q".into()));
            }
        }
        let tol = T::tol(1e-13, 16.0) * T::one().max(q);
        newton_bisect(|x| Ok((self.psi(x)? - q, self.psi_prime(x)?)), T::zero(), hi, tol)
    }

    pub fn as_rational(&self, q: T) -> Result<RationalExponent<T>> {
        self.as_rational_with_cap(q, DEFAULT_DEGREE_CAP)
    }

    pub fn as_rational_with_cap(&self, q: T, cap: usize) -> Result<RationalExponent<T>> {
        let half = T::lit(0.5);
        let base = Polynomial::new(vec![-self.kappa - q, self.gamma_tilde, half * self.sigma * self.sigma]);
        let (numerator, denominator) = match &self.jumps {
            None => (Polynomial::new(vec![-q, self.gamma_tilde, half * self.sigma * self.sigma]), Polynomial::constant(T::one())),
            Some(j) => {
                let (den, ms) = faddeev_leverrier(j.generator());
                let m = j.phases();
                let mut nz = vec![T::zero(); m];
                for (k, mk) in ms.iter().enumerate() {
                    let mut s = T::zero();
                    for a in 0..m {
                        for b in 0..m {
                            s += j.alpha()[a] * mk[(a, b)] * j.exit()[b];
                        }
                    }
                    nz[m - 1 - k] = s;
                }
                let num = base.mul(&den).add(&Polynomial::new(nz).scale(self.kappa));
                (num, den)
            }
        };
        if numerator.degree() > cap {
            return Err(Error::DegreeCap { degree: numerator.degree(), cap });
        }
        Ok(RationalExponent { numerator, denominator })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_model() -> LevyModel<f64> {
        LevyModel::new(2.0, 0.0, 1.0, Some(PhaseTypeLaw::exponential(1.0).unwrap())).unwrap()
    }

    #[test]
    fn psi_examples() {
        let a = LevyModel::brownian(1.0, 2f64.sqrt()).unwrap();
        assert!((a.psi(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(a.psi(0.0).unwrap(), 0.0);
        assert!((exp_model().psi(1.0).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn psi_prime_examples() {
        let a = LevyModel::brownian(1.0, 2f64.sqrt()).unwrap();
        assert!((a.psi_prime(0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((a.psi_prime(1.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((exp_model().psi_prime(0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn roots_of_psi() {
        let a = LevyModel::brownian(1.0, 2f64.sqrt()).unwrap();
        assert!((a.root_of_psi(2.0).unwrap() - 1.0).abs() < 1e-12);
        let y = a.with_drift(0.5).unwrap();
        assert!((y.root_of_psi(2.0).unwrap() - (-0.5 + 8.25f64.sqrt()) / 2.0).abs() < 1e-12);
        let r = exp_model().root_of_psi(0.5).unwrap();
        assert!((2.0 * r * r + 0.5 * r - 0.5).abs() < 1e-12);
        assert!(a.root_of_psi(0.0).is_err());
    }

    #[test]
    fn rational_forms() {
        let a = LevyModel::brownian(1.0, 2f64.sqrt()).unwrap();
        let r = a.as_rational(2.0).unwrap();
        assert_eq!(r.denominator.coeffs(), &[1.0]);
        let n = r.numerator.coeffs();
        assert!((n[0] + 2.0).abs() < 1e-15 && (n[1] - 1.0).abs() < 1e-15 && (n[2] - 1.0).abs() < 1e-15);
        let r = exp_model().as_rational(0.5).unwrap();
        let n = r.numerator.coeffs();
        assert!((n[0] + 0.5).abs() < 1e-15 && (n[1] - 0.5).abs() < 1e-15 && (n[2] - 2.0).abs() < 1e-15);
        assert_eq!(r.denominator.coeffs(), &[1.0, 1.0]);
        assert!(matches!(exp_model().as_rational_with_cap(0.5, 1), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn variation_and_validation() {
        assert_eq!(LevyModel::brownian(1.0, 0.2).unwrap().variation(), Variation::UnboundedVariation);
        assert_eq!(exp_model().variation(), Variation::BoundedVariation);
        assert_eq!(LevyModel::brownian(1.0, 0.0).unwrap().variation(), Variation::BoundedVariation);
        assert!(LevyModel::brownian(-1.0, 0.0).is_err());
        assert!(LevyModel::<f64>::new(1.0, 0.1, 1.0, None).is_err());
        assert!(PhaseTypeLaw::new(vec![0.5, 0.4], &[vec![-1.0, 0.0], vec![0.0, -1.0]]).is_err());
        assert!(PhaseTypeLaw::new(vec![1.0], &[vec![1.0]]).is_err());
    }

    #[test]
    fn outside_domain_and_pole() {
        let m = exp_model();
        assert!(matches!(m.psi(-1.5), Err(Error::OutsideDomain(_))));
        assert!(matches!(m.psi_c(Complex::new(-1.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn phase_type_moments() {
        let e = PhaseTypeLaw::<f64>::exponential(2.0).unwrap();
        assert!((e.mean().unwrap() - 0.5).abs() < 1e-15);
        assert!((e.moment(3).unwrap() - 6.0 / 8.0).abs() < 1e-14);
        // Erlang(2, 1) as a Coxian.
        let er = PhaseTypeLaw::<f64>::coxian(&[1.0, 1.0], &[1.0]).unwrap();
        assert!((er.mean().unwrap() - 2.0).abs() < 1e-14);
        assert!((er.moment(2).unwrap() - 6.0).abs() < 1e-13);
    }
}
