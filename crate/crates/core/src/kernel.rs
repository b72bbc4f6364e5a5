//! Piecewise exponential densities `y ↦ Σ c·e^{r(y − anchor)}` and their
//! integrals against costs.
//!
//! Each term is anchored at the endpoint of its piece where the exponent is
//! largest, so the exponential factor never exceeds one in modulus.

use num_complex::Complex;

use crate::cost::{CostFunction, Growth};
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{cr, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchoredTerm<T> {
    pub coef: Complex<T>,
    pub rate: Complex<T>,
    pub anchor: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece<T> {
    pub lo: T,
    pub hi: T,
    pub terms: Vec<AnchoredTerm<T>>,
}

impl<T: Real> Piece<T> {
    /// Adds `coef · e^{rate (y − reference)}`, re-anchored.
    pub fn push(&mut self, coef: Complex<T>, rate: Complex<T>, reference: T) -> &mut Self {
        let anchor = if rate.re <= T::zero() { self.lo } else { self.hi };
        assert!(anchor.is_finite(), "term does not decay towards the open end of its piece");
        let c = if anchor == reference { coef } else { coef * (rate * (anchor - reference)).exp() };
        self.terms.push(AnchoredTerm { coef: c, rate, anchor });
        self
    }

    pub fn push_real(&mut self, coef: T, rate: T, reference: T) -> &mut Self {
        self.push(cr(coef), cr(rate), reference)
    }

    pub fn eval(&self, y: T) -> T {
        self.terms
            .iter()
            .fold(cr(T::zero()), |s, t| s + t.coef * (t.rate * (y - t.anchor)).exp())
            .re
    }

    fn length(&self) -> T {
        self.hi - self.lo
    }
}

/// `∫_0^L t^k e^{μt} dt` for `Re μ ≤ 0`; `L` may be infinite.
pub fn exp_moment<T: Real>(k: usize, mu: Complex<T>, len: T) -> Complex<T> {
    let mut fact = T::one();
    for j in 1..=k {
        fact *= T::lit(j as f64);
    }
    let kp1 = (k + 1) as i32;
    if !len.is_finite() {
        return cr(fact) / (-mu).powi(kp1);
    }
    let ml = mu * len;
    if ml.norm() <= T::lit((k + 2) as f64) {
        // Σ_n μ^n L^{n+k+1} / (n! (n+k+1))
        let mut pw = cr(len.powi(kp1));
        let mut sum = pw / T::lit((k + 1) as f64);
        for n in 1..200 {
            pw = pw * ml / T::lit(n as f64);
            let term = pw / T::lit((n + k + 1) as f64);
            sum = sum + term;
            if term.norm() <= T::epsilon() * T::lit(0.1) * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let mut s = cr(T::zero());
        let mut p = cr(T::one());
        for j in 0..=k {
            if j > 0 {
                p = p * (-ml) / T::lit(j as f64);
            }
            s = s + p;
        }
        (cr(T::one()) - ml.exp() * s) * fact / (-mu).powi(kp1)
    }
}

/// Breakpoints refined geometrically towards both ends, where terms with
/// large rates concentrate their mass.
fn graded<T: Real>(lo: T, hi: T, fastest: T) -> Vec<T> {
    let half = (hi - lo) * T::lit(0.5);
    let mut steps = Vec::new();
    if fastest > T::zero() {
        let mut s = T::lit(0.25) / fastest;
        while s < half * T::lit(0.5) {
            steps.push(s);
            s = s * T::lit(4.0);
        }
    }
    let mut pts = vec![lo];
    pts.extend(steps.iter().map(|&s| lo + s));
    pts.push(lo + half);
    pts.extend(steps.iter().rev().map(|&s| hi - s));
    pts.push(hi);
    pts
}

/// Collection of pieces with disjoint interiors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PiecewiseExp<T> {
    pieces: Vec<Piece<T>>,
}

impl<T: Real> PiecewiseExp<T> {
    pub fn new() -> Self {
        Self { pieces: Vec::new() }
    }

    /// Opens a new piece on `[lo, hi)`; empty intervals are still returned but never integrated.
    pub fn piece(&mut self, lo: T, hi: T) -> &mut Piece<T> {
        self.pieces.push(Piece { lo, hi, terms: Vec::new() });
        self.pieces.last_mut().unwrap()
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn extend(&mut self, other: PiecewiseExp<T>) {
        self.pieces.extend(other.pieces);
    }

    /// Density at `y`; pieces are half-open `[lo, hi)`.
    pub fn eval(&self, y: T) -> T {
        self.pieces
            .iter()
            .filter(|p| p.lo <= y && y < p.hi)
            .fold(T::zero(), |s, p| s + p.eval(y))
    }

    /// `∫ p(y) k(y) dy` in closed form.
    pub fn integrate_poly(&self, p: &Polynomial<T>) -> Result<T> {
        let mut total = T::zero();
        for pc in self.pieces.iter().filter(|pc| pc.hi > pc.lo) {
            let len = pc.length();
            let mut acc = cr(T::zero());
            for t in &pc.terms {
                let (shifted, mu) = if t.anchor == pc.lo {
                    (p.compose_affine(pc.lo, T::one()), t.rate)
                } else {
                    (p.compose_affine(pc.hi, -T::one()), -t.rate)
                };
                if !len.is_finite() && !(mu.re < T::zero()) {
                    return Err(Error::TailTruncation("non-decaying term on an unbounded piece".into()));
                }
                let mut s = cr(T::zero());
                for (k, &ck) in shifted.coeffs().iter().enumerate() {
                    if ck != T::zero() {
                        s = s + exp_moment(k, mu, len) * ck;
                    }
                }
                acc = acc + t.coef * s;
            }
            total += acc.re;
        }
        Ok(total)
    }

    /// Total mass `∫ k`.
    pub fn mass(&self) -> Result<T> {
        self.integrate_poly(&Polynomial::constant(T::one()))
    }

    /// `∫ g(y) k(y) dy` by adaptive quadrature, truncating unbounded pieces
    /// once the certified tail falls below `1e−12` of the running integral.
    pub fn integrate_fn<G: Fn(T) -> T>(&self, g: G, growth: Growth<T>) -> Result<T> {
        let opts = QuadOptions::default();
        let mut total = T::zero();
        for pc in self.pieces.iter().filter(|pc| pc.hi > pc.lo) {
            let fastest = pc.terms.iter().map(|t| t.rate.norm()).fold(T::zero(), T::max);
            if pc.lo.is_finite() && pc.hi.is_finite() {
                for w in graded(pc.lo, pc.hi, fastest).windows(2) {
                    total += integrate(|y| g(y) * pc.eval(y), w[0], w[1], opts)?;
                }
                continue;
            }
            // Map to t ≥ 0 measured from the finite end.
            let (end, dir) = if pc.lo.is_finite() { (pc.lo, T::one()) } else { (pc.hi, -T::one()) };
            let eps = pc
                .terms
                .iter()
                .map(|t| t.rate.re.abs())
                .fold(T::infinity(), T::min);
            if !(eps > T::zero()) || pc.terms.iter().any(|t| t.anchor != end) {
                return Err(Error::TailTruncation("unbounded piece without exponential decay".into()));
            }
            let cmag = pc.terms.iter().fold(T::zero(), |s, t| s + t.coef.norm());
            let n = growth.degree as i32;
            let kk = growth.k2 * if n == 0 { T::one() } else { T::lit(2.0).powi(n - 1) };
            let base = growth.k1 + kk * end.abs().powi(n);
            let tail = |m: T| -> T {
                let x = eps * m;
                // Γ(n+1, x) = n! e^{−x} Σ_{j≤n} x^j/j!
                let mut s = T::zero();
                let mut term = T::one();
                let mut fact = T::one();
                for j in 0..=n {
                    if j > 0 {
                        term = term * x / T::lit(j as f64);
                        fact *= T::lit(j as f64);
                    }
                    s += term;
                }
                let gamma = fact * (-x).exp() * s;
                cmag * (base * (-x).exp() / eps + kk * gamma / eps.powi(n + 1))
            };
            let f = |t: T| {
                let y = end + dir * t;
                g(y) * pc.eval(y)
            };
            let limit = T::lit(200.0) / eps;
            let rel = T::tol(1e-12, 4.0);
            let mut m = T::lit(8.0) / eps;
            let mut acc = T::zero();
            for w in graded(T::zero(), m, fastest).windows(2) {
                acc += integrate(&f, w[0], w[1], opts)?;
            }
            loop {
                let b = tail(m);
                if b <= rel * acc.abs() || (acc == T::zero() && b <= T::tol(1e-15, 4.0)) {
                    break;
                }
                let next = m + m;
                if next > limit {
                    return Err(Error::TailTruncation(format!(
                        "tail bound {b:e} not below tolerance before M = {limit}"
                    )));
                }
                acc += integrate(&f, m, next, opts)?;
                m = next;
            }
            total += acc;
        }
        Ok(total)
    }

    /// `∫ g k` for `g = h` (order 0) or `h'` (order 1).
    pub fn integrate_cost(&self, cost: &CostFunction<T>, order: u8) -> Result<T> {
        match cost.polynomial(order) {
            Some(p) => self.integrate_poly(&p),
            None => self.integrate_fn(|y| cost.eval(order, y), cost.growth()),
        }
    }
}
