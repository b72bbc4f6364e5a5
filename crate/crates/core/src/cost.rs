use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::PiecewiseExp;
use crate::poly::Polynomial;
use crate::scalar::Real;

/// Point of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Real> Extended<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Sign-preserving map `v ↦ s·(v − c)` with `s > 0`.
    pub fn affine(self, c: T, s: T) -> Self {
        match self {
            Extended::Finite(v) => Extended::Finite(s * (v - c)),
            other => other,
        }
    }
}

/// `|g(y)| ≤ k1 + k2 |y|^degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth<T> {
    pub degree: u32,
    pub k1: T,
    pub k2: T,
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub struct GenericCost<T> {
    h: ScalarFn<T>,
    dh: ScalarFn<T>,
    growth: Growth<T>,
}

#[derive(Clone)]
pub enum CostKind<T> {
    /// `α (y − shift)²`.
    Quadratic { alpha: T, shift: T },
    /// `α y + η`.
    Linear { alpha: T, eta: T },
    GenericConvex(GenericCost<T>),
}

impl<T: fmt::Debug> fmt::Debug for CostKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostKind::Quadratic { alpha, shift } => write!(f, "Quadratic {{ alpha: {alpha:?}, shift: {shift:?} }}"),
            CostKind::Linear { alpha, eta } => write!(f, "Linear {{ alpha: {alpha:?}, eta: {eta:?} }}"),
            CostKind::GenericConvex(g) => write!(f, "GenericConvex {{ growth: {:?} }}", g.growth),
        }
    }
}

/// Convex running cost `h` with derivative `h'`.
#[derive(Clone, Debug)]
pub struct CostFunction<T> {
    kind: CostKind<T>,
}

impl<T: Real> CostFunction<T> {
    pub fn quadratic(alpha: T, shift: T) -> Result<Self> {
        if !(alpha > T::zero()) || !shift.is_finite() {
            return Err(Error::InvalidCost(format!("quadratic needs alpha > 0, got {alpha}")));
        }
        Ok(Self { kind: CostKind::Quadratic { alpha, shift } })
    }

    pub fn linear(alpha: T, eta: T) -> Result<Self> {
        if !alpha.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidCost("linear coefficients must be finite".into()));
        }
        Ok(Self { kind: CostKind::Linear { alpha, eta } })
    }

    /// Generic convex cost. The growth constants must bound both `h` and `h'`.
    pub fn generic<H, D>(h: H, dh: D, growth: Growth<T>) -> Result<Self>
    where
        H: Fn(T) -> T + Send + Sync + 'static,
        D: Fn(T) -> T + Send + Sync + 'static,
    {
        let c = Self { kind: CostKind::GenericConvex(GenericCost { h: Arc::new(h), dh: Arc::new(dh), growth }) };
        c.validate()?;
        Ok(c)
    }

    pub fn kind(&self) -> &CostKind<T> {
        &self.kind
    }

    fn validate(&self) -> Result<()> {
        let mut prev = T::neg_infinity();
        for k in 0..100 {
            let x = T::lit(-10.0 + 20.0 * k as f64 / 99.0);
            let d = self.h_prime(x);
            if !d.is_finite() || d < prev - T::tol(1e-12, 64.0) * (T::one() + prev.abs()) {
                return Err(Error::InvalidCost(format!("h' decreases near {x}: not convex")));
            }
            prev = d;
        }
        let g = self.growth();
        for &x in &[-1000.0, -100.0, 50.0, 200.0, 1000.0] {
            let x = T::lit(x);
            let bound = g.k1 + g.k2 * x.abs().powi(g.degree as i32);
            if self.h(x).abs() > bound || self.h_prime(x).abs() > bound {
                return Err(Error::InvalidCost(format!("growth bound violated at {x}")));
            }
        }
        Ok(())
    }

    pub fn h(&self, x: T) -> T {
        match &self.kind {
            CostKind::Quadratic { alpha, shift } => *alpha * (x - *shift) * (x - *shift),
            CostKind::Linear { alpha, eta } => *alpha * x + *eta,
            CostKind::GenericConvex(g) => (g.h)(x),
        }
    }

    pub fn h_prime(&self, x: T) -> T {
        match &self.kind {
            CostKind::Quadratic { alpha, shift } => T::lit(2.0) * *alpha * (x - *shift),
            CostKind::Linear { alpha, .. } => *alpha,
            CostKind::GenericConvex(g) => (g.dh)(x),
        }
    }

    /// `h` (order 0) or `h'` (order 1) evaluated.
    pub fn eval(&self, order: u8, x: T) -> T {
        if order == 0 {
            self.h(x)
        } else {
            self.h_prime(x)
        }
    }

    /// Coefficients of `h` or `h'` when they are polynomials.
    pub fn polynomial(&self, order: u8) -> Option<Polynomial<T>> {
        let two = T::lit(2.0);
        match (&self.kind, order) {
            (CostKind::Quadratic { alpha, shift }, 0) => {
                Some(Polynomial::new(vec![*alpha * *shift * *shift, -two * *alpha * *shift, *alpha]))
            }
            (CostKind::Quadratic { alpha, shift }, _) => Some(Polynomial::new(vec![-two * *alpha * *shift, two * *alpha])),
            (CostKind::Linear { alpha, eta }, 0) => Some(Polynomial::new(vec![*eta, *alpha])),
            (CostKind::Linear { alpha, .. }, _) => Some(Polynomial::constant(*alpha)),
            (CostKind::GenericConvex(_), _) => None,
        }
    }

    pub fn growth(&self) -> Growth<T> {
        let two = T::lit(2.0);
        match &self.kind {
            CostKind::Quadratic { alpha, shift } => Growth {
                degree: 2,
                k1: two * *alpha * (*shift * *shift + shift.abs()) + two * *alpha,
                k2: two * *alpha + two * *alpha,
            },
            CostKind::Linear { alpha, eta } => Growth { degree: 1, k1: eta.abs() + alpha.abs(), k2: alpha.abs() },
            CostKind::GenericConvex(g) => g.growth,
        }
    }

    /// `(h'(−∞), h'(+∞))`; estimated from large arguments for generic costs.
    pub fn slope_limits(&self) -> (Extended<T>, Extended<T>) {
        match &self.kind {
            CostKind::Quadratic { .. } => (Extended::NegInf, Extended::PosInf),
            CostKind::Linear { alpha, .. } => (Extended::Finite(*alpha), Extended::Finite(*alpha)),
            CostKind::GenericConvex(g) => {
                let est = |sign: f64| {
                    let s6 = (g.dh)(T::lit(sign * 1e6));
                    let s8 = (g.dh)(T::lit(sign * 1e8));
                    if (s8 - s6).abs() <= T::lit(1e-9) * (T::one() + s8.abs()) {
                        Extended::Finite(s8)
                    } else if s8 > s6 {
                        Extended::PosInf
                    } else {
                        Extended::NegInf
                    }
                };
                (est(-1.0), est(1.0))
            }
        }
    }

    /// `y ↦ h(y − c)`.
    pub fn shifted(&self, c: T) -> Self {
        let kind = match &self.kind {
            CostKind::Quadratic { alpha, shift } => CostKind::Quadratic { alpha: *alpha, shift: *shift + c },
            CostKind::Linear { alpha, eta } => CostKind::Linear { alpha: *alpha, eta: *eta - *alpha * c },
            CostKind::GenericConvex(g) => {
                let (h, dh) = (g.h.clone(), g.dh.clone());
                let gr = g.growth;
                let n = gr.degree as i32;
                let scale = if n == 0 { T::one() } else { T::lit(2.0).powi(n - 1) };
                CostKind::GenericConvex(GenericCost {
                    h: Arc::new(move |y| h(y - c)),
                    dh: Arc::new(move |y| dh(y - c)),
                    growth: Growth {
                        degree: gr.degree,
                        k1: gr.k1 + gr.k2 * scale * c.abs().powi(n),
                        k2: gr.k2 * scale,
                    },
                })
            }
        };
        Self { kind }
    }

    /// `∫_0^∞ g(y + b) e^{−a y} dy` with `g = h` (order 0) or `h'` (order 1).
    pub fn tail_integral(&self, order: u8, b: T, a: T) -> Result<T> {
        if !(a > T::zero()) {
            return Err(Error::InvalidParameter { name: "a", reason: "decay rate must be positive".into() });
        }
        let mut k = PiecewiseExp::new();
        k.piece(b, T::infinity()).push_real(T::one(), -a, b);
        k.integrate_cost(self, order)
    }
}
