//! Optimal refraction strategies for spectrally negative Lévy processes with
//! Brownian part and phase-type jumps.

pub mod cost;
pub mod eigen;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod presets;
pub mod quadrature;
pub mod reflection;
pub mod refraction;
pub mod roots;
pub mod scalar;
pub mod scale;

pub use cost::{CostFunction, CostKind, Extended, Growth};
pub use error::{Error, Result};
pub use kernel::PiecewiseExp;
pub use model::{LevyModel, PhaseTypeLaw, RationalExponent, Variation};
pub use poly::Polynomial;
pub use reflection::{default_delta_grid, ConvergenceTable, ReflectionProblem, SweepRow};
pub use refraction::{
    verify_solution, BStar, CheckOutcome, RefractionProblem, RefractionSolution, Resolvent, ThresholdSearch,
    VerificationReport,
};
pub use scalar::Real;
pub use scale::{build_scale, laplace_residual, ExpSumFunction, ExpTerm, Process, ScaleSet};

pub type LevyModel64 = LevyModel<f64>;
pub type LevyModel32 = LevyModel<f32>;
pub type PhaseTypeLaw64 = PhaseTypeLaw<f64>;
pub type PhaseTypeLaw32 = PhaseTypeLaw<f32>;
pub type CostFunction64 = CostFunction<f64>;
pub type CostFunction32 = CostFunction<f32>;
pub type ScaleSet64 = ScaleSet<f64>;
pub type ScaleSet32 = ScaleSet<f32>;
pub type RefractionProblem64 = RefractionProblem<f64>;
pub type RefractionProblem32 = RefractionProblem<f32>;
pub type RefractionSolution64 = RefractionSolution<f64>;
pub type RefractionSolution32 = RefractionSolution<f32>;
pub type ReflectionProblem64 = ReflectionProblem<f64>;
pub type ReflectionProblem32 = ReflectionProblem<f32>;
