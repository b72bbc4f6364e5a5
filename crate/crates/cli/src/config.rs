//! Run configuration: TOML with `model`, `problem`, `command` and `output` blocks.

use serde::{Deserialize, Serialize};

use refraction_core::{default_delta_grid, CostFunction, LevyModel, PhaseTypeLaw, RefractionProblem, ReflectionProblem};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub problem: ProblemBlock,
    pub command: CommandBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub gamma_tilde: f64,
    pub sigma: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_type: Option<PhaseTypeBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseTypeBlock {
    pub alpha: Vec<f64>,
    #[serde(rename = "T")]
    pub t: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub q: f64,
    pub delta: f64,
    pub beta: f64,
    pub cost: CostSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    /// `h(y) = α (y − shift)²`
    Quadratic {
        alpha: f64,
        #[serde(default)]
        shift: f64,
    },
    /// `h(y) = α y + η`
    Linear { alpha: f64, eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Solve,
    Curve,
    Convergence,
    Simulate,
    Check,
    Scale,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Solve => "solve",
            CommandName::Curve => "curve",
            CommandName::Convergence => "convergence",
            CommandName::Simulate => "simulate",
            CommandName::Check => "check",
            CommandName::Scale => "scale",
        }
    }
}

/// Either an explicit list or `{ start, stop, points }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64).collect(),
            },
        }
    }
}

fn default_offsets() -> Vec<f64> {
    vec![-1.0, -0.5, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandBlock {
    pub name: CommandName,
    pub x_grid: Grid,
    #[serde(default = "default_offsets")]
    pub b_offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub mc: McBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
    /// Number of paths written to `paths.csv` by `simulate`.
    #[serde(default)]
    pub dump_paths: usize,
    /// Simulation horizon; `ln(1e6)/q` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Starting points for `simulate`; `command.x_grid` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

impl Default for McBlock {
    fn default() -> Self {
        Self { n_paths: 10_000, dt: 1e-3, seed: 1, antithetic: false, dump_paths: 0, horizon: None, x0: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub directory: String,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: "out".into(), formats: all_formats() }
    }
}

impl OutputBlock {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

fn fault(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| fault(&path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks every block and builds the model objects once so that
    /// module-level invariants surface as field diagnostics.
    pub fn validate(&self) -> Result<(), CliError> {
        let c = &self.command;
        let xs = c.x_grid.values();
        if xs.is_empty() {
            return Err(fault("command.x_grid", "must not be empty"));
        }
        if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
            return Err(fault("command.x_grid", format!("non-finite entry {x}")));
        }
        if let Some(o) = c.b_offsets.iter().find(|x| !x.is_finite()) {
            return Err(fault("command.b_offsets", format!("non-finite entry {o}")));
        }
        if let Some(d) = &c.delta_grid {
            if d.is_empty() {
                return Err(fault("command.delta_grid", "must not be empty when given"));
            }
            if let Some(v) = d.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
                return Err(fault("command.delta_grid", format!("entries must be positive, got {v}")));
            }
        }
        if let Some(x0) = &c.mc.x0 {
            if x0.is_empty() || x0.iter().any(|x| !x.is_finite()) {
                return Err(fault("command.mc.x0", "must be a non-empty list of finite numbers"));
            }
        }
        if let Some(h) = c.mc.horizon {
            if !(self.problem.q * h >= 13.8) || !h.is_finite() {
                return Err(fault("command.mc.horizon", format!("need q·horizon ≥ 13.8, got {}", self.problem.q * h)));
            }
        }
        if c.mc.n_paths < 2 {
            return Err(fault("command.mc.n_paths", "need at least two paths"));
        }
        if !(c.mc.dt > 0.0) || !c.mc.dt.is_finite() {
            return Err(fault("command.mc.dt", format!("must be positive, got {}", c.mc.dt)));
        }
        if self.output.directory.is_empty() {
            return Err(fault("output.directory", "must not be empty"));
        }
        if self.output.formats.is_empty() {
            return Err(fault("output.formats", "must list at least one of json, csv"));
        }
        self.refraction_problem()?;
        if c.name == CommandName::Convergence {
            self.reflection_problem()?;
        }
        Ok(())
    }

    pub fn levy_model(&self) -> Result<LevyModel<f64>, CliError> {
        let m = &self.model;
        let jumps = match (&m.phase_type, m.kappa > 0.0) {
            (Some(pt), _) => Some(PhaseTypeLaw::new(pt.alpha.clone(), &pt.t).map_err(|e| fault("model.phase_type", e))?),
            (None, true) => return Err(fault("model.phase_type", "required when kappa > 0")),
            (None, false) => None,
        };
        LevyModel::new(m.gamma_tilde, m.sigma, m.kappa, jumps).map_err(|e| fault("model", e))
    }

    pub fn cost(&self) -> Result<CostFunction<f64>, CliError> {
        match self.problem.cost {
            CostSpec::Quadratic { alpha, shift } => CostFunction::quadratic(alpha, shift),
            CostSpec::Linear { alpha, eta } => CostFunction::linear(alpha, eta),
        }
        .map_err(|e| fault("problem.cost", e))
    }

    pub fn refraction_problem(&self) -> Result<RefractionProblem<f64>, CliError> {
        let p = &self.problem;
        RefractionProblem::new(self.levy_model()?, p.delta, p.q, p.beta, self.cost()?).map_err(|e| match e {
            refraction_core::Error::InvalidParameter { name, reason } => fault(&format!("problem.{name}"), reason),
            other => CliError::Numeric(other),
        })
    }

    /// Reflection limit with `Y = X − δt` held fixed and `β̃ = −β`.
    pub fn reflection_problem(&self) -> Result<ReflectionProblem<f64>, CliError> {
        let p = &self.problem;
        let x = self.levy_model()?;
        let y = x.with_drift(x.gamma_tilde() - p.delta).map_err(|e| fault("problem.delta", e))?;
        ReflectionProblem::new(y, p.q, -p.beta, self.cost()?).map_err(|e| fault("problem.cost", e))
    }

    pub fn mc_starts(&self) -> Vec<f64> {
        self.command.mc.x0.clone().unwrap_or_else(|| self.command.x_grid.values())
    }

    pub fn delta_grid(&self) -> Vec<f64> {
        self.command.delta_grid.clone().unwrap_or_else(default_delta_grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
gamma_tilde = 1.0
sigma = 1.4142135623730951

[problem]
q = 2.0
delta = 0.5
beta = 0.1
cost = { kind = "quadratic", params = { alpha = 1.0 } }

[command]
name = "solve"
x_grid = { start = -1.0, stop = 1.0, points = 5 }
"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.command.x_grid.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(c.problem.cost, CostSpec::Quadratic { alpha: 1.0, shift: 0.0 });
        assert_eq!(c.command.b_offsets, default_offsets());
        assert_eq!(c.output, OutputBlock::default());
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn field_diagnostics() {
        let empty = MINIMAL.replace("{ start = -1.0, stop = 1.0, points = 5 }", "[]");
        let e = RunConfig::from_toml(&empty).unwrap_err().to_string();
        assert!(e.contains("command.x_grid"), "{e}");
        let bad_q = MINIMAL.replace("q = 2.0", "q = -2.0");
        assert!(RunConfig::from_toml(&bad_q).unwrap_err().to_string().contains("problem.q"));
        let jumps = MINIMAL.replace("sigma = 1.4142135623730951", "sigma = 1.0\nkappa = 1.0");
        assert!(RunConfig::from_toml(&jumps).unwrap_err().to_string().contains("model.phase_type"));
        let typo = MINIMAL.replace("beta = 0.1", "beta = 0.1\nbetta = 2");
        let e = RunConfig::from_toml(&typo).unwrap_err().to_string();
        assert!(e.contains("betta") && e.contains("line"), "{e}");
    }
}
