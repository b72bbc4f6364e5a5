//! Command dispatch and artifact writers.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use refraction_core::refraction::{CHECK_CONVEXITY, CHECK_DOMINANCE, CHECK_INEQUALITIES, CHECK_SMOOTH_FIT};
use refraction_core::{
    laplace_residual, verify_solution, BStar, Extended, RefractionProblem, RefractionSolution, VerificationReport,
};
use refraction_sim::{SimConfig, Simulator};

use crate::config::{CommandName, Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: CommandName,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Sink<'a> {
    dir: &'a Path,
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
}

impl Sink<'_> {
    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        if self.cfg.output.wants(Format::Json) {
            let p = self.dir.join(name);
            std::fs::write(&p, serde_json::to_string_pretty(v)? + "\n")?;
            self.files.push(p);
        }
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        if self.cfg.output.wants(Format::Csv) {
            let p = self.dir.join(name);
            let mut w = csv::Writer::from_path(&p)?;
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
            self.files.push(p);
        }
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn b_star_json(b: BStar<f64>) -> Value {
    match b {
        BStar::Finite(v) => json!(v),
        BStar::PosInf => json!("+inf"),
        BStar::NegInf => json!("-inf"),
        BStar::Indifferent => json!("indifferent"),
    }
}

fn report_json(r: &VerificationReport<f64>) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "passed": c.passed, "worst": c.worst, "violations": c.violations }))
        .collect();
    Value::Array(checks)
}

/// Runs the configured command, writing artifacts into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    let mut sink = Sink { dir: out, cfg, files: Vec::new() };
    let name = cfg.command.name;
    let summary = match name {
        CommandName::Solve => solve(cfg, &mut sink)?,
        CommandName::Curve => curve(cfg, &mut sink)?,
        CommandName::Convergence => convergence(cfg, &mut sink)?,
        CommandName::Simulate => simulate(cfg, &mut sink)?,
        CommandName::Check => check(cfg, &mut sink)?,
        CommandName::Scale => scale(cfg, &mut sink)?,
    };
    Ok(RunReport { command: name, files: sink.files, summary })
}

fn solved(cfg: &RunConfig) -> Result<(RefractionProblem<f64>, RefractionSolution<f64>), CliError> {
    let p = cfg.refraction_problem()?;
    let s = p.solve()?;
    Ok((p, s))
}

fn value_rows(s: &RefractionSolution<f64>, xs: &[f64]) -> Result<Vec<(f64, f64, f64)>, CliError> {
    xs.iter().map(|&x| Ok((x, s.value(x)?, s.derivative(x)?))).collect()
}

fn solve(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let (p, s) = solved(cfg)?;
    let xs = cfg.command.x_grid.values();
    let report = verify_solution(&p, &s, &xs)?;
    let rows = value_rows(&s, &xs)?;
    let doc = json!({
        "b_star": b_star_json(s.b_star),
        "zero_set": s.zero_set,
        "smooth_fit_residual": report.smooth_fit_residual,
        "checks": report_json(&report),
        "value_grid": rows.iter().map(|&(x, v, d)| json!({ "x": x, "v": v, "dv": d })).collect::<Vec<_>>(),
    });
    sink.json("solution.json", &doc)?;
    let header = ["x", "v", "dv"].map(String::from);
    let body: Vec<Vec<String>> = rows.iter().map(|&(x, v, d)| vec![num(x), num(v), num(d)]).collect();
    sink.csv("solution_values.csv", &header, &body)?;
    Ok(format!(
        "b* = {}, smooth-fit residual = {}",
        b_star_json(s.b_star),
        report.smooth_fit_residual.map_or("n/a".to_string(), |r| format!("{r:.3e}"))
    ))
}

fn curve(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let (p, s) = solved(cfg)?;
    let xs = cfg.command.x_grid.values();
    let offsets = match s.b_star.level() {
        Extended::Finite(_) => cfg.command.b_offsets.clone(),
        _ => Vec::new(),
    };
    let base = s.b_star.level().finite().unwrap_or(0.0);
    let mut header: Vec<String> = ["x", "v_bstar", "dv_bstar"].map(String::from).to_vec();
    header.extend(offsets.iter().map(|o| format!("v_b{o:+}")));
    let mut body = Vec::with_capacity(xs.len());
    for &x in &xs {
        let mut row = vec![num(x), num(s.value(x)?), num(s.derivative(x)?)];
        for o in &offsets {
            row.push(num(p.value_v_b(Extended::Finite(base + o), x)?));
        }
        body.push(row);
    }
    sink.csv("curve.csv", &header, &body)?;
    Ok(format!("b* = {}, {} rows, offsets {:?}", b_star_json(s.b_star), xs.len(), offsets))
}

fn convergence(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let r = cfg.reflection_problem()?;
    let xs = cfg.command.x_grid.values();
    let deltas = cfg.delta_grid();
    let t = r.convergence_sweep(&deltas, &xs)?;
    let header = ["delta", "b_star", "delta_phi_q", "delta_W_at_1"].map(String::from);
    let body: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|row| vec![num(row.delta), num(row.b_star), num(row.delta_phi_q), num(row.delta_w_at_1)])
        .collect();
    sink.csv("convergence_thresholds.csv", &header, &body)?;
    let header = ["delta", "x", "v_tilde"].map(String::from);
    let mut body = Vec::new();
    for row in &t.rows {
        for (x, v) in xs.iter().zip(&row.v_tilde) {
            body.push(vec![num(row.delta), num(*x), num(*v)]);
        }
    }
    for (x, v) in xs.iter().zip(&t.v_tilde_inf) {
        body.push(vec!["inf".into(), num(*x), num(*v)]);
    }
    sink.csv("convergence_values.csv", &header, &body)?;
    let monotone = t.rows.windows(2).all(|w| w[1].b_star <= w[0].b_star);
    let doc = json!({
        "b_star_inf": t.b_star_inf,
        "b_star_monotone_decreasing": monotone,
        "rows": t.rows.iter().map(|row| json!({
            "delta": row.delta,
            "b_star": row.b_star,
            "delta_phi_q": row.delta_phi_q,
            "delta_W_at_1": row.delta_w_at_1,
        })).collect::<Vec<_>>(),
    });
    sink.json("convergence.json", &doc)?;
    let last = t.rows.last().map_or(f64::NAN, |r| r.b_star);
    Ok(format!("b*(inf) = {}, b*(delta = {}) = {last}", t.b_star_inf, deltas.last().copied().unwrap_or(f64::NAN)))
}

fn sim_config(cfg: &RunConfig) -> SimConfig {
    let mc = &cfg.command.mc;
    let base = SimConfig::new(cfg.problem.q, mc.n_paths, mc.seed);
    SimConfig {
        dt: mc.dt,
        horizon: mc.horizon.unwrap_or(base.horizon),
        n_paths: mc.n_paths,
        base_seed: mc.seed,
        antithetic: mc.antithetic,
    }
}

fn simulate(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let (p, s) = solved(cfg)?;
    let sc = sim_config(cfg);
    let sim = Simulator::new(&p);
    let level = s.b_star.level();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    let starts = cfg.mc_starts();
    for &x in &starts {
        let e = sim.estimate_npv(level, x, &sc)?;
        let analytic = s.value(x)?;
        let z = (e.mean - analytic).abs() / (e.stderr + e.tail_bound);
        worst = worst.max(z);
        rows.push(json!({
            "x": x, "mean": e.mean, "stderr": e.stderr, "n": e.n, "tail_bound": e.tail_bound,
            "analytic": analytic, "deviation_in_se": z,
        }));
    }
    let doc = json!({
        "b_star": b_star_json(s.b_star),
        "dt": sc.dt, "horizon": sc.horizon, "n_paths": sc.n_paths, "seed": sc.base_seed, "antithetic": sc.antithetic,
        "estimates": rows,
    });
    sink.json("estimate.json", &doc)?;
    let dump = cfg.command.mc.dump_paths;
    if dump > 0 {
        let x0 = starts[0];
        let mut body = Vec::new();
        for i in 0..dump {
            let trace = sim.path_trace(level, x0, &sc, i as u64);
            let stride = (trace.len() / 2000).max(1);
            for (t, u) in trace.into_iter().step_by(stride) {
                body.push(vec![i.to_string(), num(t), num(u)]);
            }
        }
        sink.csv("paths.csv", &["path", "t", "u"].map(String::from), &body)?;
    }
    Ok(format!("{} estimates, worst |mc − analytic| = {worst:.2} (stderr + tail)", starts.len()))
}

fn check(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let (p, s) = solved(cfg)?;
    let xs = cfg.command.x_grid.values();
    let sc = p.scale();
    let mut results: Vec<(String, bool, f64)> = Vec::new();

    let grid = |lo: f64| (0..50).map(|k| lo + 0.1 + 0.1 * k as f64).collect::<Vec<_>>();
    let q = p.q();
    let rx = laplace_residual(&sc.w, |t| Ok(p.model_x().psi(t)? - q), &grid(sc.phi_q))?;
    let ry = laplace_residual(&sc.wd, |t| Ok(p.model_y().psi(t)? - q), &grid(sc.varphi_q))?;
    results.push(("laplace_residual".into(), rx.max(ry) <= 1e-8, rx.max(ry)));

    let wh = (sc.w.laplace(sc.varphi_q) - 1.0 / (sc.varphi_q * p.delta())).abs();
    results.push(("wiener_hopf_identity".into(), wh <= 1e-9, wh));

    let level = s.b_star.level();
    let mut mass_err: f64 = 0.0;
    for &x in &xs {
        mass_err = mass_err.max((p.resolvent(level, x).mass()? - 1.0 / q).abs());
    }
    results.push(("resolvent_mass".into(), mass_err <= 1e-7, mass_err));

    let is: Vec<f64> = xs.iter().map(|&b| p.i_of_b(b)).collect::<Result<_, _>>()?;
    let mut sorted: Vec<(f64, f64)> = xs.iter().copied().zip(is).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let drop = sorted.windows(2).map(|w| w[0].1 - w[1].1).fold(0.0f64, f64::max);
    results.push(("threshold_function_monotone".into(), drop <= 1e-10, drop));

    let report = verify_solution(&p, &s, &xs)?;
    for name in [CHECK_INEQUALITIES, CHECK_SMOOTH_FIT, CHECK_CONVEXITY, CHECK_DOMINANCE] {
        if let Some(c) = report.check(name) {
            results.push((name.to_string(), c.passed, c.worst));
        }
    }

    let failed: Vec<&str> = results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect();
    let doc = json!({
        "b_star": b_star_json(s.b_star),
        "passed": failed.is_empty(),
        "checks": results.iter().map(|(n, ok, w)| json!({ "name": n, "passed": ok, "worst": w })).collect::<Vec<_>>(),
    });
    sink.json("check.json", &doc)?;
    if failed.is_empty() {
        Ok(format!("{} checks passed", results.len()))
    } else {
        Err(CliError::CheckFailed(failed.join(", ")))
    }
}

fn scale(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let p = cfg.refraction_problem()?;
    let sc = p.scale();
    let header = ["x", "W", "dW", "Theta", "Z", "Zbar"].map(String::from);
    let mut body = Vec::new();
    for x in cfg.command.x_grid.values() {
        let theta = if x >= 0.0 { sc.theta_kernel(x)? } else { 0.0 };
        let (z, zb) = sc.z_functions(x);
        body.push(vec![num(x), num(sc.w.eval(x, 0)), num(sc.w.eval(x, 1)), num(theta), num(z), num(zb)]);
    }
    sink.csv("scale.csv", &header, &body)?;
    Ok(format!("Phi(q) = {}, varphi(q) = {}", sc.phi_q, sc.varphi_q))
}
