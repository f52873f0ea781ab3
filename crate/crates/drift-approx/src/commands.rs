//! The four subcommands. Each writes its files plus a JSON manifest into the
//! configured output directory and returns whether everything succeeded.

use std::path::Path;

use anyhow::Result;
use drift_approx_core::fredholm::NystromSolution;
use drift_approx_core::{
    moment_integral, solve_first_kind_galerkin, solve_second_kind_nystrom, ConstantControl,
    Control, KernelProblem, McConfig,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{ensure_dir, fmt_f64, CsvTable, Manifest};
use crate::parallel;
use crate::tables::{self, galerkin_rule, TableReport};

/// Off-node points used for the residual diagnostic.
pub const RESIDUAL_POINTS: usize = 200;
/// The residual integral is taken on a rule this many times finer.
pub const RESIDUAL_REFINEMENT: usize = 4;

#[derive(Debug, Serialize)]
pub struct PenalizedDiagnostics {
    pub delta: f64,
    pub file: Option<String>,
    pub condition_estimate: Option<f64>,
    pub residual_max: Option<f64>,
    pub z_max: Option<f64>,
    pub error: Option<String>,
}

/// Points strictly between nodes, spread over `[0, T]`.
pub fn off_node_points(horizon: f64, count: usize) -> Vec<f64> {
    let golden = 0.618_033_988_749_894_9;
    (0..count)
        .map(|i| horizon * ((i as f64 + golden) / count as f64))
        .collect()
}

pub fn nystrom_residual(sol: &NystromSolution) -> Result<(f64, f64)> {
    let p = sol.problem();
    let pts = off_node_points(p.horizon(), RESIDUAL_POINTS);
    let z_max = pts
        .iter()
        .map(|&t| p.eval_z(t).map(f64::abs))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let r = sol.residual_max(&pts, RESIDUAL_REFINEMENT * sol.rule().panels())?;
    Ok((r, z_max))
}

pub fn solve_penalized(cfg: &ExperimentConfig) -> Result<bool> {
    let dir = ensure_dir(&cfg.output_dir)?;
    let problem = cfg.problem()?;
    let mut diags = Vec::new();
    let mut files = Vec::new();
    for (i, &delta) in cfg.delta_list.iter().enumerate() {
        let mut d = PenalizedDiagnostics {
            delta,
            file: None,
            condition_estimate: None,
            residual_max: None,
            z_max: None,
            error: None,
        };
        match solve_second_kind_nystrom(&problem, delta, cfg.n) {
            Ok(sol) => {
                let name = format!("penalized_{:02}.csv", i + 1);
                let mut t = CsvTable::new(["t", "u"]);
                for (x, u) in sol.nodes().iter().zip(sol.values()) {
                    t.push_numbers(&[*x, *u]);
                }
                t.write(&dir.join(&name))?;
                let (r, z) = nystrom_residual(&sol)?;
                d.condition_estimate = Some(sol.condition_estimate());
                d.residual_max = Some(r);
                d.z_max = Some(z);
                d.file = Some(name.clone());
                files.push(name);
            }
            Err(e) => d.error = Some(e.to_string()),
        }
        diags.push(d);
    }
    let ok = diags.iter().all(|d| d.error.is_none());
    let mut m = Manifest::new("solve-penalized", cfg, diags);
    m.files = files;
    m.success = ok;
    m.write(&dir.join("solve_penalized.json"))?;
    Ok(ok)
}

#[derive(Debug, Serialize)]
pub struct GalerkinDiagnostics {
    pub degree: usize,
    pub condition_estimate: Option<f64>,
    pub integral: Option<f64>,
    pub error: Option<String>,
}

/// Points used for the dense Galerkin evaluation.
pub const GALERKIN_EVAL_POINTS: usize = 601;

pub fn solve_galerkin(cfg: &ExperimentConfig) -> Result<bool> {
    let dir = ensure_dir(&cfg.output_dir)?;
    let problem = cfg.problem()?;
    let mut diag = GalerkinDiagnostics {
        degree: cfg.m,
        condition_estimate: None,
        integral: None,
        error: None,
    };
    let mut files = Vec::new();
    match solve_first_kind_galerkin(&problem, cfg.m) {
        Ok(g) => {
            let mut c = CsvTable::new(["n", "c_n"]);
            for (n, v) in g.coefficients().iter().enumerate() {
                c.push(vec![n.to_string(), fmt_f64(*v)]);
            }
            c.write(&dir.join("galerkin_coefficients.csv"))?;
            let mut e = CsvTable::new(["t", "u"]);
            let h = problem.horizon() / (GALERKIN_EVAL_POINTS - 1) as f64;
            for i in 0..GALERKIN_EVAL_POINTS {
                let t = if i + 1 == GALERKIN_EVAL_POINTS {
                    problem.horizon()
                } else {
                    i as f64 * h
                };
                e.push_numbers(&[t, g.eval(t)?]);
            }
            e.write(&dir.join("galerkin_values.csv"))?;
            files.push("galerkin_coefficients.csv".to_string());
            files.push("galerkin_values.csv".to_string());
            diag.condition_estimate = Some(g.condition_estimate());
            diag.integral = Some(moment_integral(&g, 0, &galerkin_rule(&problem)?)?);
        }
        Err(e) => diag.error = Some(e.to_string()),
    }
    let ok = diag.error.is_none();
    let mut m = Manifest::new("solve-galerkin", cfg, diag);
    m.files = files;
    m.success = ok;
    m.write(&dir.join("solve_galerkin.json"))?;
    Ok(ok)
}

#[derive(Debug, Serialize)]
pub struct CostRow {
    pub label: String,
    pub mean: Option<f64>,
    pub std_error: Option<f64>,
    pub accepted: Option<usize>,
    pub aborted: Option<usize>,
    pub error: Option<String>,
}

fn cost_row<C: Control + ?Sized>(
    label: String,
    problem: &KernelProblem,
    u: &C,
    mc: McConfig,
) -> CostRow {
    match parallel::estimate(problem, u, mc) {
        Ok(e) => CostRow {
            label,
            mean: Some(e.mean),
            std_error: Some(e.std_error),
            accepted: Some(e.n_traj),
            aborted: Some(e.aborted),
            error: None,
        },
        Err(err) => CostRow {
            label,
            mean: None,
            std_error: None,
            accepted: None,
            aborted: None,
            error: Some(err.to_string()),
        },
    }
}

/// Monte-Carlo cost of every penalised solution in the sweep, the Galerkin
/// solution and the expected value `u ≡ 1`, all with common random numbers.
pub fn estimate_cost(cfg: &ExperimentConfig) -> Result<bool> {
    let dir = ensure_dir(&cfg.output_dir)?;
    let problem = cfg.problem()?;
    let mc = McConfig::new(cfg.n, cfg.n_traj, cfg.seed);
    let mut rows = Vec::new();
    for &delta in &cfg.delta_list {
        let label = format!("delta={delta:e}");
        rows.push(match solve_second_kind_nystrom(&problem, delta, cfg.n) {
            Ok(sol) => cost_row(label, &problem, &sol, mc),
            Err(e) => failed_row(label, e.to_string()),
        });
    }
    let label = format!("galerkin_m={}", cfg.m);
    rows.push(match solve_first_kind_galerkin(&problem, cfg.m) {
        Ok(g) => cost_row(label, &problem, &g, mc),
        Err(e) => failed_row(label, e.to_string()),
    });
    rows.push(cost_row(
        "expected_value".into(),
        &problem,
        &ConstantControl::new(1.0, problem.horizon()),
        mc,
    ));

    let mut t = CsvTable::new(["label", "mean", "std_error", "accepted", "aborted"]);
    for r in &rows {
        t.push(vec![
            r.label.clone(),
            r.mean.map_or_else(|| "NaN".into(), fmt_f64),
            r.std_error.map_or_else(|| "NaN".into(), fmt_f64),
            r.accepted.map_or_else(String::new, |v| v.to_string()),
            r.aborted.map_or_else(String::new, |v| v.to_string()),
        ]);
    }
    t.write(&dir.join("costs.csv"))?;
    let ok = rows.iter().all(|r| r.error.is_none());
    let mut m = Manifest::new("estimate-cost", cfg, rows);
    m.files = vec!["costs.csv".into()];
    m.success = ok;
    m.write(&dir.join("estimate_cost.json"))?;
    Ok(ok)
}

fn failed_row(label: String, error: String) -> CostRow {
    CostRow {
        label,
        mean: None,
        std_error: None,
        accepted: None,
        aborted: None,
        error: Some(error),
    }
}

pub fn write_table(report: &TableReport, dir: &Path) -> Result<Vec<String>> {
    let id = report.id;
    let mut header = vec![report.row_label.clone()];
    header.extend(report.columns.iter().cloned());
    let mut grid = CsvTable::new(header);
    for (label, values) in &report.rows {
        let mut row = vec![label.clone()];
        row.extend(values.iter().map(|v| fmt_f64(*v)));
        grid.push(row);
    }
    let grid_name = format!("table{id}.csv");
    grid.write(&dir.join(&grid_name))?;

    let mut checks = CsvTable::new([
        "row",
        "column",
        "value",
        "reference",
        "abs_error",
        "tolerance",
        "status",
    ]);
    for c in &report.checks {
        checks.push(vec![
            c.row.clone(),
            c.column.clone(),
            fmt_f64(c.value),
            c.reference.map_or_else(String::new, fmt_f64),
            c.abs_error().map_or_else(String::new, fmt_f64),
            fmt_f64(c.tolerance),
            c.status.as_str().into(),
        ]);
    }
    let check_name = format!("table{id}_checks.csv");
    checks.write(&dir.join(&check_name))?;
    Ok(vec![grid_name, check_name])
}

#[derive(Debug, Serialize)]
pub struct TableDiagnostics {
    pub table: u8,
    pub passed: Option<bool>,
    pub report: Option<TableReport>,
    pub error: Option<String>,
}

pub fn reproduce_table(id: u8, cfg: &ExperimentConfig) -> Result<bool> {
    let dir = ensure_dir(&cfg.output_dir)?;
    let cfg = cfg.with_scenario(tables::table_scenario(id));
    let (diag, files) = match tables::reproduce(id, &cfg) {
        Ok(report) => {
            let files = write_table(&report, &dir)?;
            (
                TableDiagnostics {
                    table: id,
                    passed: Some(report.passed()),
                    report: Some(report),
                    error: None,
                },
                files,
            )
        }
        Err(e) => (
            TableDiagnostics {
                table: id,
                passed: None,
                report: None,
                error: Some(e.to_string()),
            },
            Vec::new(),
        ),
    };
    let ok = diag.passed == Some(true);
    let mut m = Manifest::new("reproduce-table", &cfg, diag);
    m.files = files;
    m.success = ok;
    m.write(&dir.join(format!("table{id}.json")))?;
    Ok(ok)
}
