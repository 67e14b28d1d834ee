//! Analytic-vs-simulation validation and the lambda grid search.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ehrelay_core::model::SystemParams;

use crate::config::{Axis, ExperimentConfig, Method};
use crate::error::{CliError, Result};
use crate::sweep::{self, format_number, SweepResult};

/// Agreement threshold in units of the simulation's standard error.
pub const SIGMA_MULTIPLE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub axis: f64,
    pub method: String,
    pub analytic: f64,
    pub mc: f64,
    pub std_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub verdicts: Vec<Verdict>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.pass).count()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for v in &self.verdicts {
            let _ = writeln!(
                s,
                "{} axis={} method={} analytic={} mc={} std_err={} |diff|/std_err={:.3}",
                if v.pass { "PASS" } else { "FAIL" },
                format_number(v.axis),
                v.method,
                format_number(v.analytic),
                format_number(v.mc),
                format_number(v.std_err),
                diff_ratio(v),
            );
        }
        let _ = writeln!(
            s,
            "{} of {} comparisons within {SIGMA_MULTIPLE} std_err",
            self.verdicts.len() - self.failures(),
            self.verdicts.len()
        );
        s
    }
}

fn diff_ratio(v: &Verdict) -> f64 {
    let d = (v.analytic - v.mc).abs();
    if d == 0.0 {
        0.0
    } else {
        d / v.std_err
    }
}

/// Compares every exact analytic row against the simulation row at the same
/// axis point.
pub fn compare(result: &SweepResult) -> Result<ValidationReport> {
    let exact: Vec<&str> = Method::ALL.iter().filter(|m| m.is_exact()).map(|m| m.name()).collect();
    let mut verdicts = Vec::new();
    for mc in result.rows.iter().filter(|r| r.method == "mc") {
        let std_err = mc.std_err.unwrap_or(0.0);
        for row in result
            .rows
            .iter()
            .filter(|r| r.axis == mc.axis && exact.contains(&r.method.as_str()))
        {
            let diff = (row.value - mc.value).abs();
            verdicts.push(Verdict {
                axis: row.axis,
                method: row.method.clone(),
                analytic: row.value,
                mc: mc.value,
                std_err,
                pass: diff <= SIGMA_MULTIPLE * std_err,
            });
        }
    }
    if verdicts.is_empty() {
        return Err(CliError::Config(
            "validate needs mc and at least one of exact_quadrature, capacity_quadrature, capacity_series".into(),
        ));
    }
    Ok(ValidationReport { verdicts })
}

pub fn validate(cfg: &ExperimentConfig) -> Result<(SweepResult, ValidationReport)> {
    validate_with(cfg, &|p| *p)
}

/// As [`validate`], with the analytic side evaluated at `analytic_params`.
pub fn validate_with(
    cfg: &ExperimentConfig,
    analytic_params: &dyn Fn(&SystemParams) -> SystemParams,
) -> Result<(SweepResult, ValidationReport)> {
    if !cfg.methods.contains(&Method::Mc) || !cfg.methods.iter().any(|m| m.is_exact()) {
        return Err(CliError::Config(
            "validate needs mc and at least one of exact_quadrature, capacity_quadrature, capacity_series".into(),
        ));
    }
    let result = sweep::run_sweep_with(cfg, analytic_params)?;
    let report = compare(&result)?;
    Ok((result, report))
}

/// `fig1.csv` becomes `fig1.validation.txt`.
pub fn report_path(csv: &Path) -> PathBuf {
    csv.with_extension("validation.txt")
}

pub fn write_report(report: &ValidationReport, csv: &Path) -> Result<PathBuf> {
    let path = report_path(csv);
    std::fs::write(&path, report.render()).map_err(CliError::io(&path))?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStar {
    pub lambda: f64,
    pub value: f64,
    pub method: String,
    /// Grid neighbours of the maximizer (the maximizer itself at an edge).
    pub bracket: (f64, f64),
    /// Grid points attaining the maximum.
    pub ties: usize,
    pub flat: bool,
}

/// Relative spread below which the grid counts as flat.
pub const FLAT_TOL: f64 = 1e-12;

/// Grid argmax of a single analytic method over a lambda sweep. Ties go to the
/// smallest lambda.
pub fn find_lambda_star(cfg: &ExperimentConfig) -> Result<LambdaStar> {
    if cfg.sweep_axis != Axis::Lambda {
        return Err(CliError::Config(format!(
            "lambda-star needs sweep_axis = \"lambda\", got \"{}\"",
            cfg.sweep_axis.name()
        )));
    }
    let analytic: Vec<Method> = cfg.methods.iter().copied().filter(|m| *m != Method::Mc).collect();
    let method = match analytic.as_slice() {
        [m] if *m != Method::CapacityBounds => *m,
        _ => {
            return Err(CliError::Config(
                "lambda-star needs exactly one analytic method other than capacity_bounds".into(),
            ))
        }
    };
    let mut single = cfg.clone();
    single.methods = vec![method];
    let result = sweep::run_sweep(&single)?;
    let grid: Vec<(f64, f64)> = result.rows.iter().map(|r| (r.axis, r.value)).collect();
    Ok(argmax(&grid, method.name()))
}

fn argmax(grid: &[(f64, f64)], method: &str) -> LambdaStar {
    let mut best = 0;
    for (i, &(_, v)) in grid.iter().enumerate() {
        if v > grid[best].1 {
            best = i;
        }
    }
    let (lambda, value) = grid[best];
    let ties = grid.iter().filter(|g| g.1 == value).count();
    let min = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let flat = value - min <= FLAT_TOL * value.abs().max(1.0);
    if flat {
        log::warn!("{method} is flat over the lambda grid; reporting the first point");
    } else if ties > 1 {
        log::warn!("{method} attains its maximum at {ties} grid points; reporting the first");
    }
    let lo = grid[best.saturating_sub(1)].0;
    let hi = grid[(best + 1).min(grid.len() - 1)].0;
    LambdaStar {
        lambda,
        value,
        method: method.to_string(),
        bracket: (lo, hi),
        ties,
        flat,
    }
}
