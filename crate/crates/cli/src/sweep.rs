//! Sweep execution and CSV input/output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use ehrelay_core::analytic::{self, IntegralMethod, JMethod};
use ehrelay_core::mc;
use ehrelay_core::model::{NonCoopBaseline, SystemParams};
use ehrelay_core::specfun::SeriesControl;

use crate::config::{ExperimentConfig, Method, Metric, Point};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis: f64,
    pub method: String,
    pub value: f64,
    /// Present only for simulated rows.
    pub std_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<Row>,
    /// `(key, value)` lines written as `#` comments ahead of the table.
    pub metadata: Vec<(String, String)>,
    pub wall_time_s: f64,
}

/// Run a sweep with the analytic evaluators seeing the same parameters as the simulator.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, &|p| *p)
}

/// Run a sweep with `analytic_params` applied to the parameters of every
/// analytic evaluation (the simulator always sees the configured ones).
pub fn run_sweep_with(cfg: &ExperimentConfig, analytic_params: &dyn Fn(&SystemParams) -> SystemParams) -> Result<SweepResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rows = Vec::new();
    for x in cfg.axis_values() {
        let point = cfg.point(x)?;
        for &method in &cfg.methods {
            let fail = |source| CliError::Numerical {
                axis: cfg.sweep_axis.name(),
                value: x,
                method: method.name().to_string(),
                source,
            };
            let mut analytic_point = point;
            analytic_point.params = analytic_params(&point.params);
            for (name, value, std_err) in evaluate(cfg, &point, &analytic_point, method).map_err(fail)? {
                rows.push(Row {
                    axis: x,
                    method: name,
                    value,
                    std_err,
                });
            }
        }
    }
    Ok(SweepResult {
        rows,
        metadata: metadata(cfg),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

type Values = Vec<(String, f64, Option<f64>)>;

fn one(method: Method, v: f64) -> Values {
    vec![(method.name().to_string(), v, None)]
}

fn evaluate(
    cfg: &ExperimentConfig,
    sim: &Point,
    pt: &Point,
    method: Method,
) -> ehrelay_core::Result<Values> {
    let (p, t) = (&pt.params, &pt.targets);
    let seed = cfg.seed;
    Ok(match (cfg.metric, method) {
        (Metric::Outage, Method::Mc) => {
            let e = mc::estimate_outage(&sim.params, &sim.targets, cfg.mc_n, seed)?;
            vec![("mc".into(), e.mean, Some(e.std_err))]
        }
        (Metric::Outage, Method::ExactQuadrature) => {
            one(method, analytic::outage_exact(p, t, IntegralMethod::Quadrature)?)
        }
        (Metric::Outage, Method::ExactTaylor) => one(method, analytic::outage_exact(p, t, IntegralMethod::Taylor)?),
        (Metric::Outage, Method::LowerBound) => one(method, analytic::outage_bounds(p, t)?.lower),
        (Metric::Outage, Method::UpperBound) => one(method, analytic::outage_bounds(p, t)?.upper),
        (Metric::Outage, Method::HighSnr) => one(method, analytic::outage_high_snr(p, t)),
        (Metric::Outage, Method::NonCoop) => one(method, NonCoopBaseline::new(p).outage(t)),
        (Metric::Capacity, Method::Mc) => {
            let e = mc::estimate_capacity(&sim.params, cfg.mc_n, seed)?;
            vec![("mc".into(), e.mean, Some(e.std_err))]
        }
        (Metric::Capacity, Method::CapacityQuadrature) => one(method, analytic::capacity_quadrature(p)?),
        (Metric::Capacity, Method::CapacitySeries) => one(
            method,
            analytic::capacity_series(p, &SeriesControl::default(), JMethod::Quadrature)?.value,
        ),
        (Metric::Capacity, Method::CapacityBounds) => {
            let b = analytic::capacity_bounds(p)?;
            vec![
                ("capacity_lower_bound".into(), b.lower, None),
                ("capacity_tight_upper".into(), b.tight_upper, None),
                ("capacity_loose_upper".into(), b.loose_upper, None),
            ]
        }
        (Metric::Capacity, Method::NonCoop) => one(method, NonCoopBaseline::new(p).capacity()?),
        (Metric::Diversity, Method::Mc) => {
            let gamma_db = 10.0 * sim.gamma.log10();
            let d = mc::estimate_diversity_fd(&sim.params, sim.r, gamma_db, cfg.delta_db, cfg.mc_n, seed)?;
            vec![("mc".into(), d.value, Some(d.std_err))]
        }
        (Metric::Diversity, Method::Dmt) => one(method, analytic::dmt(pt.r, pt.gamma, p)?),
        (metric, method) => unreachable!("{method} for {metric:?} passed validation"),
    })
}

fn metadata(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut m = vec![
        ("generator".to_string(), format!("ehrelay {}", env!("CARGO_PKG_VERSION"))),
        ("seed".to_string(), cfg.seed.to_string()),
        ("mc_n".to_string(), cfg.mc_n.to_string()),
        ("axis".to_string(), cfg.sweep_axis.name().to_string()),
        ("metric".to_string(), format!("{:?}", cfg.metric).to_lowercase()),
    ];
    if cfg.methods.contains(&Method::NonCoop) {
        m.push((
            "non_coop".to_string(),
            "direct link, one half-duplex slot per direction (modeling convention)".to_string(),
        ));
    }
    for line in cfg.echo().lines() {
        m.push(("config".to_string(), line.to_string()));
    }
    m
}

/// 12 significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.11e}")
}

pub const HEADER: [&str; 4] = ["axis", "method", "value", "std_err"];

/// Writes the CSV (`#` metadata lines, header, one row per axis point and
/// method). Wall time goes to a `.meta` sidecar so the CSV itself depends
/// only on the inputs.
pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    for (k, v) in &result.metadata {
        writeln!(out, "# {k}: {v}").map_err(CliError::io(path))?;
    }
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER).map_err(csv_err)?;
    for r in &result.rows {
        let se = r.std_err.map(format_number).unwrap_or_default();
        w.write_record([format_number(r.axis), r.method.clone(), format_number(r.value), se])
            .map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))?;

    let meta = path.with_extension("meta");
    std::fs::write(&meta, format!("wall_time_s = {:.3}\n", result.wall_time_s)).map_err(CliError::io(&meta))?;
    Ok(())
}

/// Parses a CSV written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let metadata = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l[1..].trim_start().split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| CliError::Config(format!("{}: bad number {:?}", path.display(), &rec[i])))
        };
        rows.push(Row {
            axis: num(0)?,
            method: rec[1].to_string(),
            value: num(2)?,
            std_err: if rec[3].is_empty() { None } else { Some(num(3)?) },
        });
    }
    Ok(SweepResult {
        rows,
        metadata,
        wall_time_s: 0.0,
    })
}
