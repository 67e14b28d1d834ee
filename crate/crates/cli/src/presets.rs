//! The four frozen figure presets.
//!
//! | preset | metric    | axis            | curves                               |
//! |--------|-----------|-----------------|--------------------------------------|
//! | fig1   | outage    | SNR 0..30 dB    | d1 = 1/2; d1 = 0.3; T2 = 0.5          |
//! | fig2   | capacity  | lambda, 20 dB   | default geometry                     |
//! | fig3   | diversity | r 0.05..1       | SNR 5, 10, 15, 20 dB                 |
//! | fig4   | diversity | lambda, 20 dB   | d1 = 1/2, 0.3, 0.1                   |

use std::path::{Path, PathBuf};

use crate::config::{Axis, ExperimentConfig, Method, Metric};
use crate::error::{CliError, Result};
use crate::plot;
use crate::sweep;

pub const DEFAULT_N: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone)]
pub struct Curve {
    /// File stem of the curve's CSV.
    pub name: String,
    pub label: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub title: &'static str,
    pub curves: Vec<Curve>,
}

fn base(metric: Metric, axis: Axis, start: f64, stop: f64, steps: usize, methods: Vec<Method>) -> ExperimentConfig {
    let text = format!(
        "metric = \"{}\"\nsweep_axis = \"{}\"\nsweep_start = {start:?}\nsweep_stop = {stop:?}\nsweep_steps = {steps}\nmethods = []\n",
        format!("{metric:?}").to_lowercase(),
        axis.name()
    );
    let mut c: ExperimentConfig = toml::from_str(&text).expect("preset template parses");
    c.methods = methods;
    c
}

fn curve(name: &str, label: &str, config: ExperimentConfig) -> Curve {
    Curve {
        name: name.to_string(),
        label: label.to_string(),
        config,
    }
}

pub fn fig1() -> Preset {
    use Method::*;
    let mut c = base(
        Metric::Outage,
        Axis::SnrDb,
        0.0,
        30.0,
        7,
        vec![Mc, ExactQuadrature, ExactTaylor, LowerBound, UpperBound, HighSnr, NonCoop],
    );
    c.lambda = 0.75;
    let mut asym_d1 = c.clone();
    asym_d1.d1 = 0.3;
    let mut asym_rates = c.clone();
    asym_rates.t2 = 0.5;
    Preset {
        name: "fig1",
        title: "Outage probability vs SNR (lambda = 3/4)",
        curves: vec![
            curve("fig1", "d1 = 1/2, T1 = T2 = 1", c),
            curve("fig1_asym_d1", "d1 = 0.3", asym_d1),
            curve("fig1_asym_rates", "T1 = 1, T2 = 0.5", asym_rates),
        ],
    }
}

pub fn fig2() -> Preset {
    use Method::*;
    let mut c = base(
        Metric::Capacity,
        Axis::Lambda,
        0.05,
        0.95,
        19,
        vec![Mc, CapacityQuadrature, CapacitySeries, CapacityBounds, NonCoop],
    );
    c.snr_db = Some(20.0);
    Preset {
        name: "fig2",
        title: "Ergodic capacity vs lambda (20 dB)",
        curves: vec![curve("fig2", "20 dB", c)],
    }
}

pub fn fig3() -> Preset {
    let curves = [5, 10, 15, 20]
        .into_iter()
        .map(|db| {
            let mut c = base(Metric::Diversity, Axis::R, 0.05, 1.0, 20, vec![Method::Dmt, Method::Mc]);
            c.lambda = 0.75;
            c.snr_db = Some(db as f64);
            curve(&format!("fig3_snr{db}"), &format!("{db} dB"), c)
        })
        .collect();
    Preset {
        name: "fig3",
        title: "Finite-SNR diversity vs multiplexing gain (lambda = 3/4)",
        curves,
    }
}

pub fn fig4() -> Preset {
    let curves = [("05", 0.5), ("03", 0.3), ("01", 0.1)]
        .into_iter()
        .map(|(tag, d1)| {
            let mut c = base(Metric::Diversity, Axis::Lambda, 0.05, 0.95, 19, vec![Method::Dmt, Method::Mc]);
            c.snr_db = Some(20.0);
            c.r = 0.5;
            c.d1 = d1;
            curve(&format!("fig4_d1_{tag}"), &format!("d1 = {d1}"), c)
        })
        .collect();
    Preset {
        name: "fig4",
        title: "Diversity gain vs lambda (r = 0.5, 20 dB)",
        curves,
    }
}

pub fn preset(figure: u8) -> Result<Preset> {
    match figure {
        1 => Ok(fig1()),
        2 => Ok(fig2()),
        3 => Ok(fig3()),
        4 => Ok(fig4()),
        _ => Err(CliError::Config(format!("no preset for figure {figure}; expected 1, 2, 3 or 4"))),
    }
}

impl Preset {
    /// Applies a sample count and seed to every curve.
    pub fn with_run(mut self, n: u64, seed: u64) -> Self {
        for c in &mut self.curves {
            c.config.mc_n = n;
            c.config.seed = seed;
        }
        self
    }

    /// Runs every curve, writing `<out>/<curve>.csv` and `<out>/<preset>.plot.py`.
    pub fn reproduce(&self, out: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(out).map_err(CliError::io(out))?;
        let mut paths = Vec::new();
        for c in &self.curves {
            let path = out.join(format!("{}.csv", c.name));
            let result = sweep::run_sweep(&c.config)?;
            sweep::write_csv(&result, &path)?;
            log::info!("{}: {} rows in {:.1} s", path.display(), result.rows.len(), result.wall_time_s);
            paths.push(path);
        }
        let first = &self.curves[0].config;
        let files: Vec<(String, String)> = self
            .curves
            .iter()
            .map(|c| (format!("{}.csv", c.name), c.label.clone()))
            .collect();
        let script = out.join(format!("{}.plot.py", self.name));
        std::fs::write(&script, plot::script(self.title, first.metric, first.sweep_axis, &files))
            .map_err(CliError::io(&script))?;
        paths.push(script);
        Ok(paths)
    }
}
