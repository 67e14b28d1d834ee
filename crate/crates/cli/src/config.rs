//! Experiment configuration: a flat `key = value` TOML file.
//!
//! ```toml
//! metric = "outage"
//! lambda = 0.75
//! sweep_axis = "snr_db"
//! sweep_start = 0.0
//! sweep_stop = 30.0
//! sweep_steps = 7
//! methods = ["mc", "exact_quadrature", "lower_bound", "upper_bound"]
//! mc_n = 1000000
//! seed = 1
//! output_path = "fig1.csv"
//! ```
//!
//! Powers are linear. `snr_db` sets `p1 = p2 = 10^(snr_db/10) sigma2` and may
//! not be combined with `p1` or `p2`. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use ehrelay_core::model::{SystemParams, TargetRates};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Capacity,
    Diversity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    Lambda,
    R,
    D1,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Lambda => "lambda",
            Axis::R => "r",
            Axis::D1 => "d1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    ExactTaylor,
    ExactQuadrature,
    LowerBound,
    UpperBound,
    HighSnr,
    CapacitySeries,
    CapacityQuadrature,
    CapacityBounds,
    Dmt,
    NonCoop,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::ExactTaylor => "exact_taylor",
            Method::ExactQuadrature => "exact_quadrature",
            Method::LowerBound => "lower_bound",
            Method::UpperBound => "upper_bound",
            Method::HighSnr => "high_snr",
            Method::CapacitySeries => "capacity_series",
            Method::CapacityQuadrature => "capacity_quadrature",
            Method::CapacityBounds => "capacity_bounds",
            Method::Dmt => "dmt",
            Method::NonCoop => "non_coop",
        }
    }

    fn allowed_for(self, metric: Metric) -> bool {
        use Method::*;
        match metric {
            Metric::Outage => matches!(
                self,
                Mc | ExactTaylor | ExactQuadrature | LowerBound | UpperBound | HighSnr | NonCoop
            ),
            Metric::Capacity => matches!(
                self,
                Mc | CapacitySeries | CapacityQuadrature | CapacityBounds | NonCoop
            ),
            Metric::Diversity => matches!(self, Mc | Dmt),
        }
    }

    /// Methods whose value estimates the same quantity as the simulation.
    /// `dmt` is the slope of the outage lower bound, not of the exact outage.
    pub fn is_exact(self) -> bool {
        matches!(
            self,
            Method::ExactQuadrature | Method::CapacityQuadrature | Method::CapacitySeries
        )
    }

    pub const ALL: [Method; 11] = [
        Method::Mc,
        Method::ExactTaylor,
        Method::ExactQuadrature,
        Method::LowerBound,
        Method::UpperBound,
        Method::HighSnr,
        Method::CapacitySeries,
        Method::CapacityQuadrature,
        Method::CapacityBounds,
        Method::Dmt,
        Method::NonCoop,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default = "one")]
    pub sigma2: f64,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "half")]
    pub epsilon: f64,
    #[serde(default = "half")]
    pub d1: f64,
    #[serde(default = "default_path_loss")]
    pub path_loss_exp: f64,
    #[serde(default = "one")]
    pub t1: f64,
    #[serde(default = "one")]
    pub t2: f64,
    /// Multiplexing gain for the diversity metric.
    #[serde(default = "half")]
    pub r: f64,
    pub metric: Metric,
    pub sweep_axis: Axis,
    pub sweep_start: f64,
    pub sweep_stop: f64,
    pub sweep_steps: usize,
    pub methods: Vec<Method>,
    #[serde(default = "default_mc_n")]
    pub mc_n: u64,
    #[serde(default = "one_u64")]
    pub seed: u64,
    /// Stencil half-width of the simulated diversity, in dB.
    #[serde(default = "default_delta_db")]
    pub delta_db: f64,
    #[serde(default = "default_output")]
    pub output_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn one_u64() -> u64 {
    1
}
fn default_lambda() -> f64 {
    0.75
}
fn default_path_loss() -> f64 {
    3.0
}
fn default_mc_n() -> u64 {
    1_000_000
}
fn default_delta_db() -> f64 {
    0.25
}
fn default_output() -> PathBuf {
    PathBuf::from("sweep.csv")
}

/// Everything needed to evaluate one axis point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub params: SystemParams,
    pub targets: TargetRates,
    /// `P1 / sigma2`.
    pub gamma: f64,
    pub r: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Self::from_toml_str(&text)
    }

    /// The configuration as TOML, without the fields that do not affect results.
    pub fn echo(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.output_path = PathBuf::new();
        let text = toml::to_string(&c).unwrap_or_default();
        text.lines()
            .filter(|l| !l.starts_with("output_path"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn powers(&self) -> Result<(f64, f64)> {
        match (self.snr_db, self.p1, self.p2) {
            (Some(db), None, None) => {
                let p = db_to_linear(db) * self.sigma2;
                Ok((p, p))
            }
            (Some(_), _, _) => Err(CliError::Config("snr_db cannot be combined with p1 or p2".into())),
            (None, p1, p2) => {
                let default = 100.0 * self.sigma2;
                Ok((p1.unwrap_or(default), p2.unwrap_or(default)))
            }
        }
    }

    pub fn axis_values(&self) -> Vec<f64> {
        let n = self.sweep_steps;
        let (a, b) = (self.sweep_start, self.sweep_stop);
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Parameters at axis value `x`. On the SNR axis both powers scale
    /// together, keeping `p2 / p1`.
    pub fn point(&self, x: f64) -> Result<Point> {
        let (mut p1, mut p2) = self.powers()?;
        let mut lambda = self.lambda;
        let mut d1 = self.d1;
        let mut r = self.r;
        match self.sweep_axis {
            Axis::SnrDb => {
                let ratio = p2 / p1;
                p1 = db_to_linear(x) * self.sigma2;
                p2 = p1 * ratio;
            }
            Axis::Lambda => lambda = x,
            Axis::D1 => d1 = x,
            Axis::R => r = x,
        }
        let params = SystemParams::new(
            p1,
            p2,
            self.sigma2,
            self.eta,
            lambda,
            self.epsilon,
            d1,
            self.path_loss_exp,
        )
        .map_err(|e| CliError::Config(format!("at {} = {x}: {e}", self.sweep_axis.name())))?;
        let gamma = p1 / self.sigma2;
        let multiplexing = self.metric == Metric::Diversity || self.sweep_axis == Axis::R;
        let targets = if multiplexing {
            TargetRates::from_multiplexing_gain(r, gamma)
        } else {
            TargetRates::new(self.t1, self.t2)
        }
        .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Point {
            x,
            params,
            targets,
            gamma,
            r,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.sweep_steps < 2 {
            return bad(format!("sweep_steps = {} must be >= 2", self.sweep_steps));
        }
        if !(self.sweep_start.is_finite() && self.sweep_stop.is_finite() && self.sweep_start < self.sweep_stop) {
            return bad(format!(
                "sweep range [{}, {}] must be finite and increasing",
                self.sweep_start, self.sweep_stop
            ));
        }
        let (lo, hi) = (self.sweep_start, self.sweep_stop);
        match self.sweep_axis {
            Axis::Lambda | Axis::D1 if !(lo > 0.0 && hi < 1.0) => {
                return bad(format!(
                    "{} sweep [{lo}, {hi}] must lie strictly inside (0, 1)",
                    self.sweep_axis.name()
                ));
            }
            Axis::R if lo <= 0.0 => return bad(format!("r sweep must start above 0, got {lo}")),
            _ => {}
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if !m.allowed_for(self.metric) {
                return bad(format!("method {m} does not apply to metric {:?}", self.metric));
            }
            if self.methods[..i].contains(m) {
                return bad(format!("method {m} listed twice"));
            }
        }
        if self.methods.contains(&Method::Mc) && self.mc_n == 0 {
            return bad("mc_n must be >= 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be >= 1".into());
        }
        if !(self.delta_db > 0.0 && self.delta_db.is_finite()) {
            return bad(format!("delta_db = {} must be > 0", self.delta_db));
        }
        let (p1, p2) = self.powers()?;
        if (self.metric == Metric::Diversity || self.sweep_axis == Axis::R) && p1 != p2 {
            return bad("rates set by a multiplexing gain need p1 = p2".into());
        }
        if self.metric == Metric::Diversity && self.sweep_axis != Axis::R && !(self.r > 0.0) {
            return bad(format!("r = {} must be > 0", self.r));
        }
        for x in [lo, hi] {
            self.point(x)?;
        }
        Ok(())
    }
}
