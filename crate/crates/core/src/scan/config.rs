use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::BathSpec;
use crate::error::{Error, Result};
use crate::metrology::linspace;
use crate::states::StateSpec;

pub const DEFAULT_TIME_POINTS: usize = 400;

fn default_gamma() -> f64 {
    1.0
}

fn default_points() -> usize {
    DEFAULT_TIME_POINTS
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Inverse temperatures to scan at a common coupling rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathGrid {
    pub beta: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl BathGrid {
    pub fn baths(&self) -> Result<Vec<BathSpec>> {
        if self.beta.is_empty() {
            return config_err("bath.beta must list at least one value");
        }
        self.beta
            .iter()
            .map(|&beta| {
                BathSpec::new(beta, self.gamma).map_err(|e| Error::Config(format!("bath: {e}")))
            })
            .collect()
    }
}

/// One swept state parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Upper end of the grid; defaults to the slowest thermalization time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Explicit time points, replacing `points` and `t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid { points: DEFAULT_TIME_POINTS, t_max: None, values: None }
    }
}

impl TimeGrid {
    /// Resolved grid. The default upper end is `20/|λ|` at the smallest `|λ|`
    /// among `baths`.
    pub fn resolve(&self, baths: &[BathSpec]) -> Result<Vec<f64>> {
        if let Some(values) = &self.values {
            if values.is_empty() {
                return config_err("time.values must not be empty");
            }
            if values.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return config_err("time.values must be finite and nonnegative");
            }
            if values.windows(2).any(|w| !(w[1] > w[0])) {
                return config_err("time.values must be strictly increasing");
            }
            return Ok(values.clone());
        }
        if self.points == 0 {
            return config_err("time.points must be at least 1");
        }
        let t_max = match self.t_max {
            Some(t) if t > 0.0 && t.is_finite() => t,
            Some(t) => return config_err(format!("time.t_max = {t} must be positive and finite")),
            None => baths.iter().map(BathSpec::thermalization_time).fold(0.0, f64::max),
        };
        Ok(linspace(0.0, t_max, self.points))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Qfi,
    Purity,
    Negativity,
    LocalTemperature,
    LocalCoherence,
    Bound,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Qfi => "qfi",
            Column::Purity => "purity",
            Column::Negativity => "negativity",
            Column::LocalTemperature => "local_temperature",
            Column::LocalCoherence => "local_coherence",
            Column::Bound => "bound",
        }
    }
}

fn default_columns() -> Vec<Column> {
    vec![Column::Qfi]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_columns")]
    pub columns: Vec<Column>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { columns: default_columns() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMode {
    /// Time-maximised QFI minus the thermal asymptote, one row per grid cell.
    PeakMinusAsymptote,
    /// QFI of the state minus QFI of the product of its one-qubit reductions,
    /// one row per grid cell and time.
    CorrelatedMinusProductized,
}

impl fmt::Display for DiffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiffMode::PeakMinusAsymptote => "peak_minus_asymptote",
            DiffMode::CorrelatedMinusProductized => "correlated_minus_productized",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffSpec {
    pub mode: DiffMode,
}

/// Configuration of `scan` and `diff` runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub bath: BathGrid,
    pub state: StateSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<Sweep>,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<DiffSpec>,
}

/// One `(β, swept parameters)` cell of a scan.
#[derive(Debug, Clone)]
pub struct Cell {
    pub bath: BathSpec,
    pub params: Vec<f64>,
    pub spec: StateSpec,
}

impl ScanConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scan config serializes to TOML")
    }

    /// Checks every field and returns the grid cells in output order:
    /// β outermost, then sweeps in config order (last sweep fastest).
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let baths = self.bath.baths()?;
        let mut seen = BTreeSet::new();
        for s in &self.sweep {
            if !seen.insert(s.name.as_str()) {
                return config_err(format!("sweep `{}` appears twice", s.name));
            }
            if s.values.is_empty() {
                return config_err(format!("sweep `{}` has no values", s.name));
            }
            if s.name == "beta" || s.name == "t" {
                return config_err(format!("`{}` is set in [bath] / [time], not swept", s.name));
            }
        }
        let mut columns = BTreeSet::new();
        for c in &self.output.columns {
            if !columns.insert(*c) {
                return config_err(format!("output column `{}` listed twice", c.name()));
            }
        }

        let mut specs = vec![(Vec::new(), self.state.clone())];
        for s in &self.sweep {
            let mut next = Vec::with_capacity(specs.len() * s.values.len());
            for (params, spec) in &specs {
                for &v in &s.values {
                    let mut p: Vec<f64> = params.clone();
                    p.push(v);
                    next.push((p, spec.with_param(&s.name, v)?));
                }
            }
            specs = next;
        }
        for (params, spec) in &specs {
            spec.build().map_err(|e| {
                let at: Vec<String> =
                    self.sweep.iter().zip(params).map(|(s, v)| format!("{} = {v}", s.name)).collect();
                let at = if at.is_empty() { String::new() } else { format!(" at {}", at.join(", ")) };
                Error::Config(format!("state `{}`{at}: {e}", spec.family()))
            })?;
        }

        let mut cells = Vec::with_capacity(baths.len() * specs.len());
        for bath in &baths {
            for (params, spec) in &specs {
                cells.push(Cell { bath: *bath, params: params.clone(), spec: spec.clone() });
            }
        }
        Ok(cells)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.time.resolve(&self.bath.baths()?)
    }

    pub fn sweep_names(&self) -> Vec<&str> {
        self.sweep.iter().map(|s| s.name.as_str()).collect()
    }
}
