//! JSON run configurations. Every struct rejects unknown keys.

use std::path::{Path, PathBuf};

use mehler_core::profile::Profile;
use mehler_core::quadrature::{Field, Grid};
use mehler_core::verify::CheckName;
use mehler_core::{AffineSign, QuadraticRate64, TimeWindow64};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateConfig {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(default)]
    pub r: Option<Vec<f64>>,
    #[serde(default)]
    pub s: f64,
}

impl RateConfig {
    pub fn build(&self) -> CliResult<QuadraticRate64> {
        let n = self.q.len();
        let r = self.r.clone().unwrap_or_else(|| vec![0.0; n]);
        Ok(QuadraticRate64::from_rows(&self.q, r, self.s)?)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default)]
    pub t0: f64,
    pub t: f64,
}

impl WindowConfig {
    pub fn build(&self) -> CliResult<TimeWindow64> {
        Ok(TimeWindow64::new(self.t0, self.t)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub m: Vec<usize>,
}

impl GridConfig {
    pub fn build(&self) -> CliResult<Grid<f64>> {
        if self.l.len() != self.m.len() {
            return Err(CliError::Config(format!(
                "grid L has {} entries but m has {}",
                self.l.len(),
                self.m.len()
            )));
        }
        Ok(Grid::new(self.l.clone(), self.m.clone())?)
    }
}

/// A density given analytically or as a CSV of `x…,value` rows in grid order.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    Profile(Profile),
    Csv(PathBuf),
}

impl FieldSource {
    /// Relative CSV paths resolve against the config file's directory.
    pub fn load(&self, grid: &Grid<f64>, base: &Path) -> CliResult<Field<f64>> {
        match self {
            FieldSource::Profile(p) => Ok(p.sample(grid)?),
            FieldSource::Csv(path) => read_field_csv(&base.join(path), grid),
        }
    }
}

fn read_field_csv(path: &Path, grid: &Grid<f64>) -> CliResult<Field<f64>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let n = grid.dim();
    let points = grid.points();
    let tol: f64 = (0..n)
        .map(|a| grid.spacing(a))
        .fold(f64::INFINITY, f64::min)
        * 1e-6;
    let mut values = Vec::with_capacity(grid.len());
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(CliError::Config(format!(
                "{}: row {} has {} columns, expected {}",
                path.display(),
                row + 1,
                record.len(),
                n + 1
            )));
        }
        let nums = record
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::Config(format!("{}: row {}: {e}", path.display(), row + 1)))?;
        let node = points.get(row).ok_or_else(|| {
            CliError::Config(format!(
                "{}: more rows than the grid's {} nodes",
                path.display(),
                grid.len()
            ))
        })?;
        if node.iter().zip(&nums).any(|(a, b)| (a - b).abs() > tol) {
            return Err(CliError::Config(format!(
                "{}: row {} coordinates do not match grid node {:?}",
                path.display(),
                row + 1,
                node
            )));
        }
        values.push(nums[n]);
    }
    if values.len() != grid.len() {
        return Err(CliError::Config(format!(
            "{}: {} rows for a grid of {} nodes",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    Ok(Field::new(grid.clone(), values)?)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelProbe {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Elapsed time for this probe; defaults to the window's.
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEvalConfig {
    pub rate: RateConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub probes: Vec<KernelProbe>,
    /// Evaluates every `(x, y)` pair of grid nodes, `x` varying slowest.
    #[serde(default)]
    pub probe_grid: Option<GridConfig>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolPointConfig {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolEvalConfig {
    pub rate: RateConfig,
    pub window: WindowConfig,
    pub points: Vec<SymbolPointConfig>,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub rate: RateConfig,
    pub window: WindowConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub out_grid: Option<GridConfig>,
    pub initial: FieldSource,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Checks to run; all of them when absent. An empty list is an error.
    #[serde(default)]
    pub checks: Option<Vec<CheckName>>,
    #[serde(default)]
    pub rate: Option<RateConfig>,
    /// Forces the affine sign of the checked kernel (`1` or `-1`).
    #[serde(default)]
    pub sigma_override: Option<i8>,
    /// Includes per-check wall-clock times, which makes the report
    /// non-reproducible.
    #[serde(default)]
    pub timings: bool,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl VerifyConfig {
    pub fn sign(&self) -> CliResult<Option<AffineSign>> {
        self.sigma_override
            .map(|v| {
                AffineSign::from_i8(v).ok_or_else(|| {
                    CliError::Config(format!("sigma_override must be 1 or -1, got {v}"))
                })
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeConfig {
    pub grid: GridConfig,
    pub rho0: FieldSource,
    pub rho1: FieldSource,
    pub rate: RateConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    /// Times in `[t0, t]` at which to write interpolated marginals.
    #[serde(default)]
    pub marginals: Vec<f64>,
    #[serde(default)]
    pub threads: Option<usize>,
}
