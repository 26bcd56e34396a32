//! Experiment configuration files.
//!
//! ```toml
//! [network]
//! n_leaves = 4
//! delta = 0.0
//! coupling = 0.2
//! hub_gain = 1.0
//! hub_damp = 1.0
//! leaf_gain = 1.0
//! leaf_damp = 1.0
//!
//! [solver]
//! tol = 1e-10
//!
//! [[sweep.axes]]
//! parameter = "coupling"
//! linspace = { start = 0.01, stop = 0.3, count = 10 }
//!
//! [output]
//! format = "csv"
//! ```
//!
//! Any field can be overridden from the command line with
//! `--set section.field=value`, where `value` is a TOML literal.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use starsync_core::lindblad::{NetworkConfig, SolverOptions};
use starsync_core::measures::{DEFAULT_GRID_SIZE, DEFAULT_QUAD_ORDER};
use starsync_core::sweep::{SweepAxis, SweepOptions, SweepParameter};

use crate::{CliError, CliResult, WORKERS_ENV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub network: NetworkConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub measure: MeasureOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureOptions {
    pub grid_size: usize,
    /// Pair `(i, j)` used by the `s2` command.
    pub pair: [usize; 2],
    /// Also evaluate the Husimi quadrature and compare with the closed form.
    pub husimi_check: bool,
    pub quad_order: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self { grid_size: DEFAULT_GRID_SIZE, pair: [0, 1], husimi_check: false, quad_order: DEFAULT_QUAD_ORDER }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Couples at `V = κ (γ₀ᵍ + γ₀ᵈ)` instead of the fixed network coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_per_total_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub parameter: SweepParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linspace: Option<Linspace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn values(parameter: SweepParameter, values: Vec<f64>) -> Self {
        Self { parameter, values: Some(values), linspace: None }
    }

    pub fn linspace(parameter: SweepParameter, start: f64, stop: f64, count: usize) -> Self {
        Self { parameter, values: None, linspace: Some(Linspace { start, stop, count }) }
    }

    pub fn to_axis(&self) -> CliResult<SweepAxis> {
        let axis = match (&self.values, &self.linspace) {
            (Some(v), None) => SweepAxis::new(self.parameter, v.clone()),
            (None, Some(l)) => SweepAxis::linspace(self.parameter, l.start, l.stop, l.count),
            _ => {
                return Err(CliError::Input(format!(
                    "sweep axis `{}` needs exactly one of `values` or `linspace`",
                    self.parameter
                )))
            }
        };
        Ok(axis?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Input(format!("unknown output format `{s}` (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `section.field=value` assignments, applied in order.
    pub set: Vec<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
    pub pair: Option<[usize; 2]>,
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        Self::from_table(parse_table(text)?)
    }

    fn from_table(table: toml::Table) -> CliResult<Self> {
        let spec: ExperimentSpec = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Input(format!("invalid configuration: {}", e.message())))?;
        Ok(spec)
    }

    /// Reads an optional config file, applies overrides and validates.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
                parse_table(&text)?
            }
            None => toml::Table::new(),
        };
        for assignment in &overrides.set {
            apply_assignment(&mut table, assignment)?;
        }
        let mut spec = Self::from_table(table)?;
        if let Some(p) = &overrides.output {
            spec.output.path = Some(p.clone());
        }
        if let Some(f) = overrides.format {
            spec.output.format = f;
        }
        if let Some(t) = overrides.tol {
            spec.solver.tol = t;
        }
        if let Some(pair) = overrides.pair {
            spec.measure.pair = pair;
        }
        if let (Some(w), Some(sweep)) = (overrides.workers, spec.sweep.as_mut()) {
            sweep.workers = Some(w);
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.network.validate()?;
        if !(self.solver.tol > 0.0) {
            return Err(CliError::Input("invalid `solver.tol`: must be positive".into()));
        }
        if self.measure.grid_size < 16 {
            return Err(CliError::Input("invalid `measure.grid_size`: must be at least 16".into()));
        }
        if self.measure.quad_order < 16 {
            return Err(CliError::Input("invalid `measure.quad_order`: must be at least 16".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() || sweep.axes.len() > 2 {
                return Err(CliError::Input("invalid `sweep.axes`: give one or two axes".into()));
            }
            for axis in &sweep.axes {
                axis.to_axis()?;
            }
            if sweep.workers == Some(0) {
                return Err(CliError::Input("invalid `sweep.workers`: must be at least 1".into()));
            }
        }
        Ok(())
    }

    /// Canonical TOML text of this spec; parses back to an equal value.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment specs always serialize")
    }

    /// SHA-256 of [`Self::to_toml`], hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn sweep_axes(&self) -> CliResult<Vec<SweepAxis>> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::Input("the configuration has no `sweep` section".into()))?;
        sweep.axes.iter().map(AxisSpec::to_axis).collect()
    }

    /// Sweep options, with the worker count falling back to the environment.
    pub fn sweep_options(&self) -> CliResult<SweepOptions> {
        let sweep = self.sweep.as_ref();
        let workers = match sweep.and_then(|s| s.workers) {
            Some(w) => Some(w),
            None => workers_from_env()?,
        };
        Ok(SweepOptions {
            solver: self.solver,
            grid_size: self.measure.grid_size,
            workers,
            coupling_per_total_rate: sweep.and_then(|s| s.coupling_per_total_rate),
        })
    }
}

fn workers_from_env() -> CliResult<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Input(format!("invalid {WORKERS_ENV}=`{v}`: expected a positive integer"))),
        },
        _ => Ok(None),
    }
}

fn parse_table(text: &str) -> CliResult<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| CliError::Input(format!("invalid configuration: {}", e.message())))
}

/// Applies `a.b.c=value`, creating intermediate tables as needed.
fn apply_assignment(table: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("override `{assignment}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Input(format!("override key `{path}` is malformed")));
    }
    let value = parse_value(raw.trim());
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut current = table;
    for key in parents {
        let entry = current.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Input(format!("override `{path}`: `{key}` is not a section")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}

/// A TOML literal, or a bare string when it does not parse as one.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
