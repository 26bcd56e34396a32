//! CSV and JSON writers.
//!
//! Every file starts with a metadata header: tool version, command, the
//! SHA-256 of the configuration, solver residual and command-specific
//! values, followed by the full configuration echo. In CSV the header is a
//! block of `#` comment lines, with echo lines prefixed `#| `; in JSON it is
//! the `metadata` and `config` members. Floats are written with 17
//! significant digits so values survive a round trip exactly.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::spec::{ExperimentSpec, Format};
use crate::{CliError, CliResult};

pub const TOOL: &str = "starsync";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const S2_COLUMNS: [&str; 4] = ["phi", "s2", "s2_1", "s2_2"];
pub const SWEEP_COLUMNS: [&str; 11] = [
    "axis1",
    "axis2",
    "s01",
    "s12",
    "abs_c1_01",
    "abs_c2_01",
    "abs_c1_12",
    "abs_c2_12",
    "residual",
    "solve_seconds",
    "failed",
];
pub const STEADY_COLUMNS: [&str; 5] = ["site", "p_plus", "p_zero", "p_minus", "sz"];

const ECHO_PREFIX: &str = "#| ";

/// A cell of a result table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
            Cell::Text(t) => json!(t),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Metadata values: ordered `(key, value)` pairs.
pub type Metadata = Vec<(String, Cell)>;

pub struct Document<'a> {
    pub command: &'a str,
    pub spec: &'a ExperimentSpec,
    pub metadata: Metadata,
    pub columns: &'a [&'a str],
    pub rows: Vec<Vec<Cell>>,
}

impl Document<'_> {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# tool: {TOOL} {VERSION}\n"));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# config_sha256: {}\n", self.spec.hash()));
        for (key, value) in &self.metadata {
            out.push_str(&format!("# {key}: {}\n", value.csv()));
        }
        out.push_str("# config:\n");
        for line in self.spec.to_toml().lines() {
            out.push_str(ECHO_PREFIX.trim_end());
            if !line.is_empty() {
                out.push(' ');
                out.push_str(line);
            }
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> String {
        let mut meta = Map::new();
        meta.insert("tool".into(), json!(TOOL));
        meta.insert("version".into(), json!(VERSION));
        meta.insert("command".into(), json!(self.command));
        meta.insert("config_sha256".into(), json!(self.spec.hash()));
        for (key, value) in &self.metadata {
            meta.insert(key.clone(), value.json());
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "metadata": meta, "config": self.spec.to_toml(), "rows": rows });
        let mut text = serde_json::to_string_pretty(&doc).expect("documents always serialize");
        text.push('\n');
        text
    }
}

/// Recovers the configuration echo from a CSV or JSON output file.
pub fn config_echo(text: &str) -> Option<String> {
    if text.trim_start().starts_with('{') {
        let doc: Value = serde_json::from_str(text).ok()?;
        return doc.get("config")?.as_str().map(str::to_string);
    }
    let lines: Vec<&str> = text
        .lines()
        .filter_map(|l| {
            if l == ECHO_PREFIX.trim_end() {
                Some("")
            } else {
                l.strip_prefix(ECHO_PREFIX)
            }
        })
        .collect();
    if lines.is_empty() {
        return None;
    }
    let mut echo = lines.join("\n");
    echo.push('\n');
    Some(echo)
}

pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .map_err(|source| CliError::Io { path: parent.display().to_string(), source })?;
            }
            std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}
