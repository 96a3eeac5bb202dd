//! Output tables. Every run produces one artifact: a header identifying the
//! experiment and its resolved configuration, a column list, and rows of
//! plain values. No timestamps or machine identifiers enter the output, so
//! rerunning a config reproduces the file byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::config::{CliError, CliResult, OutputFormat};

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::UInt(u64::from(v))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => escape_csv(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// Shortest round-trip decimal. Extreme magnitudes switch to exponent
/// notation; everything else is forced to carry a decimal point so float
/// columns stay visibly floats.
fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs();
    if x != 0.0 && !(1e-4..1e16).contains(&magnitude) {
        return format!("{x:e}");
    }
    let mut s = format!("{x}");
    if !s.contains('.') {
        s.push_str(".0");
    }
    s
}

fn escape_csv(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One finished run: metadata plus a rectangular table.
#[derive(Debug)]
pub struct Artifact {
    pub experiment: String,
    pub computes: String,
    /// Resolved configuration, defaults filled in. Serialized with sorted
    /// keys, so the echo is canonical.
    pub config: serde_json::Value,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Artifact {
    pub fn new(
        experiment: &str,
        computes: &str,
        config: serde_json::Value,
        columns: Vec<&'static str>,
    ) -> Self {
        Artifact {
            experiment: experiment.to_string(),
            computes: computes.to_string(),
            config,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> CliResult<String> {
        match format {
            OutputFormat::Csv => Ok(self.to_csv()),
            OutputFormat::Json => self.to_json(),
        }
    }

    fn header_lines(&self) -> String {
        format!(
            "# logvol {}\n# experiment: {}\n# computes: {}\n# config: {}\n",
            env!("CARGO_PKG_VERSION"),
            self.experiment,
            self.computes,
            self.config
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header_lines();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> CliResult<String> {
        let doc = json!({
            "library": "logvol",
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": self.experiment,
            "computes": self.computes,
            "config": self.config,
            "columns": self.columns,
            "rows": self.rows,
        });
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Failure(format!("serializing output: {e}")))?;
        text.push('\n');
        Ok(text)
    }

    /// Writes to the path, or to stdout when no path is given.
    pub fn write(&self, out: Option<&Path>, format: OutputFormat) -> CliResult<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => fs::write(path, text)
                .map_err(|e| CliError::Failure(format!("writing {}: {e}", path.display()))),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(text.as_bytes())
                    .and_then(|()| lock.flush())
                    .map_err(|e| CliError::Failure(format!("writing stdout: {e}")))
            }
        }
    }
}
