//! Tabular results and their serialization.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use qthermo::fit::ScalingFit;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// One column-major result table; missing values are `NaN`.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_float(*v))).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|v| if v.is_finite() { json!(v) } else { Value::Null }).collect()))
            .collect();
        json!({ "columns": self.columns, "rows": rows })
    }
}

/// Shortest round-trip decimal; empty for missing values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub name: String,
    pub kind: &'static str,
    pub exponent_or_gap: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

impl FitSummary {
    pub fn new(name: &str, fit: &ScalingFit) -> Self {
        FitSummary {
            name: name.to_string(),
            kind: fit.kind.name(),
            exponent_or_gap: fit.exponent_or_gap,
            prefactor: fit.prefactor,
            r_squared: fit.r_squared,
            window: fit.window,
            n_points: fit.n_points,
        }
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub fits: Vec<FitSummary>,
    pub results: serde_json::Map<String, Value>,
    pub warnings: Vec<String>,
    /// Additional tables written next to the main output, keyed by file suffix.
    pub extra: Vec<(&'static str, Table)>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Report { table, fits: Vec::new(), results: serde_json::Map::new(), warnings: Vec::new(), extra: Vec::new() }
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn summary(&self, experiment: &str, params: &toml::Table, tolerances: Value, wall_time_s: f64) -> Value {
        json!({
            "experiment": experiment,
            "params": params,
            "fits": self.fits,
            "results": self.results,
            "tolerances": tolerances,
            "warnings": self.warnings,
            "wall_time_s": wall_time_s,
        })
    }
}

/// Serializes `table` in `format`, with the summary embedded for JSON output.
pub fn render(table: &Table, format: Format, summary: &Value) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let doc = json!({ "summary": summary, "data": table.to_json() });
            let mut s = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
            s.push(b'\n');
            Ok(s)
        }
    }
}

/// Writes through a temporary file in the target directory, then renames. Missing parent
/// directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{} is not a file path", path.display())))?;
    std::fs::create_dir_all(dir).map_err(io)?;
    let tmp = dir.join(format!(".{}.partial", name.to_string_lossy()));
    let mut f = std::fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}
