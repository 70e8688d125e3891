//! Flat `key = value` experiment configuration.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::path::Path;

use toml::{Table, Value};

use crate::error::CliError;

/// Default density of the log-spaced temperature grid.
pub const POINTS_PER_DECADE: f64 = 40.0;

#[derive(Debug)]
pub struct Config {
    table: Table,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
        for (k, v) in &table {
            if matches!(v, Value::Table(_)) {
                return Err(CliError::Config(format!("key `{k}`: nested tables are not allowed")));
            }
        }
        Ok(Config { table, used: RefCell::new(BTreeSet::new()) })
    }

    pub fn table(&self) -> &Table {
        &self.table
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| type_error(key, "a number")),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.opt_f64(key)?.ok_or_else(|| missing(key))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("key `{key}` must be positive, got {v}")))
        }
    }

    pub fn opt_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(type_error(key, "a non-negative integer")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.opt_usize(key)?.ok_or_else(|| missing(key))
    }

    pub fn opt_str(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(type_error(key, "a string")),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, CliError> {
        Ok(self.opt_str(key)?.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(type_error(key, "a boolean")),
        }
    }

    pub fn opt_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| as_f64(v).ok_or_else(|| type_error(key, "an array of numbers")))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(type_error(key, "an array of numbers")),
        }
    }

    pub fn opt_usize_list(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i > 0 => Ok(*i as usize),
                    _ => Err(type_error(key, "an array of positive integers")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(_) => Err(type_error(key, "an array of positive integers")),
        }
    }

    /// Rejects keys that no part of the experiment read.
    pub fn reject_unknown(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self.table.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

fn type_error(key: &str, what: &str) -> CliError {
    CliError::Config(format!("key `{key}` must be {what}"))
}

/// Log-spaced temperature grid from `T_min`, `T_max` and `points`.
#[derive(Debug, Clone)]
pub struct TemperatureGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl TemperatureGrid {
    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        let t_min = cfg.positive("T_min")?;
        let t_max = cfg.positive("T_max")?;
        if t_min >= t_max {
            return Err(CliError::Config(format!("T_min = {t_min} must be below T_max = {t_max}")));
        }
        let points = match cfg.opt_usize("points")? {
            Some(p) => p,
            None => (POINTS_PER_DECADE * (t_max / t_min).log10()).ceil() as usize + 1,
        };
        if points < 2 {
            return Err(CliError::Config("points must be at least 2".into()));
        }
        Ok(TemperatureGrid { t_min, t_max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        qthermo::fit::log_space(self.t_min, self.t_max, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitChoice {
    PowerLaw,
    ExponentialGap,
}

/// Optional fit over `[fit_lo, fit_hi]` in temperature.
#[derive(Debug, Clone, Copy)]
pub struct FitRequest {
    pub kind: FitChoice,
    pub window: (f64, f64),
}

impl FitRequest {
    pub fn from_config(cfg: &Config, grid: &TemperatureGrid) -> Result<Option<Self>, CliError> {
        let lo = cfg.opt_f64("fit_lo")?;
        let hi = cfg.opt_f64("fit_hi")?;
        let kind = cfg.opt_str("fit")?;
        let (lo, hi) = match (lo, hi) {
            (None, None) => {
                if kind.is_some() && kind != Some("none") {
                    return Err(CliError::Config("`fit` needs `fit_lo` and `fit_hi`".into()));
                }
                return Ok(None);
            }
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(CliError::Config("`fit_lo` and `fit_hi` must be given together".into())),
        };
        let slack = 1e-12 * grid.t_max;
        if !(lo < hi && lo >= grid.t_min - slack && hi <= grid.t_max + slack) {
            return Err(CliError::Config(format!(
                "fit window [{lo}, {hi}] must be ordered and lie within [{}, {}]",
                grid.t_min, grid.t_max
            )));
        }
        let kind = match kind.unwrap_or("power_law") {
            "power_law" => FitChoice::PowerLaw,
            "exponential_gap" => FitChoice::ExponentialGap,
            "none" => return Ok(None),
            other => return Err(CliError::Config(format!("unknown fit kind `{other}`"))),
        };
        Ok(Some(FitRequest { kind, window: (lo, hi) }))
    }
}
