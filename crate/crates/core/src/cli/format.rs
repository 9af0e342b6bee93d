//! Deterministic number, table and matrix formatting.

use serde_json::Value;

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 12;
pub const PRECISION_VAR: &str = "IONCHAIN_PRECISION";

/// Significant digits from `IONCHAIN_PRECISION`, default 12.
pub fn precision_from_env() -> Result<usize> {
    match std::env::var(PRECISION_VAR) {
        Err(_) => Ok(DEFAULT_PRECISION),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(p) if (1..=17).contains(&p) => Ok(p),
            _ => Err(Error::Config { path: PRECISION_VAR.into(), message: format!("`{s}` is not a digit count in 1..=17") }),
        },
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Fmt {
    pub digits: usize,
}

impl Fmt {
    pub fn num(&self, x: f64) -> String {
        if x == 0.0 {
            return "0".into();
        }
        if !x.is_finite() {
            return format!("{x}");
        }
        format!("{:.*e}", self.digits - 1, x)
    }

    /// JSON number carrying exactly the printed digits.
    pub fn json(&self, x: f64) -> Value {
        if !x.is_finite() {
            return Value::Null;
        }
        let rounded: f64 = self.num(x).parse().unwrap_or(x);
        serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
    }

    pub fn json_vec(&self, xs: &[f64]) -> Value {
        Value::Array(xs.iter().map(|&x| self.json(x)).collect())
    }

    pub fn row(&self, cells: &[f64]) -> String {
        cells.iter().map(|&c| self.num(c)).collect::<Vec<_>>().join(",")
    }

    /// Right-aligned columns with a header row and row labels.
    pub fn matrix(&self, row_labels: &[String], col_labels: &[String], rows: &[Vec<f64>]) -> String {
        let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&v| self.num(v)).collect()).collect();
        let lw = row_labels.iter().map(|s| s.len()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..col_labels.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([col_labels[j].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        out.push_str(&" ".repeat(lw));
        for (j, c) in col_labels.iter().enumerate() {
            out.push_str(&format!("  {c:>w$}", w = widths[j]));
        }
        out.push('\n');
        for (label, r) in row_labels.iter().zip(&cells) {
            out.push_str(&format!("{label:<lw$}"));
            for (j, c) in r.iter().enumerate() {
                out.push_str(&format!("  {c:>w$}", w = widths[j]));
            }
            out.push('\n');
        }
        out
    }
}
