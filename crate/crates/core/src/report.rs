//! Tabular curve output shared by figures and the CLI: CSV with the fixed
//! columns `curve,t,value`, or JSON with a metadata block.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tdf::grid;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub name: String,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl Curve {
    /// Samples `f` on the uniform `n`-point grid of `[0, 1]`.
    pub fn sample<F>(name: impl Into<String>, n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if n < 3 {
            return Err(Error::config("grid", format!("need at least 3 points, got {n}")));
        }
        let t = grid(n);
        let values = t.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(Curve {
            name: name.into(),
            t,
            values,
        })
    }

    pub fn at(&self, t: f64) -> Option<f64> {
        self.t.iter().position(|&x| (x - t).abs() < 1e-12).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub config: Value,
    pub curves: Vec<Curve>,
    /// Extra results carried only by the JSON form.
    pub summary: Option<Value>,
}

/// Fixed-point formatting; residues below the printed precision are
/// written as zero so that `-0.000000000000` never appears.
fn fixed(v: f64, digits: usize) -> String {
    let cut = 0.5 * 10f64.powi(-(digits as i32));
    let v = if v.abs() < cut { 0.0 } else { v };
    format!("{v:.digits$}")
}

impl Table {
    pub fn new(config: Value, curves: Vec<Curve>) -> Self {
        Table {
            config,
            curves,
            summary: None,
        }
    }

    pub fn with_summary(mut self, summary: Value) -> Self {
        self.summary = Some(summary);
        self
    }

    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve,t,value\n");
        for c in &self.curves {
            for (t, v) in c.t.iter().zip(&c.values) {
                out.push_str(&format!("{},{},{}\n", c.name, fixed(*t, 6), fixed(*v, 12)));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut doc = json!({
            "metadata": { "version": VERSION, "config": self.config },
            "curves": self.curves,
        });
        if let Some(s) = &self.summary {
            doc["summary"] = s.clone();
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        s.push('\n');
        s
    }
}
