//! Rectangular sampling grids and their CSV/JSON serialisation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// `count` equally spaced samples on `[min, max]`; a single sample sits at `min`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, count: usize) -> Result<Self> {
        let name = name.into();
        if count == 0 {
            return Err(Error::InvalidParameters(format!("axis `{}` needs at least one sample", name)));
        }
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(Error::InvalidParameters(format!("axis `{}` has invalid bounds", name)));
        }
        Ok(Self { name, min, max, count })
    }

    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.max - self.min) / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.min + self.step() * i as f64).collect()
    }
}

/// Tensor grid; points are enumerated with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            let k = index % axis.count;
            index /= axis.count;
            *slot = axis.min + axis.step() * k as f64;
        }
        out
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Evaluates `f` at every point in parallel, preserving point order.
    pub fn map<T: Send>(&self, f: impl Fn(&[f64]) -> T + Sync) -> Vec<T> {
        (0..self.len()).into_par_iter().map(|i| f(&self.point(i))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Values {
    pub fn len(&self) -> usize {
        match self {
            Values::Real(v) => v.len(),
            Values::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampled values together with free-form metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct GridData {
    pub grid: Grid,
    pub values: Values,
    pub metadata: Map<String, Value>,
}

impl GridData {
    pub fn new(grid: Grid, values: Values, metadata: Map<String, Value>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidParameters(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, metadata })
    }

    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.grid.axes.iter().map(|a| a.name.clone()).collect();
        match self.values {
            Values::Real(_) => h.push("value".into()),
            Values::Complex(_) => {
                h.push("re".into());
                h.push("im".into());
            }
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for i in 0..self.grid.len() {
            let mut row: Vec<String> = self.grid.point(i).iter().map(|x| x.to_string()).collect();
            match &self.values {
                Values::Real(v) => row.push(v[i].to_string()),
                Values::Complex(v) => {
                    row.push(v[i].re.to_string());
                    row.push(v[i].im.to_string());
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.grid.len())
            .map(|i| {
                let p = self.grid.point(i);
                match &self.values {
                    Values::Real(v) => json!({ "point": p, "value": v[i] }),
                    Values::Complex(v) => json!({ "point": p, "re": v[i].re, "im": v[i].im }),
                }
            })
            .collect();
        json!({
            "columns": self.header(),
            "axes": self.grid.axes,
            "metadata": self.metadata,
            "rows": rows,
        })
    }
}
