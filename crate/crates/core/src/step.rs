//! Piecewise-constant functions on the half-line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A right-continuous step function on `[0, ∞)`.
///
/// The function is zero left of `breaks[0]`, equals `values[i]` on
/// `[breaks[i], breaks[i+1])` and equals `tail` from the last break on.
/// Instances are always canonical: no zero-width pieces, no equal
/// neighbouring values, no leading zero piece and no final piece equal
/// to the tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep", into = "RawStep")]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
    tail: f64,
}

#[derive(Serialize, Deserialize)]
struct RawStep {
    breaks: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    tail: f64,
}

impl TryFrom<RawStep> for StepFunction {
    type Error = Error;

    fn try_from(raw: RawStep) -> Result<Self> {
        StepFunction::new(raw.breaks, raw.values, raw.tail)
    }
}

impl From<StepFunction> for RawStep {
    fn from(f: StepFunction) -> Self {
        RawStep {
            breaks: f.breaks,
            values: f.values,
            tail: f.tail,
        }
    }
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>, tail: f64) -> Result<Self> {
        if breaks.is_empty() {
            return Err(Error::spec("breaks", "at least one break is required"));
        }
        if values.len() + 1 != breaks.len() {
            return Err(Error::spec(
                "values",
                format!(
                    "expected {} values for {} breaks, got {}",
                    breaks.len() - 1,
                    breaks.len(),
                    values.len()
                ),
            ));
        }
        if breaks.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::spec("breaks", "breaks must be finite and nonnegative"));
        }
        if breaks.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::spec("breaks", "breaks must be nondecreasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::spec("values", "values must be finite"));
        }
        if !tail.is_finite() {
            return Err(Error::spec("tail", "tail must be finite"));
        }
        Ok(Self::canonical(breaks, values, tail))
    }

    fn canonical(breaks: Vec<f64>, values: Vec<f64>, tail: f64) -> Self {
        let mut b: Vec<f64> = Vec::with_capacity(breaks.len());
        let mut v: Vec<f64> = Vec::with_capacity(values.len());
        b.push(breaks[0]);
        for (i, &c) in values.iter().enumerate() {
            let right = breaks[i + 1];
            if right == *b.last().unwrap() {
                continue;
            }
            if v.is_empty() && c == 0.0 {
                // leading zero piece: move the start
                *b.last_mut().unwrap() = right;
                continue;
            }
            if v.last() == Some(&c) {
                *b.last_mut().unwrap() = right;
            } else {
                v.push(c);
                b.push(right);
            }
        }
        while v.last() == Some(&tail) {
            v.pop();
            b.pop();
        }
        if v.is_empty() && tail == 0.0 {
            b = vec![0.0];
        }
        StepFunction {
            breaks: b,
            values: v,
            tail,
        }
    }

    pub fn zero() -> Self {
        StepFunction {
            breaks: vec![0.0],
            values: Vec::new(),
            tail: 0.0,
        }
    }

    /// The constant `c` on the whole half-line.
    pub fn constant(c: f64) -> Self {
        Self::canonical(vec![0.0], Vec::new(), c)
    }

    /// `c · 1_{[a,b)}`.
    pub fn indicator_scaled(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![c], 0.0)
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::indicator_scaled(a, b, 1.0)
    }

    /// Builds a step function from sample points `x_0 < … < x_m` and the
    /// values taken on `[x_i, x_{i+1})`.
    pub fn from_pieces(points: &[f64], values: &[f64], tail: f64) -> Result<Self> {
        Self::new(points.to_vec(), values.to_vec(), tail)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Pieces `(a, b, c)` of the bounded part.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.breaks[i], self.breaks[i + 1], c))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.breaks[0] {
            return 0.0;
        }
        let i = self.breaks.partition_point(|&b| b <= x) - 1;
        if i >= self.values.len() {
            self.tail
        } else {
            self.values[i]
        }
    }

    /// Right end of the bounded part.
    pub fn end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn is_compact(&self) -> bool {
        self.tail == 0.0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.tail >= 0.0 && self.values.iter().all(|&v| v >= 0.0)
    }

    /// `∫ f`; infinite unless the tail vanishes.
    pub fn integral(&self) -> f64 {
        if self.tail != 0.0 {
            return self.tail.signum() * f64::INFINITY;
        }
        self.pieces().map(|(a, b, c)| c * (b - a)).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        if self.tail != 0.0 {
            return f64::INFINITY;
        }
        self.pieces().map(|(a, b, c)| c.abs() * (b - a)).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .fold(self.tail.abs(), |m, v| m.max(v.abs()))
    }

    /// `x ↦ f(x/s)`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("dilation factor must be positive, got {s}")));
        }
        Ok(Self::canonical(
            self.breaks.iter().map(|b| b * s).collect(),
            self.values.clone(),
            self.tail,
        ))
    }

    /// `f · 1_{[0,n)}`.
    pub fn truncate(&self, n: f64) -> Self {
        let mut breaks = Vec::new();
        let mut values = Vec::new();
        if n <= self.breaks[0] {
            return Self::zero();
        }
        breaks.push(self.breaks[0]);
        for (a, b, c) in self.pieces() {
            if a >= n {
                break;
            }
            values.push(c);
            breaks.push(b.min(n));
        }
        if n > self.end() {
            values.push(self.tail);
            breaks.push(n);
        }
        Self::canonical(breaks, values, 0.0)
    }

    /// `∫ f g` for two step functions; exact piecewise integration.
    pub fn inner(&self, other: &StepFunction) -> f64 {
        if self.tail != 0.0 && other.tail != 0.0 {
            return (self.tail * other.tail).signum() * f64::INFINITY;
        }
        let mut pts: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut sum = 0.0;
        for w in pts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            sum += self.eval(mid) * other.eval(mid) * (w[1] - w[0]);
        }
        sum
    }
}
