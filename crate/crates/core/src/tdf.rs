//! Bivariate tail dependence functions stored through their angular
//! restriction `λ̂(t) = Λ(t, 1-t)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::step::StepFunction;

/// Structural tolerance for exact families.
pub const STRUCTURAL_TOL: f64 = 1e-9;
/// Tolerance for sampled representations.
pub const SAMPLED_TOL: f64 = 1e-6;

/// A continuous piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinear {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(Error::spec("t", "at least two breakpoints are required"));
        }
        if t.len() != v.len() {
            return Err(Error::spec("v", "t and v must have the same length"));
        }
        if t.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::spec("t", "breakpoints and values must be finite"));
        }
        if t[0] != 0.0 || *t.last().unwrap() != 1.0 {
            return Err(Error::spec("t", "breakpoints must start at 0 and end at 1"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::spec("t", "breakpoints must be strictly increasing"));
        }
        Ok(PiecewiseLinear { t, v })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Index `j` of the piece `[t_j, t_{j+1})` containing `x`; the last
    /// piece is closed.
    fn piece(&self, x: f64) -> usize {
        let m = self.t.len() - 1;
        let j = self.t.partition_point(|&b| b <= x);
        j.saturating_sub(1).min(m - 1)
    }

    fn slope_of(&self, j: usize) -> f64 {
        (self.v[j + 1] - self.v[j]) / (self.t[j + 1] - self.t[j])
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let j = self.piece(x);
        if x == self.t[j] {
            return self.v[j];
        }
        if x == self.t[j + 1] {
            return self.v[j + 1];
        }
        let w = (x - self.t[j]) / (self.t[j + 1] - self.t[j]);
        self.v[j] + w * (self.v[j + 1] - self.v[j])
    }

    pub fn right_slope(&self, x: f64) -> f64 {
        self.slope_of(self.piece(x.clamp(0.0, 1.0)))
    }

    pub fn left_slope(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        if x <= 0.0 {
            return self.slope_of(0);
        }
        let j = self.t.partition_point(|&b| b < x);
        self.slope_of(j.saturating_sub(1))
    }

    pub fn reversed(&self) -> Self {
        let t = self.t.iter().rev().map(|x| 1.0 - x).collect();
        let v = self.v.iter().rev().copied().collect();
        PiecewiseLinear { t, v }
    }

    /// Drops interior points lying on the chord of their neighbours.
    pub fn simplified(&self, tol: f64) -> Self {
        let mut t = vec![self.t[0]];
        let mut v = vec![self.v[0]];
        for i in 1..self.t.len() - 1 {
            let (ta, va) = (*t.last().unwrap(), *v.last().unwrap());
            let (tb, vb) = (self.t[i + 1], self.v[i + 1]);
            let interp = va + (vb - va) * (self.t[i] - ta) / (tb - ta);
            if (self.v[i] - interp).abs() > tol {
                t.push(self.t[i]);
                v.push(self.v[i]);
            }
        }
        t.push(*self.t.last().unwrap());
        v.push(*self.v.last().unwrap());
        PiecewiseLinear { t, v }
    }

    /// Rays `t_j/(1-t_j)` of the breakpoints below 1.
    pub fn rays(&self) -> Vec<f64> {
        self.t[..self.t.len() - 1]
            .iter()
            .map(|&x| x / (1.0 - x))
            .collect()
    }

    /// `∂₁Λ(·, w)` as a step function of the first argument.
    ///
    /// On the ray piece `[t_j, t_{j+1})` the derivative is the value at
    /// `τ = 1` of the chord through that piece.
    pub fn d1_step(&self, w: f64) -> StepFunction {
        let m = self.t.len() - 1;
        let breaks: Vec<f64> = self.t[..m].iter().map(|&x| w * x / (1.0 - x)).collect();
        let values: Vec<f64> = (0..m - 1)
            .map(|j| self.v[j + 1] + self.slope_of(j) * (1.0 - self.t[j + 1]))
            .collect();
        StepFunction::new(breaks, values, self.v[m]).expect("rays are increasing")
    }
}

/// Least concave majorant of the points `(t_i, v_i)`, `t` increasing,
/// evaluated back at every `t_i`.
pub fn concave_majorant(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below the chord a–i
            let cross = (t[b] - t[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (t[i] - t[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; n];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in a..=b {
            out[i] = if i == a {
                v[a]
            } else if i == b {
                v[b]
            } else {
                v[a] + (v[b] - v[a]) * (t[i] - t[a]) / (t[b] - t[a])
            };
        }
    }
    if hull.len() == 1 {
        out[0] = v[0];
    }
    out
}

/// Values on the uniform grid `i/(n-1)`, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sampled {
    values: Vec<f64>,
}

impl Sampled {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> Vec<f64> {
        grid(self.values.len())
    }

    fn cell(&self, x: f64) -> usize {
        let n = self.values.len() - 1;
        ((x * n as f64).floor() as usize).min(n - 1)
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let n = self.values.len() - 1;
        let j = self.cell(x);
        let w = x * n as f64 - j as f64;
        if w == 0.0 {
            return self.values[j];
        }
        self.values[j] + w * (self.values[j + 1] - self.values[j])
    }

    fn slope_of(&self, j: usize) -> f64 {
        let n = (self.values.len() - 1) as f64;
        (self.values[j + 1] - self.values[j]) * n
    }

    pub fn right_slope(&self, x: f64) -> f64 {
        self.slope_of(self.cell(x.clamp(0.0, 1.0)))
    }

    pub fn left_slope(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let n = (self.values.len() - 1) as f64;
        let j = ((x * n).ceil() as usize).max(1) - 1;
        self.slope_of(j.min(self.values.len() - 2))
    }
}

/// Uniform grid of `n` points on `[0, 1]`.
pub fn grid(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|i| i as f64 / m).collect()
}

/// The angular function of a bivariate tail dependence function.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AngularFunction {
    PiecewiseLinear(PiecewiseLinear),
    /// `alpha = ∞` is the comonotone limit.
    Clayton { alpha: f64 },
    Comonotone,
    Independence,
    Plateau { p: f64 },
    Sampled(Sampled),
}

impl AngularFunction {
    pub fn piecewise_linear(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(AngularFunction::PiecewiseLinear(PiecewiseLinear::new(t, v)?))
    }

    pub fn clayton(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::spec("alpha", format!("Clayton parameter must lie in (0, ∞], got {alpha}")));
        }
        Ok(AngularFunction::Clayton { alpha })
    }

    pub fn plateau(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::spec("p", format!("plateau level must lie in [0, 1/2], got {p}")));
        }
        Ok(AngularFunction::Plateau { p })
    }

    /// `λ̂(t) = min(αt, β(1-t))`, i.e. `Λ(w) = min(αw₁, βw₂)`.
    pub fn linear_min(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::spec("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::spec("beta", format!("must lie in (0, 1], got {beta}")));
        }
        let k = beta / (alpha + beta);
        Self::piecewise_linear(vec![0.0, k, 1.0], vec![0.0, alpha * k, 0.0])
    }

    /// Grid values taken as they are.
    pub fn sampled_raw(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::spec("values", "a sampled angular function needs at least 3 points"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::spec("values", "values must be finite"));
        }
        Ok(AngularFunction::Sampled(Sampled { values }))
    }

    /// Grid values projected onto the admissible class: endpoints pinned
    /// to 0, least concave majorant, clipped by `min(t, 1-t)`.
    pub fn sampled(values: Vec<f64>) -> Result<Self> {
        let raw = Self::sampled_raw(values)?;
        let AngularFunction::Sampled(s) = raw else { unreachable!() };
        let n = s.values.len();
        let g = grid(n);
        let mut v = s.values;
        v[0] = 0.0;
        v[n - 1] = 0.0;
        let maj = concave_majorant(&g, &v);
        let v = maj
            .iter()
            .zip(&g)
            .map(|(&y, &t)| y.max(0.0).min(t.min(1.0 - t)))
            .collect();
        Ok(AngularFunction::Sampled(Sampled { values: v }))
    }

    /// Samples `f` on `n` grid points and projects.
    pub fn sample<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<Self> {
        Self::sampled(grid(n).into_iter().map(f).collect())
    }

    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            AngularFunction::PiecewiseLinear(pl) => pl.value(t),
            AngularFunction::Clayton { alpha } => clayton_value(*alpha, t, 1.0 - t),
            AngularFunction::Comonotone => t.min(1.0 - t),
            AngularFunction::Independence => 0.0,
            AngularFunction::Plateau { p } => t.min(*p).min(1.0 - t),
            AngularFunction::Sampled(s) => s.value(t),
        }
    }

    /// Right slope; at `t = 1` the left slope.
    pub fn right_slope(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t >= 1.0 {
            return self.left_slope(1.0);
        }
        match self {
            AngularFunction::PiecewiseLinear(pl) => pl.right_slope(t),
            AngularFunction::Clayton { alpha } => {
                clayton_d1(*alpha, t, 1.0 - t) - clayton_d1(*alpha, 1.0 - t, t)
            }
            AngularFunction::Comonotone => {
                if t < 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            AngularFunction::Independence => 0.0,
            AngularFunction::Plateau { p } => {
                if t < *p {
                    1.0
                } else if t < 1.0 - *p {
                    0.0
                } else {
                    -1.0
                }
            }
            AngularFunction::Sampled(s) => s.right_slope(t),
        }
    }

    /// Left slope; at `t = 0` the right slope.
    pub fn left_slope(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        if t <= 0.0 {
            return self.right_slope(0.0);
        }
        match self {
            AngularFunction::PiecewiseLinear(pl) => pl.left_slope(t),
            AngularFunction::Clayton { alpha } => {
                clayton_d1(*alpha, t, 1.0 - t) - clayton_d1(*alpha, 1.0 - t, t)
            }
            AngularFunction::Comonotone => {
                if t <= 0.5 {
                    1.0
                } else {
                    -1.0
                }
            }
            AngularFunction::Independence => 0.0,
            AngularFunction::Plateau { p } => {
                if t <= *p {
                    1.0
                } else if t <= 1.0 - *p {
                    0.0
                } else {
                    -1.0
                }
            }
            AngularFunction::Sampled(s) => s.left_slope(t),
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            AngularFunction::PiecewiseLinear(pl) => AngularFunction::PiecewiseLinear(pl.reversed()),
            AngularFunction::Sampled(s) => AngularFunction::Sampled(Sampled {
                values: s.values.iter().rev().copied().collect(),
            }),
            other => other.clone(),
        }
    }

    /// Exact piecewise-linear form, when there is one.
    pub fn as_piecewise_linear(&self) -> Option<PiecewiseLinear> {
        let pl = |t: Vec<f64>, v: Vec<f64>| PiecewiseLinear { t, v };
        match self {
            AngularFunction::PiecewiseLinear(p) => Some(p.clone()),
            AngularFunction::Comonotone => Some(pl(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.0])),
            AngularFunction::Clayton { alpha } if alpha.is_infinite() => {
                Some(pl(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.0]))
            }
            AngularFunction::Independence => Some(pl(vec![0.0, 1.0], vec![0.0, 0.0])),
            AngularFunction::Plateau { p } => Some(if *p == 0.0 {
                pl(vec![0.0, 1.0], vec![0.0, 0.0])
            } else if *p == 0.5 {
                pl(vec![0.0, 0.5, 1.0], vec![0.0, 0.5, 0.0])
            } else {
                pl(vec![0.0, *p, 1.0 - *p, 1.0], vec![0.0, *p, *p, 0.0])
            }),
            AngularFunction::Sampled(s) => Some(pl(s.grid(), s.values.clone()).simplified(0.0)),
            AngularFunction::Clayton { .. } => None,
        }
    }

    /// Kink locations of the representation, excluding the endpoints.
    pub fn kinks(&self) -> Vec<f64> {
        match self.as_piecewise_linear() {
            Some(pl) => pl.t[1..pl.t.len() - 1].to_vec(),
            None => Vec::new(),
        }
    }

    /// Largest value; exact for piecewise-linear forms and Clayton.
    pub fn max_value(&self) -> f64 {
        match self {
            AngularFunction::Clayton { alpha } => clayton_value(*alpha, 0.5, 0.5),
            _ => match self.as_piecewise_linear() {
                Some(pl) => pl.v.iter().copied().fold(0.0, f64::max),
                None => grid(513).into_iter().map(|t| self.value(t)).fold(0.0, f64::max),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            AngularFunction::PiecewiseLinear(pl) => format!("piecewise_linear({} pts)", pl.len()),
            AngularFunction::Clayton { alpha } => format!("clayton(alpha={alpha})"),
            AngularFunction::Comonotone => "comonotone".into(),
            AngularFunction::Independence => "independence".into(),
            AngularFunction::Plateau { p } => format!("plateau(p={p})"),
            AngularFunction::Sampled(s) => format!("sampled({} pts)", s.values.len()),
        }
    }

    fn default_tol(&self) -> f64 {
        match self {
            AngularFunction::Sampled(_) => SAMPLED_TOL,
            _ => STRUCTURAL_TOL,
        }
    }
}

/// `(x^{-α} + y^{-α})^{-1/α}` evaluated from the smaller argument.
fn clayton_value(alpha: f64, x: f64, y: f64) -> f64 {
    let (m, big) = if x <= y { (x, y) } else { (y, x) };
    if m <= 0.0 {
        return 0.0;
    }
    if alpha.is_infinite() {
        return m;
    }
    m * (1.0 + (m / big).powf(alpha)).powf(-1.0 / alpha)
}

/// `∂₁` of the Clayton tail dependence function at `(x, y)`.
fn clayton_d1(alpha: f64, x: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if alpha.is_infinite() {
        return if x < y { 1.0 } else { 0.0 };
    }
    (1.0 + (x / y).powf(alpha)).powf(-1.0 / alpha - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    BoundaryNonzero,
    Negative,
    ExceedsFrechetBound,
    NotConcave,
    SlopeOutOfRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub t: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, inv: Invariant) -> bool {
        self.violations.iter().any(|v| v.invariant == inv)
    }
}

/// Checks boundary zeros, Fréchet bounds, concavity and slope bounds on
/// a grid of `grid_n` points merged with the kinks of the representation.
pub fn validate(candidate: &AngularFunction, grid_n: usize) -> Result<ValidationReport> {
    validate_with_tol(candidate, grid_n, candidate.default_tol())
}

pub fn validate_with_tol(candidate: &AngularFunction, grid_n: usize, tol: f64) -> Result<ValidationReport> {
    if grid_n < 3 {
        return Err(Error::config("grid", "validation grid needs at least 3 points"));
    }
    let mut pts = grid(grid_n);
    pts.extend(candidate.kinks());
    if let AngularFunction::Sampled(s) = candidate {
        pts.extend(s.grid());
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&t| candidate.value(t)).collect();
    let mut violations = Vec::new();
    let n = pts.len();
    for (t, y) in [(pts[0], vals[0]), (pts[n - 1], vals[n - 1])] {
        if y.abs() > tol {
            violations.push(Violation {
                invariant: Invariant::BoundaryNonzero,
                t,
                excess: y.abs(),
            });
        }
    }
    for (&t, &y) in pts.iter().zip(&vals) {
        if y < -tol {
            violations.push(Violation {
                invariant: Invariant::Negative,
                t,
                excess: -y,
            });
        }
        let bound = t.min(1.0 - t);
        if y > bound + tol {
            violations.push(Violation {
                invariant: Invariant::ExceedsFrechetBound,
                t,
                excess: y - bound,
            });
        }
    }
    for i in 1..n - 1 {
        let (a, b, c) = (pts[i - 1], pts[i], pts[i + 1]);
        let chord = (vals[i - 1] * (c - b) + vals[i + 1] * (b - a)) / (c - a);
        if vals[i] < chord - tol {
            violations.push(Violation {
                invariant: Invariant::NotConcave,
                t: b,
                excess: chord - vals[i],
            });
        }
    }
    for i in 0..n - 1 {
        let rise = (vals[i + 1] - vals[i]).abs();
        let run = pts[i + 1] - pts[i];
        if rise > run + tol {
            violations.push(Violation {
                invariant: Invariant::SlopeOutOfRange,
                t: pts[i],
                excess: rise - run,
            });
        }
    }
    Ok(ValidationReport { violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictReport {
    /// `λ̂′(0)`.
    pub slope_at_0: f64,
    /// `λ̂′(1)`.
    pub slope_at_1: f64,
    pub first_margin: bool,
    pub second_margin: bool,
}

impl StrictReport {
    pub fn is_strict(&self) -> bool {
        self.first_margin && self.second_margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroOneClass {
    /// `Λ(w) = min(w₁, αw₂)`.
    ComonotoneScaled { alpha: f64 },
    NotOfThatForm,
}

/// A bivariate tail dependence function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailDependenceFunction {
    angular: AngularFunction,
}

impl TailDependenceFunction {
    /// Wraps an angular function after validating it.
    pub fn new(angular: AngularFunction) -> Result<Self> {
        let report = validate(&angular, 101)?;
        if let Some(v) = report.violations.first() {
            return Err(Error::domain(format!(
                "{} is not a tail dependence function: {:?} at t={} (excess {:.3e})",
                angular.label(),
                v.invariant,
                v.t,
                v.excess
            )));
        }
        Ok(TailDependenceFunction { angular })
    }

    pub(crate) fn from_trusted(angular: AngularFunction) -> Self {
        TailDependenceFunction { angular }
    }

    pub fn comonotone() -> Self {
        Self::from_trusted(AngularFunction::Comonotone)
    }

    pub fn independence() -> Self {
        Self::from_trusted(AngularFunction::Independence)
    }

    pub fn clayton(alpha: f64) -> Result<Self> {
        Ok(Self::from_trusted(AngularFunction::clayton(alpha)?))
    }

    pub fn plateau(p: f64) -> Result<Self> {
        Ok(Self::from_trusted(AngularFunction::plateau(p)?))
    }

    pub fn linear_min(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self::from_trusted(AngularFunction::linear_min(alpha, beta)?))
    }

    pub fn piecewise_linear(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::new(AngularFunction::piecewise_linear(t, v)?)
    }

    pub fn angular(&self) -> &AngularFunction {
        &self.angular
    }

    pub fn label(&self) -> String {
        self.angular.label()
    }

    /// `Λ(w₁, w₂)`.
    pub fn eval(&self, w1: f64, w2: f64) -> Result<f64> {
        check_point(w1, w2)?;
        Ok(self.value(w1, w2))
    }

    /// `Λ(w₁, w₂)` for arguments known to be nonnegative.
    pub fn value(&self, w1: f64, w2: f64) -> f64 {
        if let AngularFunction::Clayton { alpha } = self.angular {
            return clayton_value(alpha, w1, w2);
        }
        let s = w1 + w2;
        if s <= 0.0 {
            return 0.0;
        }
        if s.is_infinite() {
            // limits along the axes
            return if w1.is_infinite() && w2.is_infinite() {
                f64::INFINITY
            } else if w1.is_infinite() {
                -self.angular.left_slope(1.0) * w2
            } else {
                self.angular.right_slope(0.0) * w1
            };
        }
        s * self.angular.value(w1 / s)
    }

    /// One-sided partial derivative (`index` 1 or 2) in the right-derivative
    /// convention.
    pub fn partial(&self, index: usize, w1: f64, w2: f64) -> Result<f64> {
        check_point(w1, w2)?;
        if w1 + w2 <= 0.0 {
            return Err(Error::domain("partial derivative at the origin"));
        }
        match index {
            1 => Ok(self.d1(w1, w2)),
            2 => Ok(self.d2(w1, w2)),
            _ => Err(Error::domain(format!("partial index must be 1 or 2, got {index}"))),
        }
    }

    /// `∂₁Λ(x, y)`; zero at the origin.
    pub fn d1(&self, x: f64, y: f64) -> f64 {
        if let AngularFunction::Clayton { alpha } = self.angular {
            return clayton_d1(alpha, x, y);
        }
        let s = x + y;
        if s <= 0.0 || y <= 0.0 {
            return 0.0;
        }
        if s.is_infinite() {
            return if x.is_infinite() { 0.0 } else { self.angular.right_slope(0.0) };
        }
        let t = x / s;
        // 1 - t rather than y/s so that linear pieces cancel exactly
        self.angular.value(t) + (1.0 - t) * self.angular.right_slope(t)
    }

    /// `∂₂Λ(x, y)`; zero at the origin.
    pub fn d2(&self, x: f64, y: f64) -> f64 {
        if let AngularFunction::Clayton { alpha } = self.angular {
            return clayton_d1(alpha, y, x);
        }
        let s = x + y;
        if s <= 0.0 || x <= 0.0 {
            return 0.0;
        }
        if s.is_infinite() {
            return if y.is_infinite() { 0.0 } else { -self.angular.left_slope(1.0) };
        }
        let t = x / s;
        self.angular.value(t) - (x / s) * self.angular.left_slope(t)
    }

    pub fn transpose(&self) -> Self {
        Self::from_trusted(self.angular.transpose())
    }

    pub fn is_strict(&self, tol: f64) -> StrictReport {
        let s0 = self.angular.right_slope(0.0);
        let s1 = self.angular.left_slope(1.0);
        StrictReport {
            slope_at_0: s0,
            slope_at_1: s1,
            first_margin: (s0 - 1.0).abs() <= tol,
            second_margin: (-s1 - 1.0).abs() <= tol,
        }
    }

    /// Decides whether `∂₁Λ` only takes the values 0 and 1, in which case
    /// `Λ(w) = min(w₁, αw₂)` and `α` is recovered from the jump.
    pub fn classify_zero_one_derivative(&self, tol: f64, grid_n: usize) -> Result<ZeroOneClass> {
        if !(tol > 0.0 && tol < 0.5) {
            return Err(Error::config("tol", "must lie in (0, 1/2)"));
        }
        if grid_n < 3 {
            return Err(Error::config("grid", "at least 3 points are required"));
        }
        let xs: Vec<f64> = grid(grid_n).into_iter().map(|x| 2.0 * x).collect();
        let mut bits = Vec::with_capacity(xs.len());
        for &x in &xs {
            let d = self.d1(x, 1.0);
            if (d - 1.0).abs() <= tol {
                bits.push(true);
            } else if d.abs() <= tol {
                bits.push(false);
            } else {
                return Ok(ZeroOneClass::NotOfThatForm);
            }
        }
        let ones = bits.iter().take_while(|b| **b).count();
        if bits[ones..].iter().any(|b| *b) || ones == bits.len() {
            return Ok(ZeroOneClass::NotOfThatForm);
        }
        let alpha = if ones == 0 {
            0.0
        } else {
            let (mut lo, mut hi) = (xs[ones - 1], xs[ones]);
            while hi - lo > 1e-14 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.d1(mid, 1.0) > 0.5 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        };
        let consistent = xs
            .iter()
            .all(|&x| (self.value(x, 1.0) - x.min(alpha)).abs() <= tol);
        Ok(if consistent {
            ZeroOneClass::ComonotoneScaled { alpha }
        } else {
            ZeroOneClass::NotOfThatForm
        })
    }
}

fn check_point(w1: f64, w2: f64) -> Result<()> {
    if w1.is_nan() || w2.is_nan() || w1 < 0.0 || w2 < 0.0 {
        return Err(Error::domain(format!("point ({w1}, {w2}) is not in the positive orthant")));
    }
    Ok(())
}
