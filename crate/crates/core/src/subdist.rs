//! Subdistribution functions: 2-increasing, grounded, `Λ⁺`-bounded and
//! Lipschitz-1 functions on the positive quadrant. Homogeneous ones are
//! tail dependence functions.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{one_sided_derivative, DiffSchedule, Side};
use crate::tdf::{AngularFunction, TailDependenceFunction};

type Eval2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A generic evaluator with a declared support box: the function is
/// constant in `x` beyond `support.0` and in `y` beyond `support.1`.
#[derive(Clone)]
pub struct Kernel {
    label: String,
    f: Eval2,
    d1: Option<Eval2>,
    d2: Option<Eval2>,
    support: (f64, f64),
    hints: Vec<f64>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

impl Kernel {
    pub fn new<F>(label: impl Into<String>, support: (f64, f64), f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(support.0 > 0.0 && support.1 > 0.0) {
            return Err(Error::spec("support", "support box must have positive sides"));
        }
        Ok(Kernel {
            label: label.into(),
            f: Arc::new(f),
            d1: None,
            d2: None,
            support,
            hints: Vec::new(),
        })
    }

    /// Supplies closed-form right partial derivatives.
    pub fn with_partials<D1, D2>(mut self, d1: D1, d2: D2) -> Self
    where
        D1: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self.d2 = Some(Arc::new(d2));
        self
    }

    /// Points where the partial derivatives may jump, in either variable.
    pub fn with_hints(mut self, hints: Vec<f64>) -> Self {
        self.hints = hints;
        self
    }

    fn transpose(&self) -> Self {
        let f = self.f.clone();
        let d1 = self.d1.clone();
        let d2 = self.d2.clone();
        Kernel {
            label: format!("{}^T", self.label),
            f: Arc::new(move |x, y| f(y, x)),
            d1: d2.map(|g| -> Eval2 { Arc::new(move |x, y| g(y, x)) }),
            d2: d1.map(|g| -> Eval2 { Arc::new(move |x, y| g(y, x)) }),
            support: (self.support.1, self.support.0),
            hints: self.hints.clone(),
        }
    }
}

fn kernel_diff() -> DiffSchedule {
    DiffSchedule {
        h0: 1e-3,
        ratio: 0.5,
        steps: 10,
    }
}

#[derive(Debug, Clone)]
pub enum SubdistributionFunction {
    Tdf(TailDependenceFunction),
    Kernel(Kernel),
}

impl From<TailDependenceFunction> for SubdistributionFunction {
    fn from(t: TailDependenceFunction) -> Self {
        SubdistributionFunction::Tdf(t)
    }
}

impl From<Kernel> for SubdistributionFunction {
    fn from(k: Kernel) -> Self {
        SubdistributionFunction::Kernel(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubdistributionDefects {
    pub min_value: f64,
    pub min_volume: f64,
    pub max_bound_excess: f64,
    pub max_lipschitz_excess: f64,
}

impl SubdistributionDefects {
    pub fn within(&self, tol: f64) -> bool {
        self.min_value >= -tol
            && self.min_volume >= -tol
            && self.max_bound_excess <= tol
            && self.max_lipschitz_excess <= tol
    }
}

impl SubdistributionFunction {
    /// `F(x, y) = min(x, y, c)`, the comonotone kernel capped at `c`; not
    /// homogeneous.
    pub fn capped_comonotone(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::spec("cap", "cap must be positive and finite"));
        }
        let k = Kernel::new(format!("capped_comonotone(cap={c})"), (c, c), move |x, y| x.min(y).min(c))?
            .with_partials(
                move |x, y| if x < y.min(c) { 1.0 } else { 0.0 },
                move |x, y| if y < x.min(c) { 1.0 } else { 0.0 },
            )
            .with_hints(vec![c]);
        Ok(SubdistributionFunction::Kernel(k))
    }

    pub fn label(&self) -> String {
        match self {
            SubdistributionFunction::Tdf(t) => t.label(),
            SubdistributionFunction::Kernel(k) => k.label.clone(),
        }
    }

    pub fn as_tdf(&self) -> Option<&TailDependenceFunction> {
        match self {
            SubdistributionFunction::Tdf(t) => Some(t),
            SubdistributionFunction::Kernel(_) => None,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        if x.is_nan() || y.is_nan() || x < 0.0 || y < 0.0 {
            return Err(Error::domain(format!("point ({x}, {y}) is not in the positive quadrant")));
        }
        Ok(self.value(x, y))
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            SubdistributionFunction::Tdf(t) => t.value(x, y),
            SubdistributionFunction::Kernel(k) => (k.f)(x.min(k.support.0), y.min(k.support.1)),
        }
    }

    /// Right partial derivative in the first argument; zero at the origin.
    pub fn d1(&self, x: f64, y: f64) -> f64 {
        match self {
            SubdistributionFunction::Tdf(t) => t.d1(x, y),
            SubdistributionFunction::Kernel(k) => {
                if x >= k.support.0 {
                    return 0.0;
                }
                let y = y.min(k.support.1);
                match &k.d1 {
                    Some(d) => d(x, y),
                    None => {
                        let f = &k.f;
                        one_sided_derivative(|s| f(s, y), x, Side::Right, &kernel_diff()).slope
                    }
                }
            }
        }
    }

    /// Right partial derivative in the second argument; zero at the origin.
    pub fn d2(&self, x: f64, y: f64) -> f64 {
        match self {
            SubdistributionFunction::Tdf(t) => t.d2(x, y),
            SubdistributionFunction::Kernel(k) => {
                if y >= k.support.1 {
                    return 0.0;
                }
                let x = x.min(k.support.0);
                match &k.d2 {
                    Some(d) => d(x, y),
                    None => {
                        let f = &k.f;
                        one_sided_derivative(|s| f(x, s), y, Side::Right, &kernel_diff()).slope
                    }
                }
            }
        }
    }

    /// Box beyond which the function is constant in each argument.
    pub fn support(&self) -> (f64, f64) {
        match self {
            SubdistributionFunction::Tdf(_) => (f64::INFINITY, f64::INFINITY),
            SubdistributionFunction::Kernel(k) => k.support,
        }
    }

    /// Extra jump locations declared by a kernel.
    pub fn declared_hints(&self) -> Vec<f64> {
        match self {
            SubdistributionFunction::Tdf(_) => Vec::new(),
            SubdistributionFunction::Kernel(k) => k.hints.clone(),
        }
    }

    /// `lim_{y→∞} ∂₁F(x, y)`.
    pub fn d1_at_infinity(&self, x: f64) -> f64 {
        match self {
            SubdistributionFunction::Tdf(t) => t.d1(x, f64::INFINITY),
            SubdistributionFunction::Kernel(k) => self.d1(x, k.support.1),
        }
    }

    pub fn transpose(&self) -> Self {
        match self {
            SubdistributionFunction::Tdf(t) => SubdistributionFunction::Tdf(t.transpose()),
            SubdistributionFunction::Kernel(k) => SubdistributionFunction::Kernel(k.transpose()),
        }
    }

    /// Locations in `t` where `∂₁F(t, w)` may jump.
    pub fn d1_hints(&self, w: f64) -> Vec<f64> {
        match self {
            SubdistributionFunction::Tdf(t) => match t.angular() {
                AngularFunction::Clayton { .. } => vec![w],
                a => a
                    .as_piecewise_linear()
                    .map(|pl| pl.rays().into_iter().map(|r| r * w).collect())
                    .unwrap_or_default(),
            },
            SubdistributionFunction::Kernel(k) => {
                let mut h = vec![w, k.support.0];
                h.extend(k.hints.iter().copied());
                h
            }
        }
    }

    /// A point beyond which `∂₁F(·, w)` vanishes, if there is one.
    pub fn d1_support_end(&self, w: f64) -> Option<f64> {
        match self {
            SubdistributionFunction::Tdf(t) => {
                let pl = t.angular().as_piecewise_linear()?;
                pl.rays().last().map(|r| r * w)
            }
            SubdistributionFunction::Kernel(k) => Some(k.support.0),
        }
    }

    /// Worst defects of the subdistribution invariants over the grid
    /// `points × points` and its rectangles.
    pub fn defects(&self, points: &[f64]) -> SubdistributionDefects {
        let n = points.len();
        let vals: Vec<Vec<f64>> = points
            .iter()
            .map(|&x| points.iter().map(|&y| self.value(x, y)).collect())
            .collect();
        let mut d = SubdistributionDefects {
            min_value: f64::INFINITY,
            min_volume: f64::INFINITY,
            max_bound_excess: f64::NEG_INFINITY,
            max_lipschitz_excess: f64::NEG_INFINITY,
        };
        for i in 0..n {
            for j in 0..n {
                let v = vals[i][j];
                d.min_value = d.min_value.min(v);
                d.max_bound_excess = d.max_bound_excess.max(v - points[i].min(points[j]));
                for k in i..n {
                    for l in j..n {
                        if k == i && l == j {
                            continue;
                        }
                        let lip = (vals[k][l] - v).abs() - (points[k] - points[i]) - (points[l] - points[j]);
                        d.max_lipschitz_excess = d.max_lipschitz_excess.max(lip);
                        if k > i && l > j {
                            let vol = vals[k][l] - vals[i][l] - vals[k][j] + v;
                            d.min_volume = d.min_volume.min(vol);
                        }
                    }
                }
            }
        }
        d
    }
}
