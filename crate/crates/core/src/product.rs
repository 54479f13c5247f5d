//! Markov products of tail dependence and subdistribution functions:
//! `Λ₁ * Λ₂`, the generalized product `φ_C` and the C-lifting.

use std::sync::OnceLock;

use serde::Serialize;

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_halfline_split, integrate_interval, one_sided_derivative, one_sided_derivative_aitken, DiffSchedule, QuadratureConfig, Side,
};
use crate::step::StepFunction;
use crate::subdist::{Kernel, SubdistributionFunction};
use crate::tdf::{grid, validate, AngularFunction, PiecewiseLinear, TailDependenceFunction, ValidationReport};

/// Grid size of sampled angular representations.
pub const ANGULAR_GRID: usize = 513;
/// Above this many kink candidates the angular form is sampled instead.
const MAX_EXACT_CANDIDATES: usize = 10_000;
const CANDIDATE_DEDUP: f64 = 1e-12;
const SIMPLIFY_TOL: f64 = 1e-14;
const THRESHOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
}

/// Evaluation path selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Exact breakpoint integration or closed forms when available.
    #[default]
    Auto,
    /// Always integrate numerically.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub operands: Vec<String>,
    pub copula: String,
    pub method: Method,
}

/// Anything that can enter a Markov product.
pub trait Operand {
    fn to_subdistribution(&self) -> SubdistributionFunction;
}

impl Operand for TailDependenceFunction {
    fn to_subdistribution(&self) -> SubdistributionFunction {
        SubdistributionFunction::Tdf(self.clone())
    }
}

impl Operand for SubdistributionFunction {
    fn to_subdistribution(&self) -> SubdistributionFunction {
        self.clone()
    }
}

#[derive(Debug, Clone)]
struct PlFactor {
    pl: PiecewiseLinear,
    sampled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extreme {
    Lower,
    Product,
    Upper,
}

#[derive(Debug, Clone)]
enum Engine {
    /// All factors piecewise-linear: the integrand is a step function.
    Steps {
        copula: Copula,
        factors: Vec<PlFactor>,
        cap: Option<f64>,
    },
    /// First factor `min(a·w₁, b·w₂)`, extreme copula; arguments swapped
    /// when the `M⁺` factor was given second.
    MPlus {
        kind: Extreme,
        a: f64,
        b: f64,
        other: TailDependenceFunction,
        swapped: bool,
    },
    Quadrature {
        copula: Copula,
        factors: Vec<SubdistributionFunction>,
        cap: Option<f64>,
        cfg: QuadratureConfig,
    },
    /// An already materialized tail dependence function.
    Tdf(TailDependenceFunction),
}

/// A lazily evaluated product.
#[derive(Debug, Clone)]
pub struct ProductResult {
    engine: Engine,
    homogeneous: bool,
    provenance: Provenance,
    angular: OnceLock<Result<AngularFunction>>,
}

impl ProductResult {
    fn new(engine: Engine, homogeneous: bool, provenance: Provenance) -> Self {
        ProductResult {
            engine,
            homogeneous,
            provenance,
            angular: OnceLock::new(),
        }
    }

    /// Wraps a materialized function, e.g. a Cesàro mean.
    pub fn from_tdf(tdf: TailDependenceFunction, operands: Vec<String>, copula: impl Into<String>) -> Self {
        let provenance = Provenance {
            operands,
            copula: copula.into(),
            method: Method::Exact,
        };
        ProductResult::new(Engine::Tdf(tdf), true, provenance)
    }

    pub fn dim(&self) -> usize {
        match &self.engine {
            Engine::Steps { factors, .. } => factors.len(),
            Engine::MPlus { .. } | Engine::Tdf(_) => 2,
            Engine::Quadrature { factors, .. } => factors.len(),
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn method(&self) -> Method {
        self.provenance.method
    }

    pub fn label(&self) -> String {
        if self.provenance.copula == "product" && self.provenance.operands.len() == 2 && self.homogeneous {
            format!("({} * {})", self.provenance.operands[0], self.provenance.operands[1])
        } else {
            format!("phi[{}]({})", self.provenance.copula, self.provenance.operands.join(", "))
        }
    }

    /// Whether the result is a tail dependence function (homogeneous and
    /// bivariate).
    pub fn is_tdf(&self) -> bool {
        self.homogeneous && self.dim() == 2
    }

    pub fn eval(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(Error::domain(format!("expected {} coordinates, got {}", self.dim(), w.len())));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::domain(format!("point {w:?} is not in the positive orthant")));
        }
        self.value(w)
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        match &self.engine {
            Engine::Steps { copula, factors, cap } => {
                let steps: Vec<StepFunction> = factors.iter().zip(w).map(|(f, &x)| f.pl.d1_step(x)).collect();
                steps_integral(copula, &steps, *cap)
            }
            Engine::MPlus {
                kind,
                a,
                b,
                other,
                swapped,
            } => {
                let (w1, w2) = if *swapped { (w[1], w[0]) } else { (w[0], w[1]) };
                Ok(mplus_value(*kind, *a, *b, other, w1, w2))
            }
            Engine::Quadrature {
                copula,
                factors,
                cap,
                cfg,
            } => quadrature_value(copula, factors, *cap, cfg, w),
            Engine::Tdf(t) => Ok(t.value(w[0], w[1])),
        }
    }

    /// Angular function of a bivariate homogeneous result: exact for
    /// piecewise-linear factors, otherwise sampled on [`ANGULAR_GRID`]
    /// points and projected.
    pub fn angular(&self) -> Result<AngularFunction> {
        self.angular.get_or_init(|| self.build_angular()).clone()
    }

    fn build_angular(&self) -> Result<AngularFunction> {
        if !self.is_tdf() {
            return Err(Error::Unsupported(format!("{} is not a tail dependence function", self.label())));
        }
        if let Engine::Tdf(t) = &self.engine {
            return Ok(t.angular().clone());
        }
        if let Engine::Steps { factors, .. } = &self.engine {
            if !factors.iter().any(|f| f.sampled) {
                let cands = kink_candidates(&factors[0].pl, &factors[1].pl);
                if cands.len() <= MAX_EXACT_CANDIDATES {
                    let mut v = Vec::with_capacity(cands.len());
                    for &t in &cands {
                        v.push(self.value(&[t, 1.0 - t])?.max(0.0));
                    }
                    let last = v.len() - 1;
                    v[0] = 0.0;
                    v[last] = 0.0;
                    let pl = PiecewiseLinear::new(cands, v)?.simplified(SIMPLIFY_TOL);
                    return Ok(AngularFunction::PiecewiseLinear(pl));
                }
            }
        }
        let mut values = Vec::with_capacity(ANGULAR_GRID);
        for t in grid(ANGULAR_GRID) {
            values.push(self.value(&[t, 1.0 - t])?);
        }
        AngularFunction::sampled(values)
    }

    pub fn to_tdf(&self) -> Result<TailDependenceFunction> {
        Ok(TailDependenceFunction::from_trusted(self.angular()?))
    }

    /// Checks the tail dependence invariants of the angular form.
    pub fn validate(&self, grid_n: usize) -> Result<ValidationReport> {
        validate(&self.angular()?, grid_n)
    }

    /// Right partial derivative of a bivariate result.
    pub fn partial(&self, index: usize, w1: f64, w2: f64) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("partials are only provided for bivariate results".into()));
        }
        if self.is_tdf() {
            return self.to_tdf()?.partial(index, w1, w2);
        }
        self.eval(&[w1, w2])?;
        let mut err = None;
        let mut f = |s: f64| {
            let p = if index == 1 { [s, w2] } else { [w1, s] };
            self.value(&p).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        };
        let x = if index == 1 { w1 } else { w2 };
        let d = one_sided_derivative(&mut f, x, Side::Right, &DiffSchedule::default());
        match err {
            Some(e) => Err(e),
            None => Ok(d.slope),
        }
    }

    /// The bivariate result as a subdistribution function.
    pub fn to_subdistribution(&self) -> Result<SubdistributionFunction> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("only bivariate results are subdistribution functions".into()));
        }
        if self.is_tdf() {
            return Ok(SubdistributionFunction::Tdf(self.to_tdf()?));
        }
        let (support, hints) = match &self.engine {
            Engine::Quadrature { factors, .. } => {
                let s = (factors[0].support().1, factors[1].support().1);
                let mut h: Vec<f64> = factors.iter().flat_map(|f| f.declared_hints()).collect();
                h.extend(factors.iter().flat_map(|f| [f.support().0, f.support().1]));
                h.retain(|x| x.is_finite());
                (s, h)
            }
            _ => ((f64::INFINITY, f64::INFINITY), Vec::new()),
        };
        let me = self.clone();
        let k = Kernel::new(self.label(), support, move |x, y| me.value(&[x, y]).unwrap_or(f64::NAN))?
            .with_hints(hints);
        Ok(SubdistributionFunction::Kernel(k))
    }
}

impl Operand for ProductResult {
    /// Panics if the result is not bivariate or cannot be evaluated.
    fn to_subdistribution(&self) -> SubdistributionFunction {
        ProductResult::to_subdistribution(self).expect("bivariate product result")
    }
}

/// `∫ C(f₁(t), …, f_d(t)) dt` over `[0, cap]` for step functions vanishing
/// beyond their last break.
fn steps_integral(copula: &Copula, steps: &[StepFunction], cap: Option<f64>) -> Result<f64> {
    let mut end = cap.unwrap_or(f64::INFINITY);
    for s in steps {
        if s.is_compact() {
            end = end.min(s.end());
        }
    }
    if !end.is_finite() {
        return Err(Error::Unsupported("step integrand without compact support".into()));
    }
    if end <= 0.0 {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = steps
        .iter()
        .flat_map(|s| s.breaks().iter().copied())
        .filter(|&b| b > 0.0 && b < end)
        .collect();
    pts.push(0.0);
    pts.push(end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut args = vec![0.0; steps.len()];
    let mut sum = 0.0;
    for w in pts.windows(2) {
        for (a, s) in args.iter_mut().zip(steps) {
            *a = s.eval(w[0]);
        }
        if args.iter().all(|&a| a > 0.0) {
            sum += copula.value(&args)? * (w[1] - w[0]);
        }
    }
    Ok(sum)
}

fn quadrature_value(
    copula: &Copula,
    factors: &[SubdistributionFunction],
    cap: Option<f64>,
    cfg: &QuadratureConfig,
    w: &[f64],
) -> Result<f64> {
    let mut end = cap.unwrap_or(f64::INFINITY);
    let mut hints = Vec::new();
    for (f, &x) in factors.iter().zip(w) {
        if x <= 0.0 {
            return Ok(0.0);
        }
        hints.extend(f.d1_hints(x));
        if let Some(e) = f.d1_support_end(x) {
            end = end.min(e);
        }
    }
    if end <= 0.0 {
        return Ok(0.0);
    }
    let mut args = vec![0.0; factors.len()];
    let mut err = None;
    let g = |t: f64| {
        for ((a, f), &x) in args.iter_mut().zip(factors).zip(w) {
            *a = f.d1(t, x);
        }
        match copula.value(&args) {
            Ok(y) => y,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = if end.is_finite() {
        integrate_interval(g, 0.0, end, &hints, cfg)
    } else {
        integrate_halfline_split(g, &hints, cfg)
    };
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value)
}

/// Angles at which the ordering of the breaks of `∂₁Λ₁(·, τ)` and
/// `∂₁Λ₂(·, 1-τ)` can change, plus the endpoints.
fn kink_candidates(f1: &PiecewiseLinear, f2: &PiecewiseLinear) -> Vec<f64> {
    let r1 = f1.rays();
    let r2 = f2.rays();
    let mut c = vec![0.0, 1.0];
    for &a in &r1 {
        for &b in &r2 {
            if a + b > 0.0 {
                c.push(b / (a + b));
            }
        }
    }
    c.sort_by(f64::total_cmp);
    c.dedup_by(|b, a| (*b - *a).abs() <= CANDIDATE_DEDUP);
    *c.last_mut().unwrap() = 1.0;
    c
}

/// `(a, b)` with `Λ(w) = min(a·w₁, b·w₂)`, if `Λ` has that form.
fn mplus_form(tdf: &TailDependenceFunction) -> Option<(f64, f64)> {
    if let AngularFunction::Clayton { alpha } = tdf.angular() {
        if alpha.is_finite() {
            return None;
        }
    }
    let pl = tdf.angular().as_piecewise_linear()?;
    let (t, v) = (pl.t(), pl.v());
    if pl.len() == 3 && v[0] == 0.0 && v[2] == 0.0 && v[1] > 0.0 {
        Some((v[1] / t[1], v[1] / (1.0 - t[1])))
    } else {
        None
    }
}

/// Boundary of `{t ∈ [0, cap] : g(t) > 0}` for nonincreasing `g`; the
/// left endpoint of a flat zero piece.
fn threshold<G: Fn(f64) -> f64>(g: G, cap: f64) -> f64 {
    if g(0.0) <= 0.0 {
        return 0.0;
    }
    if g(cap) > 0.0 {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    let tol = THRESHOLD_TOL * cap.max(1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn mplus_value(kind: Extreme, a: f64, b: f64, other: &TailDependenceFunction, w1: f64, w2: f64) -> f64 {
    if w1 <= 0.0 || w2 <= 0.0 {
        return 0.0;
    }
    let cap = b * w1 / a;
    match kind {
        Extreme::Product => other.value(b * w1, a * w2),
        Extreme::Upper => {
            let p = threshold(|t| other.d1(t, w2) - a, cap);
            a * p + other.value(cap, w2) - other.value(p, w2)
        }
        Extreme::Lower => {
            let p = threshold(|t| other.d1(t, w2) + a - 1.0, cap);
            ((a - 1.0) * p + other.value(p, w2)).max(0.0)
        }
    }
}

fn extreme_kind(c: &Copula) -> Option<Extreme> {
    match c {
        Copula::LowerFrechet => Some(Extreme::Lower),
        Copula::Product => Some(Extreme::Product),
        Copula::UpperFrechet => Some(Extreme::Upper),
        _ => None,
    }
}

fn exact_copula(c: &Copula) -> bool {
    match c {
        Copula::MarkovProduct { .. } | Copula::Lifted { .. } => false,
        Copula::Permuted { base, .. } => exact_copula(base),
        _ => true,
    }
}

fn pl_factor(f: &SubdistributionFunction) -> Option<PlFactor> {
    let a = f.as_tdf()?.angular();
    Some(PlFactor {
        pl: a.as_piecewise_linear()?,
        sampled: matches!(a, AngularFunction::Sampled(_)),
    })
}

fn build(
    copula: &Copula,
    factors: Vec<SubdistributionFunction>,
    labels: Vec<String>,
    cap: Option<f64>,
    strategy: Strategy,
    cfg: &QuadratureConfig,
) -> Result<ProductResult> {
    cfg.check()?;
    let d = factors.len();
    if d < 2 {
        return Err(Error::domain("a product needs at least two factors"));
    }
    if !copula.accepts(d) {
        return Err(Error::domain(format!("{} cannot take {d} arguments", copula.label())));
    }
    if let Some(c) = cap {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::domain(format!("lifting cap must be finite and nonnegative, got {c}")));
        }
    }
    let homogeneous = cap.is_none() && factors.iter().all(|f| f.as_tdf().is_some());
    let provenance = |method| Provenance {
        operands: labels.clone(),
        copula: copula.label(),
        method,
    };
    if strategy == Strategy::Auto {
        let pls: Option<Vec<PlFactor>> = factors.iter().map(pl_factor).collect();
        if let Some(pls) = pls {
            let method = if exact_copula(copula) { Method::Exact } else { Method::Quadrature };
            let engine = Engine::Steps {
                copula: copula.clone(),
                factors: pls,
                cap,
            };
            return Ok(ProductResult::new(engine, homogeneous, provenance(method)));
        }
        if let (Some(kind), true, None) = (extreme_kind(copula), d == 2, cap) {
            let tdfs: Option<Vec<&TailDependenceFunction>> = factors.iter().map(|f| f.as_tdf()).collect();
            if let Some(t) = tdfs {
                let forms = [mplus_form(t[0]), mplus_form(t[1])];
                let pick = match forms {
                    [Some((a, b)), _] => Some((a, b, t[1].clone(), false)),
                    [None, Some((a, b))] => Some((a, b, t[0].clone(), true)),
                    _ => None,
                };
                if let Some((a, b, other, swapped)) = pick {
                    let engine = Engine::MPlus {
                        kind,
                        a,
                        b,
                        other,
                        swapped,
                    };
                    return Ok(ProductResult::new(engine, true, provenance(Method::Exact)));
                }
            }
        }
    }
    let engine = Engine::Quadrature {
        copula: copula.clone(),
        factors,
        cap,
        cfg: *cfg,
    };
    Ok(ProductResult::new(engine, homogeneous, provenance(Method::Quadrature)))
}

/// `Λ₁ * Λ₂ = φ_Π(Λ₁ᵀ, Λ₂)`, also for subdistribution functions.
pub fn star_product<A: Operand + ?Sized, B: Operand + ?Sized>(a: &A, b: &B) -> Result<ProductResult> {
    star_product_with(a, b, Strategy::Auto, &QuadratureConfig::default())
}

pub fn star_product_with<A: Operand + ?Sized, B: Operand + ?Sized>(
    a: &A,
    b: &B,
    strategy: Strategy,
    cfg: &QuadratureConfig,
) -> Result<ProductResult> {
    let fa = a.to_subdistribution();
    let fb = b.to_subdistribution();
    let labels = vec![fa.label(), fb.label()];
    build(&Copula::Product, vec![fa.transpose(), fb], labels, None, strategy, cfg)
}

/// `φ_C(Λ₁, …, Λ_d)(w) = ∫₀^∞ C(∂₁Λ₁(t, w₁), …, ∂₁Λ_d(t, w_d)) dt`.
pub fn generalized_product(c: &Copula, factors: &[TailDependenceFunction]) -> Result<ProductResult> {
    let f: Vec<SubdistributionFunction> = factors.iter().map(|t| t.to_subdistribution()).collect();
    generalized_product_with(c, &f, Strategy::Auto, &QuadratureConfig::default())
}

pub fn generalized_product_with(
    c: &Copula,
    factors: &[SubdistributionFunction],
    strategy: Strategy,
    cfg: &QuadratureConfig,
) -> Result<ProductResult> {
    let labels = factors.iter().map(|f| f.label()).collect();
    build(c, factors.to_vec(), labels, None, strategy, cfg)
}

/// The C-lifting `φ_C^{w₀}(Λ₁, …, Λ_d)`, a function of `(w₁, …, w_d)` for
/// the fixed cap `w₀`.
pub fn lifting(c: &Copula, factors: &[TailDependenceFunction], w0: f64) -> Result<ProductResult> {
    lifting_with(c, factors, w0, Strategy::Auto, &QuadratureConfig::default())
}

pub fn lifting_with(
    c: &Copula,
    factors: &[TailDependenceFunction],
    w0: f64,
    strategy: Strategy,
    cfg: &QuadratureConfig,
) -> Result<ProductResult> {
    let f: Vec<SubdistributionFunction> = factors.iter().map(|t| t.to_subdistribution()).collect();
    let labels = factors.iter().map(|f| f.label()).collect();
    build(c, f, labels, Some(w0), strategy, cfg)
}

/// Generalized product restricted to piecewise-linear factors, evaluated
/// by breakpoint merging.
pub fn exact_pl_product(c: &Copula, factors: &[TailDependenceFunction]) -> Result<ProductResult> {
    if let Some(f) = factors.iter().find(|f| f.angular().as_piecewise_linear().is_none()) {
        return Err(Error::Unsupported(format!("{} has no piecewise-linear form", f.label())));
    }
    if !exact_copula(c) {
        return Err(Error::Unsupported(format!("{} has no exact evaluation", c.label())));
    }
    generalized_product(c, factors)
}

/// One-sided slopes of `τ ↦ φ(τ, 1-τ)` at 0 and 1, from difference
/// quotients of the evaluator with Aitken acceleration.
pub fn angular_boundary_slopes(p: &ProductResult) -> Result<(f64, f64)> {
    if p.dim() != 2 {
        return Err(Error::Unsupported("boundary slopes need a bivariate result".into()));
    }
    let mut err = None;
    let mut f = |t: f64| {
        p.value(&[t, 1.0 - t]).unwrap_or_else(|e| {
            err.get_or_insert(e);
            f64::NAN
        })
    };
    let sched = DiffSchedule {
        steps: 24,
        ..DiffSchedule::default()
    };
    let s0 = one_sided_derivative_aitken(&mut f, 0.0, Side::Right, &sched).slope;
    let s1 = one_sided_derivative_aitken(&mut f, 1.0, Side::Left, &sched).slope;
    match err {
        Some(e) => Err(e),
        None => Ok((s0, s1)),
    }
}
