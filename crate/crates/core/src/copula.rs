//! Copula families, their partial derivatives, the Darsow product, the
//! C-lifting and the extraction of lower tail dependence functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    central_derivative, extrapolate_limit, integrate_interval, LimitEstimate, LimitSchedule, QuadratureConfig,
};
use crate::tdf::TailDependenceFunction;

/// Quadrature settings for copula-level integrals over `[0, 1]`.
pub fn copula_quadrature() -> QuadratureConfig {
    QuadratureConfig {
        tol: 1e-12,
        max_subdivisions: 4000,
        compactify: false,
    }
}

const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Copula {
    /// `C⁻(u, v) = max(u + v - 1, 0)`; bivariate only.
    LowerFrechet,
    /// `Π(u) = ∏ uᵢ`.
    Product,
    /// `C⁺(u) = min uᵢ`.
    UpperFrechet,
    Clayton { theta: f64 },
    /// Survival copula of the extreme-value copula built from `tdf`; its
    /// lower tail dependence function is `tdf`.
    EvSurvival { tdf: TailDependenceFunction },
    /// Darsow product `left * right`, evaluated lazily by quadrature.
    MarkovProduct { left: Box<Copula>, right: Box<Copula> },
    /// C-lifting of bivariate factors, a function of `(u₀, v₁, …, v_d)`.
    Lifted { base: Box<Copula>, factors: Vec<Copula> },
    /// `C^π(u) = C(u_{π(1)}, …, u_{π(d)})`.
    Permuted { base: Box<Copula>, perm: Vec<usize> },
}

impl Copula {
    pub fn clayton(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::spec("theta", format!("Clayton parameter must be positive, got {theta}")));
        }
        Ok(Copula::Clayton { theta })
    }

    pub fn ev_survival(tdf: TailDependenceFunction) -> Self {
        Copula::EvSurvival { tdf }
    }

    pub fn markov_product(left: Copula, right: Copula) -> Result<Self> {
        for (name, c) in [("left", &left), ("right", &right)] {
            if !c.accepts(2) {
                return Err(Error::spec(name, "Markov product factors must be bivariate"));
            }
        }
        Ok(Copula::MarkovProduct {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn lifted(base: Copula, factors: Vec<Copula>) -> Result<Self> {
        if !base.accepts(factors.len()) {
            return Err(Error::spec("base", format!("base copula cannot take {} arguments", factors.len())));
        }
        if factors.iter().any(|f| !f.accepts(2)) {
            return Err(Error::spec("factors", "lifting factors must be bivariate"));
        }
        Ok(Copula::Lifted {
            base: Box::new(base),
            factors,
        })
    }

    pub fn permuted(base: Copula, perm: Vec<usize>) -> Result<Self> {
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &p)| i != p) || !base.accepts(perm.len()) {
            return Err(Error::spec("perm", "not a permutation of the copula arguments"));
        }
        Ok(Copula::Permuted {
            base: Box::new(base),
            perm,
        })
    }

    /// Fixed arity, or `None` for families defined in every dimension.
    pub fn arity(&self) -> Option<usize> {
        match self {
            Copula::Product | Copula::UpperFrechet | Copula::Clayton { .. } => None,
            Copula::LowerFrechet | Copula::EvSurvival { .. } | Copula::MarkovProduct { .. } => Some(2),
            Copula::Lifted { factors, .. } => Some(factors.len() + 1),
            Copula::Permuted { perm, .. } => Some(perm.len()),
        }
    }

    pub fn accepts(&self, d: usize) -> bool {
        d >= 2 && self.arity().map_or(true, |a| a == d)
    }

    pub fn label(&self) -> String {
        match self {
            Copula::LowerFrechet => "lower_frechet".into(),
            Copula::Product => "product".into(),
            Copula::UpperFrechet => "upper_frechet".into(),
            Copula::Clayton { theta } => format!("clayton(theta={theta})"),
            Copula::EvSurvival { tdf } => format!("ev_survival[{}]", tdf.label()),
            Copula::MarkovProduct { left, right } => format!("({} * {})", left.label(), right.label()),
            Copula::Lifted { base, factors } => format!(
                "lifted[{}]({})",
                base.label(),
                factors.iter().map(|f| f.label()).collect::<Vec<_>>().join(", ")
            ),
            Copula::Permuted { base, perm } => format!("{}^{:?}", base.label(), perm),
        }
    }

    /// Transpose of a bivariate copula.
    pub fn transpose(&self) -> Copula {
        match self {
            Copula::LowerFrechet | Copula::Product | Copula::UpperFrechet | Copula::Clayton { .. } => self.clone(),
            Copula::EvSurvival { tdf } => Copula::EvSurvival { tdf: tdf.transpose() },
            Copula::MarkovProduct { left, right } => Copula::MarkovProduct {
                left: Box::new(right.transpose()),
                right: Box::new(left.transpose()),
            },
            Copula::Permuted { base, perm } if perm == &[1, 0] => (**base).clone(),
            other => Copula::Permuted {
                base: Box::new(other.clone()),
                perm: vec![1, 0],
            },
        }
    }

    /// `C(u)`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if !self.accepts(u.len()) {
            return Err(Error::domain(format!("{} cannot be evaluated at {} arguments", self.label(), u.len())));
        }
        if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::domain(format!("point {u:?} is outside the unit cube")));
        }
        self.value(u)
    }

    pub(crate) fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(match self {
            Copula::LowerFrechet => (u[0] + u[1] - 1.0).max(0.0),
            Copula::Product => u.iter().product(),
            Copula::UpperFrechet => u.iter().copied().fold(1.0, f64::min),
            Copula::Clayton { theta } => {
                if u.iter().any(|&x| x <= 0.0) {
                    0.0
                } else {
                    let s: f64 = u.iter().map(|x| x.powf(-theta)).sum::<f64>() - (u.len() as f64 - 1.0);
                    s.powf(-1.0 / theta)
                }
            }
            Copula::EvSurvival { tdf } => ev_survival_value(tdf, u[0], u[1]),
            Copula::MarkovProduct { left, right } => markov_value(left, right, u[0], u[1])?,
            Copula::Lifted { base, factors } => lift_value(base, factors, u[0], &u[1..])?,
            Copula::Permuted { base, perm } => {
                let v: Vec<f64> = perm.iter().map(|&i| u[i]).collect();
                base.value(&v)?
            }
        })
    }

    /// Right partial derivative of a bivariate copula in argument
    /// `index` (1 or 2).
    pub fn partial(&self, index: usize, u: f64, v: f64) -> Result<f64> {
        if !self.accepts(2) {
            return Err(Error::domain(format!("{} is not bivariate", self.label())));
        }
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("point ({u}, {v}) is outside the unit square")));
        }
        match index {
            1 => self.d1(u, v),
            2 => self.transpose().d1(v, u),
            _ => Err(Error::domain(format!("partial index must be 1 or 2, got {index}"))),
        }
    }

    fn d1(&self, u: f64, v: f64) -> Result<f64> {
        Ok(match self {
            Copula::LowerFrechet => {
                if v > 0.0 && u + v >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Copula::Product => v,
            Copula::UpperFrechet => {
                if u < v {
                    1.0
                } else {
                    0.0
                }
            }
            Copula::Clayton { theta } => {
                if v <= 0.0 {
                    0.0
                } else if u <= 0.0 {
                    1.0
                } else {
                    (1.0 + u.powf(*theta) * (v.powf(-theta) - 1.0)).powf(-1.0 - 1.0 / theta)
                }
            }
            Copula::EvSurvival { tdf } => ev_survival_d1(tdf, u, v),
            Copula::Permuted { base, perm } if perm == &[1, 0] => base.transpose().d1(u, v)?,
            other => {
                let mut err = None;
                let d = central_derivative(
                    |x| match other.value(&[x, v]) {
                        Ok(y) => y,
                        Err(e) => {
                            err.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    u,
                    FD_STEP,
                    0.0,
                    1.0,
                );
                if let Some(e) = err {
                    return Err(e);
                }
                d.clamp(0.0, 1.0)
            }
        })
    }

    /// Jumps of `t ↦ ∂₁C(t, v)` coming from kinks of a piecewise-linear
    /// angular function.
    fn d1_jumps(&self, v: f64) -> Vec<f64> {
        let tdf = match self {
            Copula::EvSurvival { tdf } => tdf,
            _ => return Vec::new(),
        };
        let y = -(-v).ln_1p();
        if !(y > 0.0 && y.is_finite()) {
            return Vec::new();
        }
        tdf.angular()
            .kinks()
            .into_iter()
            .map(|k| -(-y * k / (1.0 - k)).exp_m1())
            .filter(|t| *t > 0.0 && *t < 1.0)
            .collect()
    }

    /// Kinks of `t ↦ ∂₁C(t, v)` and of `t ↦ ∂₂C(u, t)` near which
    /// quadrature should split.
    fn split_points(u: f64, v: f64) -> Vec<f64> {
        let mut pts = Vec::new();
        for x in [u, v] {
            pts.push(x);
            pts.push(1.0 - x);
            for k in [0.125, 0.25, 0.5, 2.0, 4.0, 8.0] {
                pts.push(x * k);
            }
        }
        pts
    }
}

/// `C(u, v) = u + v − 1 + C^EV(1−u, 1−v)`, written so that the
/// cancellation near the origin stays relative.
fn ev_survival_value(tdf: &TailDependenceFunction, u: f64, v: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    let x = -(-u).ln_1p();
    let y = -(-v).ln_1p();
    let l = x + y - tdf.value(x, y);
    (u + v + (-l).exp_m1()).clamp(0.0, u.min(v))
}

/// `∂₁C(u, v) = 1 − e^{Λ(x,y) − y} (1 − ∂₁Λ(x, y))` with `x = −log(1−u)`,
/// `y = −log(1−v)`.
fn ev_survival_d1(tdf: &TailDependenceFunction, u: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let x = -(-u).ln_1p();
    let y = -(-v).ln_1p();
    if y.is_infinite() {
        return 1.0;
    }
    let lam = tdf.value(x, y);
    let d = if x == 0.0 { tdf.angular().right_slope(0.0) } else { tdf.d1(x, y) };
    (1.0 - (lam - y).exp() * (1.0 - d)).clamp(0.0, 1.0)
}

fn markov_value(left: &Copula, right: &Copula, u: f64, v: f64) -> Result<f64> {
    if u <= 0.0 || v <= 0.0 {
        return Ok(0.0);
    }
    let lt = left.transpose();
    let mut pts = Copula::split_points(u, v);
    pts.extend(lt.d1_jumps(u));
    pts.extend(right.d1_jumps(v));
    let mut err = None;
    let r = integrate_interval(
        |t| {
            let a = lt.d1(t, u);
            let b = right.d1(t, v);
            match (a, b) {
                (Ok(a), Ok(b)) => a * b,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        1.0,
        &pts,
        &copula_quadrature(),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value.clamp(0.0, u.min(v)))
}

fn lift_value(base: &Copula, factors: &[Copula], u0: f64, v: &[f64]) -> Result<f64> {
    if u0 <= 0.0 {
        return Ok(0.0);
    }
    let mut pts = Vec::new();
    for (c, &x) in factors.iter().zip(v) {
        pts.extend(Copula::split_points(x, x));
        pts.extend(c.d1_jumps(x));
    }
    let mut err = None;
    let r = integrate_interval(
        |t| {
            let mut args = Vec::with_capacity(factors.len());
            for (c, &x) in factors.iter().zip(v) {
                match c.d1(t, x) {
                    Ok(d) => args.push(d),
                    Err(e) => {
                        err.get_or_insert(e);
                        return f64::NAN;
                    }
                }
            }
            match base.value(&args) {
                Ok(y) => y,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        u0,
        &pts,
        &copula_quadrature(),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r?.value)
}

/// `C₁ * C₂`.
pub fn markov_product_copulas(c1: &Copula, c2: &Copula) -> Result<Copula> {
    Copula::markov_product(c1.clone(), c2.clone())
}

/// `φ_C^{u₀}(C₁, …, C_d)(v) = ∫₀^{u₀} C(∂₁C₁(t, v₁), …, ∂₁C_d(t, v_d)) dt`.
pub fn lift_copulas(base: &Copula, factors: &[Copula], u0: f64, v: &[f64]) -> Result<f64> {
    if v.len() != factors.len() {
        return Err(Error::domain("one coordinate per factor is required"));
    }
    if !(0.0..=1.0).contains(&u0) || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::domain("lifting arguments must lie in [0, 1]"));
    }
    let lifted = Copula::lifted(base.clone(), factors.to_vec())?;
    let mut point = vec![u0];
    point.extend_from_slice(v);
    lifted.value(&point)
}

/// Follows `C(s·w)/s` along the schedule. The initial scale is lowered
/// when needed so that `s·w` stays in the unit square.
pub fn extract_tail(c: &Copula, w: (f64, f64), schedule: &LimitSchedule) -> Result<LimitEstimate> {
    schedule.check()?;
    if !c.accepts(2) {
        return Err(Error::domain(format!("{} is not bivariate", c.label())));
    }
    if w.0.is_nan() || w.1.is_nan() || w.0 < 0.0 || w.1 < 0.0 || !(w.0 + w.1).is_finite() {
        return Err(Error::domain(format!("point {w:?} is not in the positive quadrant")));
    }
    let m = w.0.max(w.1);
    let mut sched = *schedule;
    if m > 0.0 {
        sched.s0 = sched.s0.min(1.0 / m);
    }
    let mut err = None;
    let est = extrapolate_limit(
        |s| match c.value(&[s * w.0, s * w.1]) {
            Ok(y) => y / s,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        &sched,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(est),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevReport {
    pub scales: Vec<f64>,
    pub defects: Vec<f64>,
    pub nonincreasing: bool,
    /// Nonincreasing and either already negligible or at most half the
    /// first defect.
    pub decreasing_to_zero: bool,
}

/// `∫ |∂₁C(st, sw) 1_{[0,1/s]}(t) − ∂₁Λ(t, w)| dt` along the schedule.
pub fn sobolev_diagnostic(
    c: &Copula,
    lambda: &TailDependenceFunction,
    w: f64,
    schedule: &LimitSchedule,
) -> Result<SobolevReport> {
    schedule.check()?;
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::domain("the diagnostic needs a positive coordinate"));
    }
    let sub = crate::subdist::SubdistributionFunction::from(lambda.clone());
    let mut scales = Vec::new();
    let mut defects = Vec::new();
    for s in schedule.scales() {
        if s * w > 1.0 {
            continue;
        }
        let upper = 1.0 / s;
        let mut pts = sub.d1_hints(w);
        pts.push(upper - w);
        pts.push(w);
        let mut err = None;
        let body = integrate_interval(
            |t| match c.d1((s * t).min(1.0), s * w) {
                Ok(d) => (d - lambda.d1(t, w)).abs(),
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            upper,
            &pts,
            &QuadratureConfig {
                tol: 1e-10,
                max_subdivisions: 4000,
                compactify: false,
            },
        );
        if let Some(e) = err {
            return Err(e);
        }
        let tail = (lambda.value(f64::INFINITY, w) - lambda.value(upper, w)).max(0.0);
        scales.push(s);
        defects.push(body?.value + tail);
    }
    let nonincreasing = defects.windows(2).all(|d| d[1] <= d[0] + 1e-9);
    let first = defects.first().copied().unwrap_or(0.0);
    let last = defects.last().copied().unwrap_or(0.0);
    Ok(SobolevReport {
        decreasing_to_zero: nonincreasing && (last <= 1e-9 || last <= 0.5 * first),
        nonincreasing,
        scales,
        defects,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopulaDefects {
    pub margin: f64,
    pub grounded: f64,
    pub min_volume: f64,
}

/// Margin, groundedness and 2-increasing defects of a bivariate copula
/// on the grid `points × points` (points in `[0, 1]`).
pub fn bivariate_defects(c: &Copula, points: &[f64]) -> Result<CopulaDefects> {
    let mut d = CopulaDefects {
        margin: 0.0,
        grounded: 0.0,
        min_volume: f64::INFINITY,
    };
    for &p in points {
        d.margin = d.margin.max((c.eval(&[p, 1.0])? - p).abs());
        d.margin = d.margin.max((c.eval(&[1.0, p])? - p).abs());
        d.grounded = d.grounded.max(c.eval(&[p, 0.0])?.abs());
        d.grounded = d.grounded.max(c.eval(&[0.0, p])?.abs());
    }
    let vals: Vec<Vec<f64>> = points
        .iter()
        .map(|&x| points.iter().map(|&y| c.eval(&[x, y])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    for i in 0..points.len() - 1 {
        for j in 0..points.len() - 1 {
            let vol = vals[i + 1][j + 1] - vals[i][j + 1] - vals[i + 1][j] + vals[i][j];
            d.min_volume = d.min_volume.min(vol);
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(Copula::UpperFrechet.eval(&[0.3, 0.7]).unwrap(), 0.3);
        let c = Copula::clayton(1.0).unwrap();
        assert!((c.eval(&[0.5, 0.5]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(c.eval(&[1.2, 0.5]).is_err());
        assert!(Copula::LowerFrechet.eval(&[0.2, 0.3, 0.4]).is_err());
    }

    #[test]
    fn partials() {
        assert_eq!(Copula::Product.partial(1, 0.3, 0.6).unwrap(), 0.6);
        assert_eq!(Copula::UpperFrechet.partial(1, 0.3, 0.6).unwrap(), 1.0);
        assert_eq!(Copula::UpperFrechet.partial(1, 0.7, 0.6).unwrap(), 0.0);
        let c = Copula::clayton(1.0).unwrap();
        assert!((c.partial(1, 0.5, 0.5).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        let fd = central_derivative(|x| c.eval(&[x, 0.5]).unwrap(), 0.5, 1e-4, 0.0, 1.0);
        assert!((fd - 4.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn ev_survival_partial_matches_differences() {
        let tdf = TailDependenceFunction::clayton(1.0).unwrap();
        let c = Copula::ev_survival(tdf);
        for &(u, v) in &[(0.5, 0.5), (0.1, 0.7), (0.8, 0.2), (0.01, 0.02)] {
            let fd = central_derivative(|x| c.eval(&[x, v]).unwrap(), u, 1e-5, 0.0, 1.0);
            assert!((c.partial(1, u, v).unwrap() - fd).abs() < 1e-7, "({u},{v})");
            let fd2 = central_derivative(|y| c.eval(&[u, y]).unwrap(), v, 1e-5, 0.0, 1.0);
            assert!((c.partial(2, u, v).unwrap() - fd2).abs() < 1e-7, "({u},{v})");
        }
    }

    #[test]
    fn ev_survival_by_hand() {
        // λ̂(t) = t(1−t): Λ(x, y) = xy/(x+y); at u = v = 1/2, x = y = ln 2
        let c = Copula::ev_survival(TailDependenceFunction::clayton(1.0).unwrap());
        let l2 = 2f64.ln();
        let g = (-(2.0 * l2 - l2 / 2.0)).exp();
        assert!((c.eval(&[0.5, 0.5]).unwrap() - g).abs() < 1e-15);
    }

    #[test]
    fn tail_extraction() {
        let sched = LimitSchedule::default();
        let e = extract_tail(&Copula::Product, (1.0, 1.0), &sched).unwrap();
        assert!(e.converged && e.value.abs() < 1e-3);
        let e = extract_tail(&Copula::clayton(1.0).unwrap(), (1.0, 1.0), &sched).unwrap();
        assert!(e.converged && (e.value - 0.5).abs() < 1e-3);
        let e = extract_tail(&Copula::UpperFrechet, (2.0, 3.0), &sched).unwrap();
        assert!(e.converged && (e.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn darsow_products() {
        let c = Copula::clayton(1.0).unwrap();
        let pc = markov_product_copulas(&Copula::Product, &c).unwrap();
        assert!((pc.eval(&[0.3, 0.6]).unwrap() - 0.18).abs() < 1e-10);
        let mm = markov_product_copulas(&Copula::LowerFrechet, &Copula::LowerFrechet).unwrap();
        assert!((mm.eval(&[0.3, 0.7]).unwrap() - 0.3).abs() < 1e-10);
        let uc = markov_product_copulas(&Copula::UpperFrechet, &c).unwrap();
        for &u in &[0.2, 0.5, 0.8] {
            for &v in &[0.2, 0.5, 0.8] {
                assert!((uc.eval(&[u, v]).unwrap() - c.eval(&[u, v]).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn liftings() {
        let c = Copula::clayton(1.0).unwrap();
        let direct = markov_product_copulas(&Copula::Product, &c).unwrap().eval(&[0.4, 0.7]).unwrap();
        let lifted = lift_copulas(&Copula::Product, &[Copula::Product.transpose(), c.clone()], 1.0, &[0.4, 0.7]).unwrap();
        assert!((direct - lifted).abs() < 1e-10);
        assert_eq!(lift_copulas(&Copula::Product, &[c.clone(), c], 0.0, &[0.4, 0.7]).unwrap(), 0.0);
        let m = lift_copulas(
            &Copula::UpperFrechet,
            &[Copula::UpperFrechet, Copula::UpperFrechet],
            1.0,
            &[0.35, 0.6],
        )
        .unwrap();
        assert!((m - 0.35).abs() < 1e-10);
    }

    #[test]
    fn sobolev_examples() {
        let sched = LimitSchedule::new(0.25, 0.5, 8, 1e-4).unwrap();
        let pi = sobolev_diagnostic(&Copula::Product, &TailDependenceFunction::independence(), 0.8, &sched).unwrap();
        for d in &pi.defects {
            assert!((d - 0.8).abs() < 1e-9);
        }
        assert!(!pi.decreasing_to_zero);
        let up = sobolev_diagnostic(&Copula::UpperFrechet, &TailDependenceFunction::comonotone(), 0.8, &sched).unwrap();
        assert!(up.defects.iter().all(|d| d.abs() < 1e-9));
        let tdf = TailDependenceFunction::clayton(1.0).unwrap();
        let ev = sobolev_diagnostic(&Copula::ev_survival(tdf.clone()), &tdf, 1.0, &sched).unwrap();
        assert!(ev.decreasing_to_zero, "{:?}", ev.defects);
    }

    #[test]
    fn copula_invariants() {
        let pts: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        for c in [
            Copula::LowerFrechet,
            Copula::Product,
            Copula::UpperFrechet,
            Copula::clayton(2.0).unwrap(),
            Copula::ev_survival(TailDependenceFunction::plateau(0.3).unwrap()),
        ] {
            let d = bivariate_defects(&c, &pts).unwrap();
            assert!(d.margin < 1e-8 && d.grounded == 0.0 && d.min_volume >= -1e-10, "{}: {d:?}", c.label());
        }
    }
}
