//! Markov iterates `Λ^{*n}`, their Cesàro means, the plateau closed form,
//! limit classification and idempotence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::product::{star_product, ProductResult, ANGULAR_GRID};
use crate::tdf::{grid, AngularFunction, PiecewiseLinear, TailDependenceFunction, STRUCTURAL_TOL};

/// Grid used for sup-norm distances on the simplex.
pub const SIMPLEX_GRID: usize = 101;
/// Default tolerance of [`classify_limit`].
pub const DEFAULT_LIMIT_TOL: f64 = 1e-3;

/// `Λ^{*n}`, folded from the left.
pub fn iterate_n(l: &TailDependenceFunction, n: usize) -> Result<ProductResult> {
    Ok(iterates(l, n)?.pop().expect("n >= 1"))
}

/// `Λ^{*1}, …, Λ^{*n}`.
pub fn iterates(l: &TailDependenceFunction, n: usize) -> Result<Vec<ProductResult>> {
    if n == 0 {
        return Err(Error::domain("iterate index must be at least 1"));
    }
    let mut out = vec![ProductResult::from_tdf(l.clone(), vec![l.label()], "identity")];
    for _ in 1..n {
        let prev = out.last().unwrap().to_tdf()?;
        out.push(star_product(&prev, l)?);
    }
    Ok(out)
}

/// `Λ_p^{*(n+1)}(w)` for the plateau function `λ̂(t) = min(t, p, 1-t)`,
/// summed as `Σ_ℓ binom(n,ℓ) Λ_p(p^ℓ(1-p)^{n-ℓ} w₁, p^{n-ℓ}(1-p)^ℓ w₂)`.
pub fn lambda_p_value(p: f64, n: usize, w: (f64, f64)) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::domain(format!("plateau level must lie in [0, 1/2], got {p}")));
    }
    if w.0.is_nan() || w.1.is_nan() || w.0 < 0.0 || w.1 < 0.0 {
        return Err(Error::domain(format!("point {w:?} is not in the positive quadrant")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let plateau = |x: f64, y: f64| x.min(y).min(p * (x + y));
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_binom = 0.0;
    let mut sum = 0.0;
    for l in 0..=n {
        let (lf, nf) = (l as f64, (n - l) as f64);
        let a = (log_binom + lf * lp + nf * lq).exp();
        let b = (log_binom + nf * lp + lf * lq).exp();
        sum += plateau(a * w.0, b * w.1);
        if l < n {
            log_binom += ((n - l) as f64).ln() - ((l + 1) as f64).ln();
        }
    }
    Ok(sum)
}

/// Upper bound on the midpoint value of `Λ_p^{*(2k+1)}`:
/// `Σ_{ℓ≤k} binom(2k,ℓ)(1-p)^ℓ p^{2k-ℓ} − binom(2k,k) p^{k+1}(1-p)^k`.
/// It bounds the sup norm of `λ̂^{*(2k+1)}` for every `λ̂ ≤ p`. The exact
/// midpoint value is smaller by `binom(2k,k) p^k (1-p)^k (1-2p)`.
pub fn plateau_midpoint_bound(p: f64, k: usize) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    let n = 2 * k;
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_binom = 0.0;
    let mut sum = 0.0;
    for l in 0..=k {
        sum += (log_binom + l as f64 * lq + (n - l) as f64 * lp).exp();
        if l == k {
            sum -= (log_binom + (k + 1) as f64 * lp + k as f64 * lq).exp();
        }
        log_binom += ((n - l) as f64).ln() - ((l + 1) as f64).ln();
    }
    sum.max(0.0)
}

/// Smallest odd `2k+1 ≤ n_max` whose midpoint bound is below `tol`.
pub fn certified_iterations(p: f64, tol: f64, n_max: usize) -> Option<usize> {
    first_below(|k| plateau_midpoint_bound(p, k), tol, n_max.saturating_sub(1) / 2).map(|k| 2 * k + 1)
}

/// Smallest `i ≤ i_max` with `f(i) < tol` for nonincreasing `f`, by
/// doubling then bisection.
fn first_below<F: Fn(usize) -> f64>(f: F, tol: f64, i_max: usize) -> Option<usize> {
    if f(0) < tol {
        return Some(0);
    }
    let mut lo = 0;
    let mut hi = 1;
    loop {
        if hi > i_max {
            if f(i_max) < tol {
                hi = i_max;
                break;
            }
            return None;
        }
        if f(hi) < tol {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn dist_to_comonotone(a: &AngularFunction) -> f64 {
    let mut pts = grid(1001);
    pts.extend(a.kinks());
    pts.into_iter()
        .map(|t| (a.value(t) - t.min(1.0 - t)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateTrace {
    pub n: usize,
    pub sup_norm: f64,
    pub dist_to_independence: f64,
    pub dist_to_comonotone: f64,
}

/// Sup-norm statistics of `Λ^{*1}, …, Λ^{*n}` on a simplex grid.
pub fn iterate_trace(l: &TailDependenceFunction, n: usize, grid_n: usize) -> Result<Vec<IterateTrace>> {
    let its = iterates(l, n)?;
    let g = grid(grid_n.max(3));
    its.iter()
        .enumerate()
        .map(|(i, p)| {
            let mut sup: f64 = 0.0;
            let mut dplus: f64 = 0.0;
            for &t in &g {
                let v = p.eval(&[t, 1.0 - t])?;
                sup = sup.max(v.abs());
                dplus = dplus.max((v - t.min(1.0 - t)).abs());
            }
            Ok(IterateTrace {
                n: i + 1,
                sup_norm: sup,
                dist_to_independence: sup,
                dist_to_comonotone: dplus,
            })
        })
        .collect()
}

/// Pointwise average of `Λ^{*1}, …, Λ^{*n}`; exact for piecewise-linear
/// iterates, otherwise on the sampled grid.
pub fn cesaro_mean(l: &TailDependenceFunction, n: usize) -> Result<ProductResult> {
    let its = iterates(l, n)?;
    let angulars: Vec<AngularFunction> = its.iter().map(|p| p.angular()).collect::<Result<_>>()?;
    let exact = angulars
        .iter()
        .all(|a| !matches!(a, AngularFunction::Sampled(_)) && a.as_piecewise_linear().is_some());
    let nf = n as f64;
    let mean = if exact {
        let mut t: Vec<f64> = angulars
            .iter()
            .flat_map(|a| a.as_piecewise_linear().unwrap().t().to_vec())
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        let v = t
            .iter()
            .map(|&x| angulars.iter().map(|a| a.value(x)).sum::<f64>() / nf)
            .collect();
        AngularFunction::PiecewiseLinear(PiecewiseLinear::new(t, v)?.simplified(1e-14))
    } else {
        let v = grid(ANGULAR_GRID)
            .into_iter()
            .map(|x| angulars.iter().map(|a| a.value(x)).sum::<f64>() / nf)
            .collect();
        AngularFunction::sampled(v)?
    };
    Ok(ProductResult::from_tdf(
        TailDependenceFunction::from_trusted(mean),
        vec![l.label()],
        format!("cesaro(n={n})"),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitTag {
    /// `Λ⁺`
    Comonotone,
    /// `Λ_Π`
    Independence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitClassification {
    pub tag: LimitTag,
    pub n_reached: usize,
    pub converged: bool,
    /// Level of the dominating plateau, `max λ̂`.
    pub dominating_p: Option<f64>,
    /// Odd iteration count certified by the midpoint bound.
    pub certified_bound: Option<usize>,
    /// `(n, sup-norm bound or value)` pairs visited.
    pub trace: Vec<(usize, f64)>,
}

/// Decides the limit of `Λ^{*n}`. Non-comonotone inputs are dominated
/// by the plateau at `p = max λ̂ < 1/2`, whose iterates have a closed form.
pub fn classify_limit(l: &TailDependenceFunction, tol: f64, n_max: usize) -> Result<LimitClassification> {
    if !(tol > 0.0) {
        return Err(Error::config("tol", "must be positive"));
    }
    if n_max == 0 {
        return Err(Error::config("n_max", "must be at least 1"));
    }
    let a = l.angular();
    if dist_to_comonotone(a) < STRUCTURAL_TOL {
        return Ok(LimitClassification {
            tag: LimitTag::Comonotone,
            n_reached: 0,
            converged: true,
            dominating_p: None,
            certified_bound: None,
            trace: Vec::new(),
        });
    }
    let p = a.max_value().clamp(0.0, 0.5);
    if p < 0.5 - STRUCTURAL_TOL {
        let bound = |n: usize| lambda_p_value(p, n, (0.5, 0.5)).unwrap_or(f64::INFINITY);
        let found = first_below(bound, tol, n_max - 1).map(|i| i + 1);
        let n_reached = found.unwrap_or(n_max);
        let mut trace = Vec::new();
        let mut n = 1;
        while n < n_reached {
            trace.push((n, bound(n - 1)));
            n *= 2;
        }
        trace.push((n_reached, bound(n_reached - 1)));
        return Ok(LimitClassification {
            tag: LimitTag::Independence,
            n_reached,
            converged: found.is_some(),
            dominating_p: Some(p),
            certified_bound: certified_iterations(p, tol, n_max),
            trace,
        });
    }
    // max λ̂ numerically 1/2 without being Λ⁺: follow the iterates.
    let mut trace = Vec::new();
    let mut cur = ProductResult::from_tdf(l.clone(), vec![l.label()], "identity");
    for n in 1..=n_max {
        if n > 1 {
            cur = star_product(&cur.to_tdf()?, l)?;
        }
        let sup = cur.angular()?.max_value();
        trace.push((n, sup));
        if sup < tol {
            return Ok(LimitClassification {
                tag: LimitTag::Independence,
                n_reached: n,
                converged: true,
                dominating_p: Some(p),
                certified_bound: None,
                trace,
            });
        }
    }
    Ok(LimitClassification {
        tag: LimitTag::Independence,
        n_reached: n_max,
        converged: false,
        dominating_p: Some(p),
        certified_bound: None,
        trace,
    })
}

/// Whether `sup_t |(Λ * Λ)(t, 1-t) − Λ(t, 1-t)| < tol` on the simplex grid.
pub fn is_idempotent(l: &TailDependenceFunction, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::config("tol", "must be positive"));
    }
    let sq = star_product(l, l)?;
    let mut pts = grid(SIMPLEX_GRID);
    pts.extend(l.angular().kinks());
    for t in pts {
        let d = (sq.eval(&[t, 1.0 - t])? - l.value(t, 1.0 - t)).abs();
        if d >= tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CesaroDiagnostic {
    pub n: usize,
    /// Tail function of the Cesàro average of Clayton-copula Darsow
    /// iterates, extracted at `w`.
    pub extracted: f64,
    /// Cesàro mean of the Clayton tail dependence function at `w`.
    pub tdf_mean: f64,
    pub excess: f64,
}

/// Compares the tail of `(1/n) Σ_k C^{*k}` for the Clayton copula with
/// the Cesàro mean of its tail dependence function. The copula iterates
/// are propagated as `∂₁C^{*(k+1)}(·, v) = ∫ c(·, r) ∂₁C^{*k}(r, v) dr` on a
/// logarithmic grid; the limit in `s` uses one Richardson step.
pub fn copula_cesaro_diagnostic(theta: f64, n: usize, w: (f64, f64)) -> Result<CesaroDiagnostic> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain("Clayton parameter must be positive and finite"));
    }
    if n == 0 || n > 8 {
        return Err(Error::domain("the diagnostic supports 1 ≤ n ≤ 8"));
    }
    if !(w.0 > 0.0 && w.1 > 0.0 && w.0.is_finite() && w.1.is_finite()) {
        return Err(Error::domain("w must have positive finite coordinates"));
    }
    let m = 2400;
    let (lmin, lmax) = ((1e-11f64).ln(), 0.0f64);
    let h = (lmax - lmin) / (m - 1) as f64;
    let r: Vec<f64> = (0..m).map(|i| (lmin + h * i as f64).exp()).collect();
    let wt: Vec<f64> = (0..m)
        .map(|i| {
            let end = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            h * end * r[i]
        })
        .collect();
    let log_density = |u: f64, v: f64| {
        (1.0 + theta).ln() - (theta + 1.0) * (u.ln() + v.ln())
            - (2.0 + 1.0 / theta) * (u.powf(-theta) + v.powf(-theta) - 1.0).ln()
    };
    let kernel: Vec<f64> = (0..m * m)
        .map(|ij| {
            let (i, j) = (ij / m, ij % m);
            log_density(r[i], r[j]).exp() * wt[j]
        })
        .collect();
    let d1 = |u: f64, v: f64| (1.0 + u.powf(theta) * (v.powf(-theta) - 1.0)).powf(-1.0 - 1.0 / theta);

    let cesaro_at = |s: f64| -> f64 {
        let (u, v) = (s * w.0, s * w.1);
        let mut g: Vec<f64> = r.iter().map(|&x| d1(x, v)).collect();
        let mut total = 0.0;
        for k in 1..=n {
            if k > 1 {
                g = (0..m)
                    .map(|i| kernel[i * m..(i + 1) * m].iter().zip(&g).map(|(a, b)| a * b).sum())
                    .collect();
            }
            total += integrate_upto(&r, &g, u);
        }
        total / n as f64 / s
    };
    let s = 2e-3 / w.0.max(w.1);
    let extracted = 2.0 * cesaro_at(0.5 * s) - cesaro_at(s);

    let tdf = TailDependenceFunction::clayton(theta)?;
    let mean = cesaro_mean(&tdf, n)?;
    let tdf_mean = mean.eval(&[w.0, w.1])?;
    Ok(CesaroDiagnostic {
        n,
        extracted,
        tdf_mean,
        excess: extracted - tdf_mean,
    })
}

/// `∫₀ᵘ g` for `g` sampled at increasing points `r` (linear interpolation,
/// constant continuation to 0 below the first point).
fn integrate_upto(r: &[f64], g: &[f64], u: f64) -> f64 {
    let mut sum = g[0] * r[0].min(u);
    for i in 1..r.len() {
        if r[i - 1] >= u {
            break;
        }
        let b = r[i].min(u);
        let gb = g[i - 1] + (g[i] - g[i - 1]) * (b - r[i - 1]) / (r[i] - r[i - 1]);
        sum += 0.5 * (g[i - 1] + gb) * (b - r[i - 1]);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_closed_form_spot_values() {
        let p = 1.0 / 3.0;
        assert!((lambda_p_value(p, 1, (0.5, 0.5)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((lambda_p_value(p, 2, (0.5, 0.5)).unwrap() - 7.0 / 27.0).abs() < 1e-15);
        assert!((lambda_p_value(0.5, 6, (0.5, 0.5)).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(lambda_p_value(0.0, 3, (1.0, 1.0)).unwrap(), 0.0);
        let mut central = 1.0;
        for k in 0..8 {
            let direct = lambda_p_value(p, 2 * k, (0.5, 0.5)).unwrap();
            let gap = central * (p * (1.0 - p)).powi(k as i32) * (1.0 - 2.0 * p);
            assert!((plateau_midpoint_bound(p, k) - direct - gap).abs() < 1e-14, "k={k}");
            central *= (2 * k + 1) as f64 * (2 * k + 2) as f64 / ((k + 1) * (k + 1)) as f64;
        }
    }

    #[test]
    fn iterates_match_closed_form() {
        let l = TailDependenceFunction::plateau(1.0 / 3.0).unwrap();
        let it = iterate_n(&l, 3).unwrap();
        assert!((it.eval(&[0.5, 0.5]).unwrap() - 7.0 / 27.0).abs() < 1e-15);
        assert!((iterate_n(&l, 2).unwrap().eval(&[0.5, 0.5]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn limits() {
        let c = classify_limit(&TailDependenceFunction::comonotone(), 1e-3, 100).unwrap();
        assert_eq!((c.tag, c.n_reached), (LimitTag::Comonotone, 0));
        let l = TailDependenceFunction::plateau(1.0 / 3.0).unwrap();
        let c = classify_limit(&l, 1e-3, 10_000).unwrap();
        assert_eq!(c.tag, LimitTag::Independence);
        assert!(c.converged && c.n_reached <= c.certified_bound.unwrap());
        let c = classify_limit(&TailDependenceFunction::clayton(1.0).unwrap(), 1e-3, 10_000).unwrap();
        assert_eq!(c.tag, LimitTag::Independence);
        assert_eq!(c.dominating_p, Some(0.25));
    }

    #[test]
    fn idempotents() {
        assert!(is_idempotent(&TailDependenceFunction::comonotone(), 1e-4).unwrap());
        assert!(is_idempotent(&TailDependenceFunction::independence(), 1e-4).unwrap());
        assert!(!is_idempotent(&TailDependenceFunction::plateau(1.0 / 3.0).unwrap(), 1e-4).unwrap());
    }

    #[test]
    fn cesaro_of_unit() {
        let m = cesaro_mean(&TailDependenceFunction::comonotone(), 4).unwrap();
        assert!((m.eval(&[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-15);
    }
}
