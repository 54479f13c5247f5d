//! Doubly substochastic operators `T_F f(x) = ∂ₓ ∫ ∂₂F(x, t) f(t) dt`
//! backed by subdistribution functions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{integrate_interval, majorizes, QuadratureConfig};
use crate::product::star_product;
use crate::step::StepFunction;
use crate::subdist::{Kernel, SubdistributionFunction};

/// Refinement factor of the materialization grid.
pub const REFINEMENT: usize = 4;
/// Non-compact outputs are truncated at this multiple of the grid end.
const FAR_FACTOR: f64 = 1e6;

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("evaluation point must be finite and nonnegative, got {x}")))
    }
}

/// `T_F f(x) = Σ cᵢ [∂₁F(x, bᵢ) − ∂₁F(x, aᵢ)] + tail · [∂₁F(x, ∞) − ∂₁F(x, end)]`.
pub fn apply_operator(f_kernel: &SubdistributionFunction, f: &StepFunction, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(apply_unchecked(f_kernel, f, x))
}

fn apply_unchecked(k: &SubdistributionFunction, f: &StepFunction, x: f64) -> f64 {
    let mut sum = 0.0;
    for (a, b, c) in f.pieces() {
        sum += c * (k.d1(x, b) - k.d1(x, a));
    }
    if f.tail() != 0.0 {
        sum += f.tail() * (k.d1_at_infinity(x) - k.d1(x, f.end()));
    }
    sum
}

/// `∫_p^q T_F f` from values of `F`.
fn cell_mass(k: &SubdistributionFunction, f: &StepFunction, p: f64, q: f64) -> f64 {
    let rect = |a: f64, b: f64| k.value(q, b) - k.value(p, b) - k.value(q, a) + k.value(p, a);
    let mut sum = 0.0;
    for (a, b, c) in f.pieces() {
        sum += c * rect(a, b);
    }
    if f.tail() != 0.0 {
        sum += f.tail() * rect(f.end(), f64::INFINITY);
    }
    sum
}

/// `lim_{x→∞} T_F f(x)`.
fn tail_value(k: &SubdistributionFunction, f: &StepFunction) -> f64 {
    if f.tail() == 0.0 {
        return 0.0;
    }
    match k {
        SubdistributionFunction::Tdf(t) => f.tail() * t.angular().right_slope(0.0),
        SubdistributionFunction::Kernel(_) => 0.0,
    }
}

/// A kernel-backed doubly substochastic operator.
#[derive(Debug, Clone)]
pub struct SubstochasticOperator {
    kernel: SubdistributionFunction,
}

impl SubstochasticOperator {
    pub fn new(kernel: SubdistributionFunction) -> Self {
        SubstochasticOperator { kernel }
    }

    pub fn kernel(&self) -> &SubdistributionFunction {
        &self.kernel
    }

    pub fn apply(&self, f: &StepFunction, x: f64) -> Result<f64> {
        apply_operator(&self.kernel, f, x)
    }

    /// The Banach space adjoint, backed by `Fᵀ`.
    pub fn adjoint(&self) -> Self {
        SubstochasticOperator::new(self.kernel.transpose())
    }

    /// Materialization grid: breaks of `f`, their images under the kernel
    /// rays, kernel hints and `extra`, refined `REFINEMENT` times.
    fn grid(&self, f: &StepFunction, extra: &[f64]) -> (Vec<f64>, bool) {
        let mut pts: Vec<f64> = vec![0.0];
        let mut bs: Vec<f64> = f.breaks().to_vec();
        let mut compact = f.is_compact();
        match &self.kernel {
            SubdistributionFunction::Tdf(t) => match t.angular().as_piecewise_linear() {
                Some(pl) if !matches!(t.angular(), crate::tdf::AngularFunction::Clayton { .. }) => {
                    let rays = pl.rays();
                    for &b in f.breaks() {
                        pts.extend(rays.iter().map(|r| r * b));
                    }
                }
                _ => {
                    compact = false;
                    for &b in f.breaks() {
                        bs.extend(self.kernel.d1_hints(b));
                    }
                }
            },
            SubdistributionFunction::Kernel(_) => {
                let s = self.kernel.support().0;
                if s.is_finite() {
                    pts.push(s);
                } else {
                    compact = false;
                }
                pts.extend(self.kernel.declared_hints());
            }
        }
        pts.extend(bs);
        pts.extend(extra.iter().copied());
        pts.retain(|x| x.is_finite() && *x >= 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|b, a| *b - *a <= 1e-12 * a.max(1.0));
        let mut fine = Vec::with_capacity(pts.len() * REFINEMENT);
        for w in pts.windows(2) {
            for i in 0..REFINEMENT {
                fine.push(w[0] + (w[1] - w[0]) * i as f64 / REFINEMENT as f64);
            }
        }
        fine.push(*pts.last().unwrap());
        fine.dedup_by(|b, a| *b <= *a);
        if !compact {
            let end = fine.last().copied().unwrap().max(1.0);
            let mut x = end;
            while x < FAR_FACTOR * end {
                x *= 2.0;
                fine.push(x);
            }
        }
        (fine, compact)
    }

    /// `T_F f` as a step function: cell averages of `T_F f` on the
    /// materialization grid, which are exact where `T_F f` is piecewise
    /// constant on that grid. Non-compact outputs are cut at the end of
    /// the grid and continued by their limit at infinity.
    pub fn materialize(&self, f: &StepFunction, extra: &[f64]) -> Result<StepFunction> {
        let (grid, _) = self.grid(f, extra);
        self.cell_averages(f, grid)
    }

    /// Cell averages of `T_F f` on a caller-supplied increasing grid
    /// starting at 0, continued by the limit at infinity.
    pub fn cell_averages(&self, f: &StepFunction, grid: Vec<f64>) -> Result<StepFunction> {
        let values: Vec<f64> = grid
            .windows(2)
            .map(|w| cell_mass(&self.kernel, f, w[0], w[1]) / (w[1] - w[0]))
            .collect();
        StepFunction::new(grid, values, tail_value(&self.kernel, f))
    }
}

/// `F_T(x, y) = ∫₀ˣ T1_{[0,y]}(s) ds`, built by quadrature. Its first
/// partial is `T1_{[0,y]}` itself.
pub fn operator_to_subdistribution(t: &SubstochasticOperator) -> Result<SubdistributionFunction> {
    let k = t.kernel.clone();
    let k1 = t.kernel.clone();
    let cfg = QuadratureConfig {
        tol: 1e-13,
        max_subdivisions: 4000,
        compactify: false,
    };
    let loose = QuadratureConfig { tol: 1e-9, ..cfg };
    let f = move |x: f64, y: f64| {
        if x <= 0.0 || y <= 0.0 {
            return 0.0;
        }
        let hints = k.d1_hints(y);
        integrate_interval(|s| k.d1(s, y), 0.0, x, &hints, &cfg)
            .or_else(|_| integrate_interval(|s| k.d1(s, y), 0.0, x, &hints, &loose))
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let mut hints = t.kernel.declared_hints();
    let s = t.kernel.support();
    hints.extend([s.0, s.1].into_iter().filter(|x| x.is_finite()));
    let kernel = Kernel::new(format!("F_T[{}]", t.kernel.label()), s, f)?
        .with_partials(move |x, y| k1.d1(x, y), {
            let k2 = t.kernel.clone();
            move |x, y| k2.d2(x, y)
        })
        .with_hints(hints);
    Ok(SubdistributionFunction::Kernel(kernel))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundTrip {
    /// `sup |F_{T_F} − F|` on the sample grid.
    pub kernel_defect: f64,
    /// `sup |T_{F_T} f − T f|` over the cells of `T f`.
    pub operator_defect: f64,
}

impl RoundTrip {
    pub fn within(&self, tol: f64) -> bool {
        self.kernel_defect <= tol && self.operator_defect <= tol
    }
}

/// Kernel → operator → kernel, and operator → kernel → operator applied
/// to `f`.
pub fn round_trip(f_kernel: &SubdistributionFunction, f: &StepFunction) -> Result<RoundTrip> {
    let t = SubstochasticOperator::new(f_kernel.clone());
    let back = operator_to_subdistribution(&t)?;
    let mut kernel_defect: f64 = 0.0;
    for &x in &SAMPLE_POINTS[..6] {
        for &y in &SAMPLE_POINTS[..6] {
            kernel_defect = kernel_defect.max((back.value(x, y) - f_kernel.value(x, y)).abs());
        }
    }
    let tf = t.materialize(f, &[])?;
    let again = SubstochasticOperator::new(back).cell_averages(f, tf.breaks().to_vec())?;
    let mut operator_defect = (again.tail() - tf.tail()).abs();
    for w in tf.breaks().windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        operator_defect = operator_defect.max((again.eval(mid) - tf.eval(mid)).abs());
    }
    Ok(RoundTrip {
        kernel_defect,
        operator_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// `T_{F*G} f(x)` against `T_F(T_G f)(x)`, with `T_G f` materialized.
pub fn compose_check(
    f_kernel: &SubdistributionFunction,
    g_kernel: &SubdistributionFunction,
    f: &StepFunction,
    x: f64,
) -> Result<CompositionCheck> {
    check_x(x)?;
    let fg = star_product(f_kernel, g_kernel)?.to_subdistribution()?;
    let lhs = apply_operator(&fg, f, x)?;
    let tg = SubstochasticOperator::new(g_kernel.clone()).materialize(f, &[])?;
    let rhs = apply_operator(f_kernel, &tg, x)?;
    Ok(CompositionCheck {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointPairing {
    /// `⟨T_F f, g⟩`
    pub forward: f64,
    /// `⟨f, T_{Fᵀ} g⟩`
    pub adjoint: f64,
    pub defect: f64,
}

/// Both pairings by exact step-function integration; `g` must be compact.
pub fn adjoint_pairing(f_kernel: &SubdistributionFunction, f: &StepFunction, g: &StepFunction) -> Result<AdjointPairing> {
    if !g.is_compact() {
        return Err(Error::domain("the right test vector must have compact support"));
    }
    let t = SubstochasticOperator::new(f_kernel.clone());
    let tf = t.materialize(f, g.breaks())?;
    let tg = t.adjoint().materialize(g, f.breaks())?;
    let forward = tf.inner(g);
    let adjoint = f.inner(&tg);
    Ok(AdjointPairing {
        forward,
        adjoint,
        defect: (forward - adjoint).abs(),
    })
}

/// Sample points for operator-level checks.
pub const SAMPLE_POINTS: [f64; 8] = [0.05, 0.1, 0.5, 1.0, 1.7, 3.0, 10.0, 50.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkovReport {
    /// `sup |T_F 1_{ℝ₊}(x) − 1|`
    pub unit_defect: f64,
    /// `sup |∫ T_F 1_{[0,y]} − y| / y`
    pub mass_defect: f64,
    pub adjoint_unit_defect: f64,
    pub adjoint_mass_defect: f64,
}

impl MarkovReport {
    pub fn is_markov(&self, tol: f64) -> bool {
        self.unit_defect <= tol
            && self.mass_defect <= tol
            && self.adjoint_unit_defect <= tol
            && self.adjoint_mass_defect <= tol
    }
}

fn markov_defects(k: &SubdistributionFunction) -> (f64, f64) {
    let one = StepFunction::constant(1.0);
    let mut unit: f64 = 0.0;
    let mut mass: f64 = 0.0;
    for &x in &SAMPLE_POINTS {
        unit = unit.max((apply_unchecked(k, &one, x) - 1.0).abs());
        // ∫₀^∞ T_F 1_{[0,y]} = F(∞, y)
        mass = mass.max((k.value(f64::INFINITY, x) - x).abs() / x);
    }
    (unit, mass)
}

pub fn markov_report(f_kernel: &SubdistributionFunction) -> MarkovReport {
    let (unit_defect, mass_defect) = markov_defects(f_kernel);
    let (adjoint_unit_defect, adjoint_mass_defect) = markov_defects(&f_kernel.transpose());
    MarkovReport {
        unit_defect,
        mass_defect,
        adjoint_unit_defect,
        adjoint_mass_defect,
    }
}

/// Whether `T_F` and `T_{Fᵀ}` are both Markov operators at the sample
/// points.
pub fn is_markov_operator(f_kernel: &SubdistributionFunction, tol: f64) -> bool {
    markov_report(f_kernel).is_markov(tol)
}

/// `sup_x |T_F(f ∘ σ)(x) − (T_F f)(x/s)|` over `xs`, with `σ(x) = x/s`.
pub fn check_equivariance(f_kernel: &SubdistributionFunction, f: &StepFunction, s: f64, xs: &[f64]) -> Result<f64> {
    let fs = f.dilate(s)?;
    let mut worst: f64 = 0.0;
    for &x in xs {
        check_x(x)?;
        let lhs = apply_unchecked(f_kernel, &fs, x);
        let rhs = apply_unchecked(f_kernel, f, x / s);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Default points for [`check_equivariance`].
pub fn equivariance_points() -> Vec<f64> {
    (1..=40).map(|i| 0.1 * i as f64 + 0.013).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionReport {
    pub min_value: f64,
    pub l1_in: f64,
    pub l1_out: f64,
    pub sup_in: f64,
    pub sup_out: f64,
    pub majorized: bool,
}

impl ContractionReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_value >= -tol && self.l1_out <= self.l1_in + tol && self.sup_out <= self.sup_in + tol && self.majorized
    }
}

/// Positivity, `L¹`/`L^∞` contraction and `T_F f ≺ f` for a nonnegative
/// compact step function.
pub fn contraction_report(f_kernel: &SubdistributionFunction, f: &StepFunction) -> Result<ContractionReport> {
    if !f.is_compact() || !f.is_nonnegative() {
        return Err(Error::domain("contraction checks need a nonnegative compact test vector"));
    }
    let t = SubstochasticOperator::new(f_kernel.clone());
    let tf = t.materialize(f, &[])?;
    let mut min_value: f64 = 0.0;
    let mut sup_out: f64 = 0.0;
    for &x in tf.breaks() {
        let v = apply_unchecked(f_kernel, f, x);
        min_value = min_value.min(v);
        sup_out = sup_out.max(v.abs());
    }
    Ok(ContractionReport {
        min_value: min_value.min(tf.values().iter().copied().fold(0.0, f64::min)),
        l1_in: f.l1_norm(),
        l1_out: tf.l1_norm(),
        sup_in: f.sup_norm(),
        sup_out,
        majorized: majorizes(f, &rounding_clamped(&tf.truncate(tf.end()))?),
    })
}

/// Zeroes negative cell values that are pure rounding residue.
fn rounding_clamped(g: &StepFunction) -> Result<StepFunction> {
    let scale = g.values().iter().fold(g.tail().abs(), |m, v| m.max(v.abs()));
    let floor = -1e-12 * scale.max(1.0);
    let clamp = |v: f64| if v < 0.0 && v >= floor { 0.0 } else { v };
    StepFunction::new(g.breaks().to_vec(), g.values().iter().map(|&v| clamp(v)).collect(), clamp(g.tail()))
}

/// `T_F(f·1_{[0,n)})(x)` along the ladder, followed by `T_F f(x)`.
pub fn monotone_continuation(
    f_kernel: &SubdistributionFunction,
    f: &StepFunction,
    x: f64,
    ladder: &[f64],
) -> Result<Vec<f64>> {
    check_x(x)?;
    let mut out: Vec<f64> = ladder.iter().map(|&n| apply_unchecked(f_kernel, &f.truncate(n), x)).collect();
    out.push(apply_unchecked(f_kernel, f, x));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdf::TailDependenceFunction;

    fn sub(t: TailDependenceFunction) -> SubdistributionFunction {
        SubdistributionFunction::from(t)
    }

    #[test]
    fn identity_and_zero() {
        let f = StepFunction::indicator(0.0, 2.0).unwrap();
        let m = sub(TailDependenceFunction::comonotone());
        assert_eq!(apply_operator(&m, &f, 1.0).unwrap(), 1.0);
        assert_eq!(apply_operator(&m, &f, 2.5).unwrap(), 0.0);
        let z = sub(TailDependenceFunction::independence());
        assert_eq!(apply_operator(&z, &f, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn clayton_preserves_constants() {
        let c = sub(TailDependenceFunction::clayton(1.0).unwrap());
        let one = StepFunction::constant(1.0);
        for x in [0.1, 1.0, 7.0] {
            assert!((apply_operator(&c, &one, x).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(is_markov_operator(&c, 1e-9));
        let m = sub(TailDependenceFunction::linear_min(0.5, 1.0).unwrap());
        assert!(!is_markov_operator(&m, 1e-9));
    }

    #[test]
    fn round_trip_comonotone() {
        let t = SubstochasticOperator::new(sub(TailDependenceFunction::comonotone()));
        let ft = operator_to_subdistribution(&t).unwrap();
        for &(x, y) in &[(0.3, 0.7), (2.0, 1.0), (1.0, 1.0)] {
            assert!((ft.value(x, y) - x.min(y)).abs() < 1e-12);
        }
        let f = StepFunction::new(vec![0.0, 0.5, 2.0], vec![1.0, 0.25], 0.0).unwrap();
        for k in [TailDependenceFunction::clayton(1.0).unwrap(), TailDependenceFunction::plateau(0.25).unwrap()] {
            let back = operator_to_subdistribution(&SubstochasticOperator::new(sub(k.clone()))).unwrap();
            assert!((back.value(1e5, 2.0) - k.value(1e5, 2.0)).abs() < 1e-6);
            let r = round_trip(&sub(k), &f).unwrap();
            assert!(r.within(1e-6), "{r:?}");
        }
    }

    #[test]
    fn plateau_composition() {
        let p = sub(TailDependenceFunction::plateau(1.0 / 3.0).unwrap());
        let f = StepFunction::indicator(0.0, 1.0).unwrap();
        let c = compose_check(&p, &p, &f, 0.5).unwrap();
        assert!(c.defect < 1e-12, "{c:?}");
    }

    #[test]
    fn equivariance_counterexample() {
        let f = StepFunction::indicator(0.0, 1.0).unwrap();
        let m = sub(TailDependenceFunction::comonotone());
        assert_eq!(check_equivariance(&m, &f, 2.0, &[0.7]).unwrap(), 0.0);
        let capped = SubdistributionFunction::capped_comonotone(1.0).unwrap();
        assert_eq!(check_equivariance(&capped, &f, 2.0, &[0.6]).unwrap(), 0.0);
        assert_eq!(check_equivariance(&capped, &f, 2.0, &[1.5]).unwrap(), 1.0);
    }

    #[test]
    fn adjoint_of_linear_min() {
        let k = sub(TailDependenceFunction::linear_min(0.5, 1.0).unwrap());
        let f = StepFunction::indicator(0.0, 1.0).unwrap();
        let g = StepFunction::indicator(0.0, 2.0).unwrap();
        let a = adjoint_pairing(&k, &f, &g).unwrap();
        assert!(a.defect < 1e-12, "{a:?}");
    }
}
