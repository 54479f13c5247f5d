//! Numerical kernels: adaptive quadrature on finite intervals and the
//! half-line, scale limits, one-sided difference quotients, decreasing
//! rearrangement and majorization of step functions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::step::StepFunction;

/// Settings for the adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub tol: f64,
    pub max_subdivisions: usize,
    /// Map `[b, ∞)` onto `[0, 1)` with `t = b + u/(1-u)`. When off, the
    /// integrand is taken to vanish beyond the last supplied breakpoint.
    pub compactify: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tol: 1e-10,
            max_subdivisions: 4000,
            compactify: true,
        }
    }
}

impl QuadratureConfig {
    pub fn new(tol: f64, max_subdivisions: usize, compactify: bool) -> Result<Self> {
        let cfg = QuadratureConfig {
            tol,
            max_subdivisions,
            compactify,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_tol(tol: f64) -> Result<Self> {
        Self::new(tol, Self::default().max_subdivisions, true)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::config("tol", "quadrature tolerance must be positive"));
        }
        if self.max_subdivisions < 8 {
            return Err(Error::config(
                "max_subdivisions",
                "at least 8 subdivisions are required",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub residual: f64,
}

// 15-point Kronrod nodes (positive half) and weights; the odd-indexed
// nodes carry the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
enum Segment {
    Direct,
    /// `t = base + u/(1-u)` on `u ∈ [a, b] ⊂ [0, 1]`.
    Tail(f64),
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    seg: Segment,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn mapped<F: FnMut(f64) -> f64>(g: &mut F, u: f64, seg: Segment) -> f64 {
    match seg {
        Segment::Direct => g(u),
        Segment::Tail(base) => {
            let d = 1.0 - u;
            if d <= 0.0 {
                return 0.0;
            }
            let t = base + u / d;
            let y = g(t);
            if y == 0.0 {
                0.0
            } else {
                y / (d * d)
            }
        }
    }
}

fn kronrod<F: FnMut(f64) -> f64>(g: &mut F, a: f64, b: f64, seg: Segment) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = mapped(g, c, seg);
    let mut k = fc * WGK[7];
    let mut gs = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = mapped(g, c - dx, seg);
        let f2 = mapped(g, c + dx, seg);
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gs += WG[j / 2] * (f1 + f2);
        }
    }
    let k = k * h;
    let gs = gs * h;
    if !k.is_finite() {
        return Err(Error::Numeric {
            message: format!("non-finite integrand on [{a}, {b}]"),
            value: k,
            residual: f64::INFINITY,
        });
    }
    Ok((k, (k - gs).abs()))
}

fn adaptive<F: FnMut(f64) -> f64>(g: &mut F, initial: Vec<(f64, f64, Segment)>, cfg: &QuadratureConfig) -> Result<Integral> {
    cfg.check()?;
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    for (a, b, seg) in initial {
        if b <= a {
            continue;
        }
        let (value, error) = kronrod(g, a, b, seg)?;
        heap.push(Piece { a, b, seg, value, error });
    }
    let mut splits = 0usize;
    let mut value: f64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        let target = cfg.tol.max(4.0 * f64::EPSILON * value.abs());
        if error <= target || heap.is_empty() {
            // resum to shed the drift of the running totals
            let value = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
            let residual = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
            return Ok(Integral { value, residual });
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Numeric {
                message: "subdivision budget exhausted".into(),
                value,
                residual: error,
            });
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        value -= worst.value;
        error -= worst.error;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = kronrod(g, a, b, worst.seg)?;
            value += v;
            error += e;
            heap.push(Piece {
                a,
                b,
                seg: worst.seg,
                value: v,
                error: e,
            });
        }
        error = error.max(0.0);
        splits += 1;
    }
}

/// Integrates `g` over `[a, b]`, splitting first at the given interior
/// points.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    mut g: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
    }
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    let pts = geometric_refine(pts);
    let init = pts.windows(2).map(|w| (w[0], w[1], Segment::Direct)).collect();
    adaptive(&mut g, init, cfg)
}

/// Inserts `a·4ᵏ` between consecutive positive points `a < b` with
/// `b > 4a`, so that mass concentrated near `a` is seen by the first rule.
fn geometric_refine(pts: Vec<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(pts.len());
    for (i, &a) in pts.iter().enumerate() {
        out.push(a);
        if let Some(&b) = pts.get(i + 1) {
            let mut x = 4.0 * a;
            while a > 0.0 && x < b / 1.5 {
                out.push(x);
                x *= 4.0;
            }
        }
    }
    out
}

/// Integrates `g` over `[0, ∞)`.
pub fn integrate_halfline<F: FnMut(f64) -> f64>(g: F, cfg: &QuadratureConfig) -> Result<Integral> {
    integrate_halfline_split(g, &[], cfg)
}

/// Integrates `g` over `[0, ∞)`, treating the given points as known
/// discontinuities or kinks. The bounded part up to the largest point is
/// integrated directly, the rest through the compactifying substitution.
pub fn integrate_halfline_split<F: FnMut(f64) -> f64>(
    mut g: F,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > 0.0)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pts = geometric_refine(pts);
    let mut init = Vec::new();
    let mut left = 0.0;
    for &p in &pts {
        init.push((left, p, Segment::Direct));
        left = p;
    }
    if cfg.compactify {
        init.push((0.0, 0.5, Segment::Tail(left)));
        init.push((0.5, 1.0, Segment::Tail(left)));
    } else if pts.is_empty() {
        return Err(Error::domain(
            "a half-line integral without compactification needs a finite support bound",
        ));
    }
    adaptive(&mut g, init, cfg)
}

/// Geometric sweep of scales used for `s ↘ 0` limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSchedule {
    pub s0: f64,
    pub ratio: f64,
    pub max_steps: usize,
    pub stall: f64,
}

impl Default for LimitSchedule {
    fn default() -> Self {
        LimitSchedule {
            s0: 0.25,
            ratio: 0.5,
            max_steps: 20,
            stall: 1e-4,
        }
    }
}

impl LimitSchedule {
    pub fn new(s0: f64, ratio: f64, max_steps: usize, stall: f64) -> Result<Self> {
        let s = LimitSchedule {
            s0,
            ratio,
            max_steps,
            stall,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.s0 > 0.0 && self.s0 <= 1.0) {
            return Err(Error::config("s0", "initial scale must lie in (0, 1]"));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::config("ratio", "ratio must lie in (0, 1)"));
        }
        if self.max_steps < 3 {
            return Err(Error::config("steps", "at least 3 steps are required"));
        }
        if !(self.stall > 0.0 && self.stall.is_finite()) {
            return Err(Error::config("stall", "stall tolerance must be positive"));
        }
        Ok(())
    }

    pub fn scales(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.max_steps).map(move |k| self.s0 * self.ratio.powi(k as i32))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub converged: bool,
    /// `(s, h(s))` pairs in evaluation order.
    pub trace: Vec<(f64, f64)>,
}

/// Follows `h` along the schedule until two consecutive increments fall
/// below the stall tolerance.
pub fn extrapolate_limit<H: FnMut(f64) -> f64>(mut h: H, schedule: &LimitSchedule) -> Result<LimitEstimate> {
    schedule.check()?;
    let mut trace = Vec::new();
    let mut quiet = 0;
    for s in schedule.scales() {
        let v = h(s);
        if let Some(&(_, prev)) = trace.last() {
            let prev: f64 = prev;
            if (v - prev).abs() < schedule.stall {
                quiet += 1;
            } else {
                quiet = 0;
            }
        }
        trace.push((s, v));
        if quiet >= 2 {
            return Ok(LimitEstimate {
                value: v,
                converged: true,
                trace,
            });
        }
    }
    let value = trace.last().map(|p| p.1).unwrap_or(f64::NAN);
    Ok(LimitEstimate {
        value,
        converged: false,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffSchedule {
    pub h0: f64,
    pub ratio: f64,
    pub steps: usize,
}

impl Default for DiffSchedule {
    fn default() -> Self {
        DiffSchedule {
            h0: 1e-2,
            ratio: 0.5,
            steps: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub error: f64,
}

/// One-sided difference quotients on a shrinking step sequence with
/// first-order Richardson refinement of consecutive pairs.
pub fn one_sided_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, side: Side, sched: &DiffSchedule) -> SlopeEstimate {
    let sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    let fx = f(x);
    let steps = sched.steps.max(2);
    let r = sched.ratio;
    let mut h = sched.h0;
    let mut prev_d: Option<f64> = None;
    let mut refined: Vec<f64> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let d = sign * (f(x + sign * h) - fx) / h;
        if let Some(pd) = prev_d {
            refined.push((d - r * pd) / (1.0 - r));
        }
        prev_d = Some(d);
        h *= r;
    }
    let n = refined.len();
    let slope = refined[n - 1];
    let error = if n >= 2 {
        (refined[n - 1] - refined[n - 2]).abs()
    } else {
        f64::INFINITY
    };
    SlopeEstimate { slope, error }
}

fn aitken(d: &[f64]) -> Vec<f64> {
    d.windows(3)
        .map(|w| {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            let den = d2 - d1;
            let flat = 1e-14 * (w[2].abs() + 1.0);
            if den.abs() <= flat || d2.abs() <= flat {
                w[2]
            } else {
                w[2] - d2 * d2 / den
            }
        })
        .collect()
}

/// One-sided slope for quotients behaving like `s + c·h^β` with unknown
/// `β > 0`: Aitken's Δ² on the quotient sequence. Falls back to the plain
/// quotient where consecutive differences vanish (locally linear `f`).
pub fn one_sided_derivative_aitken<F: FnMut(f64) -> f64>(
    mut f: F,
    x: f64,
    side: Side,
    sched: &DiffSchedule,
) -> SlopeEstimate {
    let sign = match side {
        Side::Right => 1.0,
        Side::Left => -1.0,
    };
    let fx = f(x);
    let mut h = sched.h0;
    let mut d = Vec::with_capacity(sched.steps.max(5));
    for _ in 0..sched.steps.max(5) {
        d.push(sign * (f(x + sign * h) - fx) / h);
        h *= sched.ratio;
    }
    let acc = aitken(&d);
    let n = acc.len();
    let error = if n >= 2 { (acc[n - 1] - acc[n - 2]).abs() } else { f64::INFINITY };
    SlopeEstimate { slope: acc[n - 1], error }
}

/// Symmetric difference quotient with one Richardson step; `h` is shrunk
/// so that `x ± h` stays inside `[lo, hi]`.
pub fn central_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let h = h.min(0.5 * (x - lo)).min(0.5 * (hi - x));
    if h <= 0.0 {
        let sched = DiffSchedule {
            h0: 1e-4,
            ..DiffSchedule::default()
        };
        let side = if x <= lo { Side::Right } else { Side::Left };
        return one_sided_derivative(f, x, side, &sched).slope;
    }
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    (4.0 * d2 - d1) / 3.0
}

/// Sorts the pieces of a nonnegative, compactly supported step function
/// by value, largest first, keeping their lengths.
pub fn decreasing_rearrangement(f: &StepFunction) -> Result<StepFunction> {
    if !f.is_nonnegative() {
        return Err(Error::domain("rearrangement of a function with negative values"));
    }
    if !f.is_compact() {
        return Err(Error::domain("rearrangement needs compact support"));
    }
    let mut pieces: Vec<(f64, f64)> = f.pieces().map(|(a, b, c)| (c, b - a)).collect();
    pieces.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut breaks = vec![0.0];
    let mut values = Vec::new();
    let mut x = 0.0;
    for (c, len) in pieces {
        x += len;
        breaks.push(x);
        values.push(c);
    }
    StepFunction::new(breaks, values, 0.0)
}

/// Hardy–Littlewood order: `g ≺ f` iff `∫₀ᵗ g* ≤ ∫₀ᵗ f*` for all `t`.
pub fn majorizes(f: &StepFunction, g: &StepFunction) -> bool {
    let (fs, gs) = match (decreasing_rearrangement(f), decreasing_rearrangement(g)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return false,
    };
    let mut pts: Vec<f64> = fs.breaks().iter().chain(gs.breaks()).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let cumulative = |h: &StepFunction, t: f64| -> f64 {
        h.pieces()
            .map(|(a, b, c)| if t <= a { 0.0 } else { c * (b.min(t) - a) })
            .sum()
    };
    pts.iter().all(|&t| cumulative(&gs, t) <= cumulative(&fs, t) + 1e-12)
}
