#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taildep::step::StepFunction;
use taildep::subdist::SubdistributionFunction;
use taildep::tdf::{grid, TailDependenceFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `min(a·t, b·(1-t), ℓ₁(t), …)` where each `ℓₖ` is the chord through
/// `(0, c₀)` and `(1, c₁)`. Concave, grounded, below `min(t, 1-t)` for
/// `a, b ≤ 1`, with slopes in `[-b, a]`.
pub fn pl_from_lines(a: f64, b: f64, lines: &[(f64, f64)]) -> TailDependenceFunction {
    let mut ls: Vec<(f64, f64)> = vec![(0.0, a), (b, -b)];
    ls.extend(lines.iter().map(|&(c0, c1)| (c0, c1 - c0)));
    let f = |t: f64| ls.iter().map(|(c, d)| c + d * t).fold(f64::INFINITY, f64::min);
    let mut ts = vec![0.0, 1.0];
    for i in 0..ls.len() {
        for j in i + 1..ls.len() {
            let (c1, d1) = ls[i];
            let (c2, d2) = ls[j];
            if (d1 - d2).abs() > 1e-12 {
                let t = (c2 - c1) / (d1 - d2);
                if t > 1e-9 && t < 1.0 - 1e-9 {
                    ts.push(t);
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    let mut vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    vs[0] = 0.0;
    let last = vs.len() - 1;
    vs[last] = 0.0;
    // keep only kinks so that the representation is canonical
    let mut keep_t = vec![ts[0]];
    let mut keep_v = vec![vs[0]];
    for i in 1..ts.len() - 1 {
        let chord = vs[i - 1] + (vs[i + 1] - vs[i - 1]) * (ts[i] - ts[i - 1]) / (ts[i + 1] - ts[i - 1]);
        if (vs[i] - chord).abs() > 1e-12 {
            keep_t.push(ts[i]);
            keep_v.push(vs[i]);
        }
    }
    keep_t.push(1.0);
    keep_v.push(0.0);
    TailDependenceFunction::piecewise_linear(keep_t, keep_v).expect("min of lines is a tail dependence function")
}

pub fn random_pl(rng: &mut ChaCha8Rng) -> TailDependenceFunction {
    let a = rng.gen_range(0.2..=1.0);
    let b = rng.gen_range(0.2..=1.0);
    let k = rng.gen_range(0..=3);
    let lines: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(0.02..0.5), rng.gen_range(0.02..0.5)))
        .collect();
    pl_from_lines(a, b, &lines)
}

/// Strict piecewise-linear function: slopes 1 at 0 and -1 at 1.
pub fn random_strict_pl(rng: &mut ChaCha8Rng) -> TailDependenceFunction {
    let k = rng.gen_range(1..=3);
    let lines: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(0.05..0.45), rng.gen_range(0.05..0.45)))
        .collect();
    pl_from_lines(1.0, 1.0, &lines)
}

/// One instance from one of the parametric families or a random
/// piecewise-linear function.
pub fn random_family(rng: &mut ChaCha8Rng) -> TailDependenceFunction {
    match rng.gen_range(0..5) {
        0 => TailDependenceFunction::clayton(rng.gen_range(0.5..4.0)).unwrap(),
        1 => TailDependenceFunction::linear_min(rng.gen_range(0.1..=1.0), rng.gen_range(0.1..=1.0)).unwrap(),
        2 => TailDependenceFunction::plateau(rng.gen_range(0.05..0.5)).unwrap(),
        3 => TailDependenceFunction::comonotone(),
        _ => random_pl(rng),
    }
}

/// Representatives of all five families.
pub fn family_instances() -> Vec<TailDependenceFunction> {
    vec![
        TailDependenceFunction::comonotone(),
        TailDependenceFunction::independence(),
        TailDependenceFunction::clayton(1.0).unwrap(),
        TailDependenceFunction::clayton(2.5).unwrap(),
        TailDependenceFunction::linear_min(0.5, 1.0).unwrap(),
        TailDependenceFunction::linear_min(2.0 / 3.0, 0.25).unwrap(),
        TailDependenceFunction::plateau(1.0 / 3.0).unwrap(),
        TailDependenceFunction::plateau(0.1).unwrap(),
        TailDependenceFunction::piecewise_linear(vec![0.0, 0.4, 1.0], vec![0.0, 0.2, 0.0]).unwrap(),
    ]
}

pub fn sub(l: &TailDependenceFunction) -> SubdistributionFunction {
    SubdistributionFunction::from(l.clone())
}

/// Points `(t, 1-t)` of an `n`-point simplex grid.
pub fn simplex(n: usize) -> Vec<(f64, f64)> {
    grid(n).into_iter().map(|t| (t, 1.0 - t)).collect()
}

/// Nonnegative compactly supported step function with up to 5 pieces.
pub fn random_step(rng: &mut ChaCha8Rng) -> StepFunction {
    let pieces = rng.gen_range(1..=5);
    let mut breaks = vec![if rng.gen_bool(0.3) { rng.gen_range(0.0..1.0) } else { 0.0 }];
    for _ in 0..pieces {
        let last = *breaks.last().unwrap();
        breaks.push(last + rng.gen_range(0.05..2.0));
    }
    let mut values: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..2.0)).collect();
    if breaks[0] > 0.0 {
        breaks.insert(0, 0.0);
        values.insert(0, 0.0);
    }
    StepFunction::new(breaks, values, 0.0).unwrap()
}

/// Fixed case count; failures are reported, not persisted.
pub fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

pub fn pl_strategy() -> impl Strategy<Value = TailDependenceFunction> {
    (
        0.2f64..=1.0,
        0.2f64..=1.0,
        prop::collection::vec((0.02f64..0.5, 0.02f64..0.5), 0..=3),
    )
        .prop_map(|(a, b, lines)| pl_from_lines(a, b, &lines))
}

pub fn family_strategy() -> impl Strategy<Value = TailDependenceFunction> {
    prop_oneof![
        (0.5f64..4.0).prop_map(|a| TailDependenceFunction::clayton(a).unwrap()),
        (0.1f64..=1.0, 0.1f64..=1.0).prop_map(|(a, b)| TailDependenceFunction::linear_min(a, b).unwrap()),
        (0.0f64..=0.5).prop_map(|p| TailDependenceFunction::plateau(p).unwrap()),
        Just(TailDependenceFunction::comonotone()),
        Just(TailDependenceFunction::independence()),
        pl_strategy(),
    ]
}

pub fn step_strategy() -> impl Strategy<Value = StepFunction> {
    (prop::collection::vec((0.05f64..2.0, 0.0f64..2.0), 1..=5)).prop_map(|pieces| {
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        for (len, v) in pieces {
            breaks.push(breaks.last().unwrap() + len);
            values.push(v);
        }
        StepFunction::new(breaks, values, 0.0).unwrap()
    })
}

pub fn sup_diff<F: Fn(f64, f64) -> f64, G: Fn(f64, f64) -> f64>(f: F, g: G, pts: &[(f64, f64)]) -> f64 {
    pts.iter().map(|&(a, b)| (f(a, b) - g(a, b)).abs()).fold(0.0, f64::max)
}
