mod common;

use common::*;
use proptest::prelude::*;
use taildep::copula::{
    bivariate_defects, extract_tail, lift_copulas, markov_product_copulas, sobolev_diagnostic, Copula,
};
use taildep::numerics::LimitSchedule;
use taildep::product::star_product;
use taildep::tdf::TailDependenceFunction;
use taildep::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn clayton(theta: f64) -> Copula {
    Copula::clayton(theta).unwrap()
}

fn grid9() -> Vec<(f64, f64)> {
    let g = [0.2, 0.5, 0.8];
    g.iter().flat_map(|&u| g.iter().map(move |&v| (u, v))).collect()
}

#[test]
fn eval_examples() {
    assert_eq!(Copula::UpperFrechet.eval(&[0.3, 0.7]).unwrap(), 0.3);
    assert!(close(clayton(1.0).eval(&[0.5, 0.5]).unwrap(), 1.0 / 3.0, 1e-15));

    // survival of exp(-ℓ(-ln x, -ln y)) with ℓ(a, b) = a + b - Λ(a, b)
    let l = TailDependenceFunction::clayton(1.0).unwrap();
    let ev = |x: f64, y: f64| {
        let (a, b) = (-x.ln(), -y.ln());
        (-(a + b - a * b / (a + b))).exp()
    };
    let c = Copula::ev_survival(l);
    for (u, v) in grid9() {
        let oracle = u + v - 1.0 + ev(1.0 - u, 1.0 - v);
        assert!(close(c.eval(&[u, v]).unwrap(), oracle, 1e-14), "({u}, {v})");
    }
    assert!(close(c.eval(&[0.5, 0.5]).unwrap(), 2f64.powf(-1.5), 1e-14));

    assert!(matches!(Copula::Product.eval(&[1.2, 0.5]), Err(Error::Domain(_))));
    assert!(Copula::LowerFrechet.eval(&[0.5, 0.5, 0.5]).is_err());
}

#[test]
fn partial_examples() {
    for (t, v) in grid9() {
        assert!(close(Copula::Product.partial(1, t, v).unwrap(), v, 1e-15));
        let expect = if t < v { 1.0 } else { 0.0 };
        assert_eq!(Copula::UpperFrechet.partial(1, t, v).unwrap(), expect);
    }
    // right derivative at the kink
    assert_eq!(Copula::UpperFrechet.partial(1, 0.5, 0.5).unwrap(), 0.0);
    let c = clayton(1.0);
    let d = c.partial(1, 0.5, 0.5).unwrap();
    assert!(close(d, 4.0 / 9.0, 1e-15));
    let h = 1e-6;
    let fd = (c.eval(&[0.5 + h, 0.5]).unwrap() - c.eval(&[0.5 - h, 0.5]).unwrap()) / (2.0 * h);
    assert!(close(d, fd, 1e-8));
}

#[test]
fn extraction_examples() {
    let s = LimitSchedule::default();
    for (x, y) in simplex(5) {
        assert!(extract_tail(&Copula::Product, (x, y), &s).unwrap().value < 1e-3);
    }
    let c = extract_tail(&clayton(1.0), (1.0, 1.0), &s).unwrap();
    assert!(c.converged && close(c.value, 0.5, 1e-3));
    assert!(!c.trace.is_empty());
    let p = extract_tail(&Copula::UpperFrechet, (2.0, 3.0), &s).unwrap();
    assert!(p.converged && close(p.value, 2.0, 1e-12));
}

#[test]
fn darsow_product_examples() {
    let pc = markov_product_copulas(&Copula::Product, &clayton(1.0)).unwrap();
    for (u, v) in grid9() {
        assert!(close(pc.eval(&[u, v]).unwrap(), u * v, 1e-9));
    }
    let mm = markov_product_copulas(&Copula::LowerFrechet, &Copula::LowerFrechet).unwrap();
    assert!(close(mm.eval(&[0.3, 0.7]).unwrap(), 0.3, 1e-9));
    let unit = markov_product_copulas(&Copula::UpperFrechet, &clayton(1.0)).unwrap();
    for (u, v) in grid9() {
        assert!(close(unit.eval(&[u, v]).unwrap(), clayton(1.0).eval(&[u, v]).unwrap(), 1e-9));
    }
    assert!(markov_product_copulas(&Copula::Product, &Copula::Permuted {
        base: Box::new(Copula::Product),
        perm: vec![0, 1, 2]
    })
    .is_err());
}

#[test]
fn darsow_products_are_copulas() {
    let pts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for (a, b) in [
        (clayton(1.0), clayton(2.0)),
        (Copula::LowerFrechet, clayton(1.0)),
        (Copula::ev_survival(TailDependenceFunction::plateau(0.3).unwrap()), clayton(0.5)),
    ] {
        let c = markov_product_copulas(&a, &b).unwrap();
        let d = bivariate_defects(&c, &pts).unwrap();
        assert!(d.margin <= 1e-8 && d.grounded <= 1e-12 && d.min_volume >= -1e-8, "{}: {d:?}", c.label());
    }
}

#[test]
fn lifting_examples() {
    let (c1, c2) = (clayton(2.0), clayton(1.0));
    let darsow = markov_product_copulas(&c1, &c2).unwrap();
    for (u, v) in grid9() {
        let lifted = lift_copulas(&Copula::Product, &[c1.transpose(), c2.clone()], 1.0, &[u, v]).unwrap();
        assert!(close(lifted, darsow.eval(&[u, v]).unwrap(), 1e-9));
        assert_eq!(lift_copulas(&Copula::Product, &[c1.clone(), c2.clone()], 0.0, &[u, v]).unwrap(), 0.0);
        let m = lift_copulas(&Copula::UpperFrechet, &[Copula::UpperFrechet, Copula::UpperFrechet], 1.0, &[u, v]).unwrap();
        assert!(close(m, u.min(v), 1e-12));
    }
}

#[test]
fn sobolev_examples() {
    let s = LimitSchedule::new(0.25, 0.5, 10, 1e-4).unwrap();
    let l = TailDependenceFunction::clayton(1.0).unwrap();
    let ev = sobolev_diagnostic(&Copula::ev_survival(l.clone()), &l, 1.0, &s).unwrap();
    assert!(ev.nonincreasing && ev.decreasing_to_zero, "{:?}", ev.defects);

    let w = 0.8;
    let pi = sobolev_diagnostic(&Copula::Product, &TailDependenceFunction::independence(), w, &s).unwrap();
    assert!(pi.defects.iter().all(|d| close(*d, w, 1e-8)), "{:?}", pi.defects);
    assert!(!pi.decreasing_to_zero);

    let plus = sobolev_diagnostic(&Copula::UpperFrechet, &TailDependenceFunction::comonotone(), 1.0, &s).unwrap();
    assert!(plus.defects.iter().all(|d| *d <= 1e-12));
}

#[test]
fn product_tail_dominates_tail_product() {
    let s = LimitSchedule::default();
    let l = |x: TailDependenceFunction| x;
    let pairs = vec![
        (clayton(1.0), l(TailDependenceFunction::clayton(1.0).unwrap()), clayton(2.0), l(TailDependenceFunction::clayton(2.0).unwrap())),
        (Copula::Product, TailDependenceFunction::independence(), clayton(1.0), TailDependenceFunction::clayton(1.0).unwrap()),
        (
            Copula::ev_survival(TailDependenceFunction::linear_min(0.5, 1.0).unwrap()),
            TailDependenceFunction::linear_min(0.5, 1.0).unwrap(),
            clayton(1.0),
            TailDependenceFunction::clayton(1.0).unwrap(),
        ),
        (Copula::LowerFrechet, TailDependenceFunction::independence(), Copula::LowerFrechet, TailDependenceFunction::independence()),
    ];
    for (c1, l1, c2, l2) in pairs {
        let cc = markov_product_copulas(&c1, &c2).unwrap();
        let ll = star_product(&l1, &l2).unwrap();
        for (x, y) in simplex(6) {
            let extracted = extract_tail(&cc, (x, y), &s).unwrap().value;
            let computed = ll.eval(&[x, y]).unwrap();
            assert!(extracted - computed >= -2e-3, "{} at ({x}, {y}): {extracted} < {computed}", cc.label());
        }
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn ev_survival_recovers_its_tail(l in family_strategy()) {
        let c = Copula::ev_survival(l.clone());
        for (x, y) in simplex(11) {
            let est = extract_tail(&c, (x, y), &LimitSchedule::default()).unwrap();
            prop_assert!((est.value - l.value(x, y)).abs() <= 2e-3);
        }
    }

    #[test]
    fn ev_survival_is_a_copula(l in family_strategy()) {
        let pts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let d = bivariate_defects(&Copula::ev_survival(l), &pts).unwrap();
        prop_assert!(d.margin <= 1e-12 && d.grounded <= 1e-12 && d.min_volume >= -1e-12);
    }
}
