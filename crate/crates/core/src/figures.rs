//! Canonical configurations behind the four product figures, rendered as
//! angular curves `t ↦ Λ(t, 1-t)`.

use serde_json::json;

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::iterates::iterate_n;
use crate::product::{generalized_product, star_product, ProductResult};
use crate::report::{Curve, Table};
use crate::tdf::TailDependenceFunction;

pub const DEFAULT_GRID: usize = 101;

/// Operand curve names are `lambda1, lambda2, …`; the grey bound is `upper_bound`.
fn operand(name: &str, l: &TailDependenceFunction, n: usize) -> Result<Curve> {
    Curve::sample(name, n, |t| l.eval(t, 1.0 - t))
}

fn product_curve(name: &str, p: &ProductResult, n: usize) -> Result<Curve> {
    Curve::sample(name, n, |t| p.eval(&[t, 1.0 - t]))
}

fn upper_bound(n: usize) -> Result<Curve> {
    Curve::sample("upper_bound", n, |t| Ok(t.min(1.0 - t)))
}

/// One panel per copula in `{C⁻, Π, C⁺}`.
fn copula_panels(l1: &TailDependenceFunction, l2: &TailDependenceFunction, n: usize) -> Result<Vec<Curve>> {
    let mut curves = vec![operand("lambda1", l1, n)?, operand("lambda2", l2, n)?, upper_bound(n)?];
    for (name, c) in [
        ("product_lower_frechet", Copula::LowerFrechet),
        ("product_independence", Copula::Product),
        ("product_upper_frechet", Copula::UpperFrechet),
    ] {
        let p = generalized_product(&c, &[l1.clone(), l2.clone()])?;
        curves.push(product_curve(name, &p, n)?);
    }
    Ok(curves)
}

fn labels(ls: &[&TailDependenceFunction]) -> Vec<String> {
    ls.iter().map(|l| l.label()).collect()
}

/// Data for figure `id` on an `n`-point grid.
pub fn figure(id: u8, n: usize) -> Result<Table> {
    match id {
        1 => {
            let l1 = TailDependenceFunction::linear_min(2.0 / 3.0, 1.0)?;
            let l2 = TailDependenceFunction::linear_min(0.5, 0.25)?;
            let curves = copula_panels(&l1, &l2, n)?;
            let cfg = json!({
                "figure": 1, "grid": n, "operands": labels(&[&l1, &l2]),
                "copulas": ["lower_frechet", "independence", "upper_frechet"],
            });
            Ok(Table::new(cfg, curves))
        }
        2 => {
            let l1 = TailDependenceFunction::linear_min(0.5, 1.0)?;
            let l2 = TailDependenceFunction::clayton(1.0)?;
            let curves = copula_panels(&l1, &l2, n)?;
            let cfg = json!({
                "figure": 2, "grid": n, "operands": labels(&[&l1, &l2]),
                "copulas": ["lower_frechet", "independence", "upper_frechet"],
            });
            Ok(Table::new(cfg, curves))
        }
        3 => {
            let l1 = TailDependenceFunction::linear_min(0.5, 1.0)?;
            let l2 = TailDependenceFunction::linear_min(0.25, 0.5)?;
            let l3 = TailDependenceFunction::clayton(1.0)?;
            let mut curves = vec![
                operand("lambda1", &l1, n)?,
                operand("lambda2", &l2, n)?,
                operand("lambda3", &l3, n)?,
                upper_bound(n)?,
            ];
            curves.push(product_curve("product_13", &star_product(&l1, &l3)?, n)?);
            curves.push(product_curve("product_23", &star_product(&l2, &l3)?, n)?);
            let cfg = json!({
                "figure": 3, "grid": n, "operands": labels(&[&l1, &l2, &l3]),
                "products": ["lambda1*lambda3", "lambda2*lambda3"],
            });
            Ok(Table::new(cfg, curves))
        }
        4 => {
            let p = 1.0 / 3.0;
            let l = TailDependenceFunction::plateau(p)?;
            let mut curves = vec![upper_bound(n)?];
            for k in [1usize, 2, 3, 5] {
                curves.push(product_curve(&format!("n{k}"), &iterate_n(&l, k)?, n)?);
            }
            let cfg = json!({ "figure": 4, "grid": n, "operand": l.label(), "iterates": [1, 2, 3, 5] });
            Ok(Table::new(cfg, curves))
        }
        other => Err(Error::config("figure", format!("expected 1, 2, 3 or 4, got {other}"))),
    }
}
