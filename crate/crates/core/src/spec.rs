//! JSON specifications of tail dependence functions, copulas, kernels and
//! step functions. Errors name the offending field by its JSON path.

use serde_json::{Map, Value};

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::step::StepFunction;
use crate::subdist::SubdistributionFunction;
use crate::tdf::{AngularFunction, TailDependenceFunction};

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| {
        Error::spec(if path.is_empty() { "spec" } else { path }, "expected a JSON object")
    })
}

fn family<'a>(m: &'a Map<String, Value>, path: &str) -> Result<&'a str> {
    match m.get("family") {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Error::spec(join(path, "family"), "expected a string")),
        None => Err(Error::spec(join(path, "family"), "missing")),
    }
}

fn only(m: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<()> {
    for k in m.keys() {
        if k != "family" && !allowed.contains(&k.as_str()) {
            return Err(Error::spec(join(path, k), "unknown field"));
        }
    }
    Ok(())
}

fn number(m: &Map<String, Value>, path: &str, key: &str) -> Result<f64> {
    let field = join(path, key);
    match m.get(key) {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| Error::spec(&field, "not representable")),
        Some(Value::String(s)) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
        Some(_) => Err(Error::spec(field, "expected a number")),
        None => Err(Error::spec(field, "missing")),
    }
}

fn numbers(m: &Map<String, Value>, path: &str, key: &str) -> Result<Vec<f64>> {
    let field = join(path, key);
    let arr = match m.get(key) {
        Some(Value::Array(a)) => a,
        Some(_) => return Err(Error::spec(field, "expected an array of numbers")),
        None => return Err(Error::spec(field, "missing")),
    };
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| Error::spec(format!("{field}[{i}]"), "expected a number"))
        })
        .collect()
}

/// Re-roots field names of nested spec errors under `path`.
fn rooted(e: Error, path: &str) -> Error {
    match e {
        Error::InvalidSpec { field, reason } => Error::spec(join(path, &field), reason),
        Error::Domain(msg) => Error::spec(if path.is_empty() { "spec" } else { path }, msg),
        other => other,
    }
}

pub fn tdf_from_value(v: &Value, path: &str) -> Result<TailDependenceFunction> {
    let m = object(v, path)?;
    let fam = family(m, path)?;
    let r = match fam {
        "comonotone" => {
            only(m, path, &[])?;
            Ok(TailDependenceFunction::comonotone())
        }
        "independence" => {
            only(m, path, &[])?;
            Ok(TailDependenceFunction::independence())
        }
        "clayton" => {
            only(m, path, &["alpha"])?;
            TailDependenceFunction::clayton(number(m, path, "alpha")?)
        }
        "linear_min" => {
            only(m, path, &["alpha", "beta"])?;
            TailDependenceFunction::linear_min(number(m, path, "alpha")?, number(m, path, "beta")?)
        }
        "plateau" => {
            only(m, path, &["p"])?;
            TailDependenceFunction::plateau(number(m, path, "p")?)
        }
        "piecewise_linear" => {
            only(m, path, &["t", "v"])?;
            let t = numbers(m, path, "t")?;
            let v = numbers(m, path, "v")?;
            AngularFunction::piecewise_linear(t, v)
                .and_then(TailDependenceFunction::new)
                .map_err(|e| match e {
                    Error::Domain(msg) => Error::spec("v", msg),
                    other => other,
                })
        }
        "sampled" => {
            only(m, path, &["values"])?;
            AngularFunction::sampled_raw(numbers(m, path, "values")?)
                .and_then(TailDependenceFunction::new)
                .map_err(|e| match e {
                    Error::Domain(msg) => Error::spec("values", msg),
                    other => other,
                })
        }
        other => return Err(Error::spec(join(path, "family"), format!("unknown family `{other}`"))),
    };
    r.map_err(|e| rooted(e, path))
}

pub fn copula_from_value(v: &Value, path: &str) -> Result<Copula> {
    let m = object(v, path)?;
    let fam = family(m, path)?;
    let r = match fam {
        "lower_frechet" | "countermonotone" => {
            only(m, path, &[])?;
            Ok(Copula::LowerFrechet)
        }
        "independence" | "product" => {
            only(m, path, &[])?;
            Ok(Copula::Product)
        }
        "comonotone" | "upper_frechet" => {
            only(m, path, &[])?;
            Ok(Copula::UpperFrechet)
        }
        "clayton" => {
            only(m, path, &["theta"])?;
            Copula::clayton(number(m, path, "theta")?)
        }
        "ev_survival" => {
            only(m, path, &["tdf"])?;
            let t = m.get("tdf").ok_or_else(|| Error::spec(join(path, "tdf"), "missing"))?;
            return Ok(Copula::ev_survival(tdf_from_value(t, &join(path, "tdf"))?));
        }
        "markov_product" => {
            only(m, path, &["left", "right"])?;
            let l = m.get("left").ok_or_else(|| Error::spec(join(path, "left"), "missing"))?;
            let r = m.get("right").ok_or_else(|| Error::spec(join(path, "right"), "missing"))?;
            let left = copula_from_value(l, &join(path, "left"))?;
            let right = copula_from_value(r, &join(path, "right"))?;
            Copula::markov_product(left, right)
        }
        other => return Err(Error::spec(join(path, "family"), format!("unknown family `{other}`"))),
    };
    r.map_err(|e| rooted(e, path))
}

/// A kernel is a tail dependence function spec or
/// `{"family":"capped_comonotone","cap":c}`.
pub fn kernel_from_value(v: &Value, path: &str) -> Result<SubdistributionFunction> {
    let m = object(v, path)?;
    if family(m, path)? == "capped_comonotone" {
        only(m, path, &["cap"])?;
        return SubdistributionFunction::capped_comonotone(number(m, path, "cap")?).map_err(|e| rooted(e, path));
    }
    tdf_from_value(v, path).map(SubdistributionFunction::from)
}

pub fn step_from_value(v: &Value, path: &str) -> Result<StepFunction> {
    let m = object(v, path)?;
    for k in m.keys() {
        if !matches!(k.as_str(), "breaks" | "values" | "tail") {
            return Err(Error::spec(join(path, k), "unknown field"));
        }
    }
    let breaks = numbers(m, path, "breaks")?;
    let values = numbers(m, path, "values")?;
    let tail = match m.get("tail") {
        None => 0.0,
        Some(_) => number(m, path, "tail")?,
    };
    StepFunction::new(breaks, values, tail).map_err(|e| rooted(e, path))
}

fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::spec("spec", format!("malformed JSON: {e}")))
}

pub fn parse_tdf(text: &str) -> Result<TailDependenceFunction> {
    tdf_from_value(&parse(text)?, "")
}

pub fn parse_copula(text: &str) -> Result<Copula> {
    copula_from_value(&parse(text)?, "")
}

pub fn parse_kernel(text: &str) -> Result<SubdistributionFunction> {
    kernel_from_value(&parse(text)?, "")
}

pub fn parse_step(text: &str) -> Result<StepFunction> {
    step_from_value(&parse(text)?, "")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let l = parse_tdf(r#"{"family":"clayton","alpha":1.0}"#).unwrap();
        assert!((l.value(1.0, 1.0) - 0.5).abs() < 1e-15);
        let l = parse_tdf(r#"{"family":"piecewise_linear","t":[0,0.4,1],"v":[0,0.2,0]}"#).unwrap();
        assert!((l.value(0.4, 0.6) - 0.2).abs() < 1e-15);
        assert!(parse_tdf(r#"{"family":"clayton","alpha":"inf"}"#).is_ok());
        let c = parse_copula(r#"{"family":"ev_survival","tdf":{"family":"plateau","p":0.25}}"#).unwrap();
        assert_eq!(c.label(), "ev_survival[plateau(p=0.25)]");
        let k = parse_kernel(r#"{"family":"capped_comonotone","cap":2}"#).unwrap();
        assert_eq!(k.value(5.0, 5.0), 2.0);
        let s = parse_step(r#"{"breaks":[0,1,3],"values":[2,0.5],"tail":0}"#).unwrap();
        assert_eq!(s.eval(2.0), 0.5);
    }

    #[test]
    fn errors_name_fields() {
        let field = |r: Result<TailDependenceFunction>| r.unwrap_err().field().unwrap().to_string();
        assert_eq!(field(parse_tdf(r#"{"family":"clayton"}"#)), "alpha");
        assert_eq!(field(parse_tdf(r#"{"family":"clayton","alpha":-1}"#)), "alpha");
        assert_eq!(field(parse_tdf(r#"{"family":"plateau","p":0.7}"#)), "p");
        assert_eq!(field(parse_tdf(r#"{"family":"plateau","p":0.2,"q":1}"#)), "q");
        assert_eq!(field(parse_tdf(r#"{"family":"nope"}"#)), "family");
        assert_eq!(field(parse_tdf(r#"{"family":"piecewise_linear","t":[0,0.5,1],"v":[0,0.7,0]}"#)), "v");
        assert_eq!(field(parse_tdf(r#"{"family":"piecewise_linear","t":[0,"x",1],"v":[0,0.1,0]}"#)), "t[1]");
        let e = parse_copula(r#"{"family":"ev_survival","tdf":{"family":"linear_min","alpha":2,"beta":1}}"#);
        assert_eq!(e.unwrap_err().field(), Some("tdf.alpha"));
        assert_eq!(parse_step(r#"{"breaks":[0,1],"values":[]}"#).unwrap_err().field(), Some("values"));
        assert_eq!(parse_tdf("{").unwrap_err().field(), Some("spec"));
    }
}
