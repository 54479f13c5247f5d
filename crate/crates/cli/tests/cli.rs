use assert_cmd::Command;
use serde_json::Value;

fn taildep() -> Command {
    Command::cargo_bin("taildep").unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = taildep().args(args).assert().success().get_output().stdout.clone();
    String::from_utf8(out).unwrap()
}

fn stderr_of_failure(args: &[&str], code: i32) -> String {
    let out = taildep().args(args).assert().code(code).get_output().stderr.clone();
    String::from_utf8(out).unwrap()
}

/// `(curve, t) -> value` from the `curve,t,value` CSV.
fn value_at(csv: &str, curve: &str, t: &str) -> f64 {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|r| r[0] == curve && r[1] == t)
        .unwrap_or_else(|| panic!("no row {curve},{t}"))[2]
        .parse()
        .unwrap()
}

fn curve(csv: &str, name: &str) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .filter(|l| l.split(',').next() == Some(name))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

const PLUS: &str = r#"{"family":"comonotone"}"#;

#[test]
fn figures_match_fixtures() {
    for id in 1..=4 {
        let path = format!("{}/../core/tests/fixtures/figure{id}.csv", env!("CARGO_MANIFEST_DIR"));
        let frozen = std::fs::read_to_string(path).unwrap();
        assert_eq!(stdout(&["figure", &id.to_string()]), frozen, "figure {id}");
    }
}

#[test]
fn figure_writes_to_out_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f4.json");
    taildep()
        .args(["figure", "4", "--format", "json", "--grid", "11", "--out"])
        .arg(&path)
        .assert()
        .success()
        .stdout("");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["config"]["figure"], 4);
    assert!(doc["metadata"]["version"].is_string());
}

#[test]
fn configuration_errors_exit_2_naming_the_field() {
    let e = stderr_of_failure(&["product", "--tdf", r#"{"family":"clayton"}"#, "--tdf", PLUS], 2);
    assert!(e.contains("tdf[0].alpha"), "{e}");
    let e = stderr_of_failure(&["iterate", "--p", "0.7"], 2);
    assert!(e.contains("`p"), "{e}");
    let e = stderr_of_failure(
        &["extract-tail", "--copula", r#"{"family":"ev_survival","tdf":{"family":"plateau","p":2}}"#],
        2,
    );
    assert!(e.contains("copula.tdf.p"), "{e}");
    let e = stderr_of_failure(&["operator", "--kernel", PLUS, "--checks", "speed"], 2);
    assert!(e.contains("checks"), "{e}");
    let e = stderr_of_failure(&["figure", "1", "--grid", "2"], 2);
    assert!(e.contains("grid"), "{e}");
    let e = stderr_of_failure(&["extract-tail", "--copula", PLUS, "--schedule", "0.25,2,10"], 2);
    assert!(e.contains("schedule"), "{e}");
    let e = stderr_of_failure(&["product", "--tdf", "/nonexistent/spec.json", "--tdf", PLUS], 2);
    assert!(e.contains("tdf[0]"), "{e}");
    taildep().args(["figure", "5"]).assert().code(2);
}

#[test]
fn spec_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("l.json");
    std::fs::write(&path, r#"{"family":"linear_min","alpha":0.6666666666666666,"beta":1.0}"#).unwrap();
    let csv = stdout(&[
        "product",
        "--tdf",
        path.to_str().unwrap(),
        "--tdf",
        r#"{"family":"linear_min","alpha":0.5,"beta":0.25}"#,
    ]);
    assert!((value_at(&csv, "product", "0.500000") - 1.0 / 12.0).abs() <= 1e-12);
}

#[test]
fn iterate_plateau() {
    let csv = stdout(&["iterate", "--p", "0.3333333333333333", "--n", "5"]);
    assert!((value_at(&csv, "n3", "0.500000") - 7.0 / 27.0).abs() <= 1e-12);
    assert!((value_at(&csv, "n2", "0.500000") - 1.0 / 3.0).abs() <= 1e-12);
    let mids: Vec<f64> = (1..=5).map(|k| value_at(&csv, &format!("n{k}"), "0.500000")).collect();
    assert!(mids.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{mids:?}");

    let half = stdout(&["iterate", "--p", "0.5", "--n", "4"]);
    for k in 1..=4 {
        assert!((value_at(&half, &format!("n{k}"), "0.500000") - 0.5).abs() <= 1e-12);
    }
}

#[test]
fn iterate_comonotone_is_constant() {
    let out = taildep().args(["iterate", "--tdf", PLUS, "--n", "3"]).assert().success();
    let csv = String::from_utf8(out.get_output().stdout.clone()).unwrap();
    let n1 = curve(&csv, "n1");
    assert_eq!(n1.len(), 101);
    assert_eq!(curve(&csv, "n2"), n1);
    assert_eq!(curve(&csv, "n3"), n1);
    let err = String::from_utf8(out.get_output().stderr.clone()).unwrap();
    assert!(err.contains("comonotone"), "{err}");
}

#[test]
fn iterate_json_carries_classification() {
    let doc: Value = serde_json::from_str(&stdout(&[
        "iterate",
        "--tdf",
        r#"{"family":"clayton","alpha":1}"#,
        "--n",
        "2",
        "--grid",
        "11",
        "--format",
        "json",
    ]))
    .unwrap();
    assert_eq!(doc["summary"]["classification"]["tag"], "independence");
    assert_eq!(doc["summary"]["trace"].as_array().unwrap().len(), 2);
}

#[test]
fn iterate_budget_exhaustion_exits_3() {
    let e = stderr_of_failure(&["iterate", "--p", "0.45", "--n", "1", "--n-max", "3", "--tol", "1e-9"], 3);
    assert!(e.contains("no limit"), "{e}");
}

#[test]
fn extract_tail_examples() {
    let csv = stdout(&["extract-tail", "--copula", r#"{"family":"clayton","theta":1}"#, "--points", "1:1"]);
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!((row[2].parse::<f64>().unwrap() - 0.5).abs() <= 1e-3 && row[3] == "true");

    let csv = stdout(&[
        "extract-tail",
        "--copula",
        r#"{"family":"ev_survival","tdf":{"family":"plateau","p":0.3}}"#,
        "--points",
        "1:1;0.5:1",
    ]);
    let vals: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!((vals[0] - 0.6).abs() <= 1e-3 && (vals[1] - 0.45).abs() <= 1e-3, "{vals:?}");

    let product = r#"{"family":"markov_product","left":{"family":"comonotone"},"right":{"family":"clayton","theta":1}}"#;
    let csv = stdout(&["extract-tail", "--copula", product, "--points", "1:1"]);
    let v: f64 = csv.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((v - 0.5).abs() <= 1e-3);

    let csv = stdout(&["extract-tail", "--copula", r#"{"family":"product"}"#]);
    assert_eq!(csv.lines().count(), 12);
}

fn checks(args: &[&str]) -> Vec<(String, bool)> {
    stdout(args)
        .lines()
        .skip(1)
        .map(|l| {
            let r: Vec<&str> = l.split(',').collect();
            (r[0].to_string(), r[1] == "true")
        })
        .collect()
}

#[test]
fn operator_checks() {
    let all = checks(&["operator", "--kernel", PLUS]);
    assert_eq!(all.len(), 8);
    assert!(all.iter().all(|(_, ok)| *ok), "{all:?}");

    let c = checks(&["operator", "--kernel", r#"{"family":"clayton","alpha":1}"#, "--checks", "markov"]);
    assert_eq!(c, vec![("markov".to_string(), true)]);
    let m = checks(&["operator", "--kernel", r#"{"family":"linear_min","alpha":0.5,"beta":1}"#, "--checks", "markov"]);
    assert_eq!(m, vec![("markov".to_string(), false)]);

    let capped = checks(&["operator", "--kernel", r#"{"family":"capped_comonotone","cap":1}"#, "--checks", "equivariance"]);
    assert_eq!(capped, vec![("equivariance".to_string(), false)]);

    let stepped = checks(&[
        "operator",
        "--kernel",
        r#"{"family":"plateau","p":0.25}"#,
        "--step",
        r#"{"breaks":[0,1,3],"values":[2,0.5]}"#,
        "--checks",
        "positivity,l1_contraction,sup_contraction,majorization,adjoint",
    ]);
    assert!(stepped.iter().all(|(_, ok)| *ok), "{stepped:?}");
}

#[test]
fn product_examples() {
    let fig1 = [r#"{"family":"linear_min","alpha":0.6666666666666666,"beta":1}"#, r#"{"family":"linear_min","alpha":0.5,"beta":0.25}"#];
    let csv = stdout(&["product", "--tdf", fig1[0], "--tdf", fig1[1]]);
    assert!((value_at(&csv, "product", "0.500000") - 1.0 / 12.0).abs() <= 1e-12);

    let fig3 = [r#"{"family":"linear_min","alpha":0.5,"beta":1}"#, r#"{"family":"clayton","alpha":1}"#];
    let csv = stdout(&["product", "--tdf", fig3[0], "--tdf", fig3[1]]);
    assert!((value_at(&csv, "product", "0.500000") - 1.0 / 6.0).abs() <= 1e-9);

    // C⁺ with Λ⁺ as the left factor returns the right factor
    let csv = stdout(&["product", "--copula", PLUS, "--tdf", PLUS, "--tdf", fig3[1]]);
    let (p, l2) = (curve(&csv, "product"), curve(&csv, "lambda2"));
    assert!(p.iter().zip(&l2).all(|(a, b)| (a - b).abs() <= 1e-9));

    let q = stdout(&["product", "--quadrature", "--tdf", fig1[0], "--tdf", fig1[1], "--format", "json"]);
    let doc: Value = serde_json::from_str(&q).unwrap();
    assert_eq!(doc["metadata"]["config"]["method"], "quadrature");

    let three = stdout(&["product", "--tdf", PLUS, "--tdf", PLUS, "--tdf", PLUS, "--grid", "11"]);
    assert_eq!(curve(&three, "product").len(), 11);
    let e = stderr_of_failure(&["product", "--tdf", PLUS], 2);
    assert!(e.contains("tdf"), "{e}");
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["operator", "--kernel", r#"{"family":"clayton","alpha":2}"#, "--random", "4", "--seed", "17"];
    assert_eq!(stdout(&args), stdout(&args));
    let a = stdout(&["operator", "--kernel", r#"{"family":"plateau","p":0.3}"#, "--seed", "1", "--checks", "adjoint"]);
    let b = stdout(&["operator", "--kernel", r#"{"family":"plateau","p":0.3}"#, "--seed", "1", "--checks", "adjoint"]);
    assert_eq!(a, b);
}
