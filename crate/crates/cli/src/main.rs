use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use taildep::copula::{extract_tail, Copula};
use taildep::figures::{self, DEFAULT_GRID};
use taildep::iterates::{classify_limit, iterate_trace, iterates};
use taildep::numerics::{LimitSchedule, QuadratureConfig};
use taildep::product::{generalized_product_with, Strategy};
use taildep::report::{Curve, Table, VERSION};
use taildep::spec;
use taildep::step::StepFunction;
use taildep::subdist::SubdistributionFunction;
use taildep::substoch::{
    adjoint_pairing, check_equivariance, contraction_report, equivariance_points, markov_report, round_trip,
};
use taildep::tdf::{grid, TailDependenceFunction};
use taildep::Error;

#[derive(Parser, Debug)]
#[command(name = "taildep", version, about = "Markov products of tail dependence functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of simplex grid points.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID)]
    grid: usize,

    /// Tolerance; its meaning and default depend on the subcommand.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Limit schedule `s0,ratio,steps` for tail extraction.
    #[arg(long, global = true)]
    schedule: Option<String>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for the random test vectors of `operator`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized product of two or more tail dependence functions.
    Product {
        /// Operand spec (inline JSON or file path); repeat for each factor.
        #[arg(long = "tdf", required = true)]
        tdfs: Vec<String>,
        /// Inducing copula spec; defaults to independence.
        #[arg(long)]
        copula: Option<String>,
        /// Force numerical integration.
        #[arg(long)]
        quadrature: bool,
    },
    /// Markov iterates and limit classification.
    Iterate {
        /// Operand spec.
        #[arg(long = "tdf", conflicts_with = "p")]
        tdf: Option<String>,
        /// Plateau level, shorthand for `{"family":"plateau","p":P}`.
        #[arg(long)]
        p: Option<f64>,
        /// Number of iterates.
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Iteration budget of the limit classification.
        #[arg(long, default_value_t = 100_000)]
        n_max: usize,
    },
    /// Tail dependence function of a copula by `C(s·w)/s` as `s ↘ 0`.
    ExtractTail {
        #[arg(long)]
        copula: String,
        /// Points `w1:w2` separated by `;`; defaults to the 11-point simplex grid.
        #[arg(long)]
        points: Option<String>,
    },
    /// Checks of the substochastic operator backed by a kernel.
    Operator {
        /// Kernel spec: a tail dependence function or `capped_comonotone`.
        #[arg(long)]
        kernel: String,
        /// Test vector as a step-function spec; defaults to `1_[0,1]`.
        #[arg(long)]
        step: Option<String>,
        /// Comma-separated subset of the checks; all by default.
        #[arg(long)]
        checks: Option<String>,
        /// Number of additional random test vectors.
        #[arg(long, default_value_t = 3)]
        random: usize,
    },
    /// Data behind one of the four product figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
    },
}

/// Failures mapped to exit codes: 2 for configuration, 3 for numerics.
enum Failure {
    Config(String),
    NoConvergence(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric { .. } => Failure::NoConvergence(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config_err(field: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("invalid value for `{field}`: {reason}"))
}

/// Inline JSON when the argument looks like an object, otherwise a path.
fn read_spec(arg: &str, flag: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| config_err(flag, format!("cannot read `{arg}`: {e}")))
    }
}

fn prefixed(e: Error, flag: &str) -> Failure {
    match e {
        Error::InvalidSpec { field, reason } | Error::Config { field, reason } => {
            config_err(&format!("{flag}.{field}"), reason)
        }
        other => Failure::from(other),
    }
}

fn tdf_arg(arg: &str, flag: &str) -> Result<TailDependenceFunction, Failure> {
    spec::parse_tdf(&read_spec(arg, flag)?).map_err(|e| prefixed(e, flag))
}

fn copula_arg(arg: &str, flag: &str) -> Result<Copula, Failure> {
    spec::parse_copula(&read_spec(arg, flag)?).map_err(|e| prefixed(e, flag))
}

fn schedule(cli: &Cli, stall: f64) -> Result<LimitSchedule, Failure> {
    let mut s = LimitSchedule {
        stall,
        ..LimitSchedule::default()
    };
    if let Some(text) = &cli.schedule {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(config_err("schedule", "expected `s0,ratio,steps`"));
        }
        s.s0 = parts[0].parse().map_err(|_| config_err("schedule.s0", "not a number"))?;
        s.ratio = parts[1].parse().map_err(|_| config_err("schedule.ratio", "not a number"))?;
        s.max_steps = parts[2].parse().map_err(|_| config_err("schedule.steps", "not an integer"))?;
    }
    s.check().map_err(|e| prefixed(e, "schedule"))?;
    Ok(s)
}

fn tol(cli: &Cli, default: f64) -> Result<f64, Failure> {
    match cli.tol {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => Err(config_err("tol", format!("must be positive, got {t}"))),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| config_err("out", format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(cli: &Cli, table: &Table) -> String {
    match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn cmd_product(cli: &Cli, tdfs: &[String], copula: Option<&str>, quadrature: bool) -> Result<(), Failure> {
    if tdfs.len() < 2 {
        return Err(config_err("tdf", "at least two operands are required"));
    }
    let ls: Vec<TailDependenceFunction> = tdfs
        .iter()
        .enumerate()
        .map(|(i, s)| tdf_arg(s, &format!("tdf[{i}]")))
        .collect::<Result<_, _>>()?;
    let c = match copula {
        Some(s) => copula_arg(s, "copula")?,
        None => Copula::Product,
    };
    if !c.accepts(ls.len()) {
        return Err(config_err("copula", format!("{} does not take {} arguments", c.label(), ls.len())));
    }
    let strategy = if quadrature { Strategy::Quadrature } else { Strategy::Auto };
    let factors: Vec<SubdistributionFunction> = ls.iter().cloned().map(SubdistributionFunction::from).collect();
    let p = generalized_product_with(&c, &factors, strategy, &QuadratureConfig::default())?;
    let n = cli.grid;
    let mut curves = Vec::new();
    for (i, l) in ls.iter().enumerate() {
        curves.push(Curve::sample(format!("lambda{}", i + 1), n, |t| l.eval(t, 1.0 - t))?);
    }
    curves.push(Curve::sample("upper_bound", n, |t| Ok(t.min(1.0 - t)))?);
    // Beyond two factors the curve follows w = (t, 1-t, …, 1-t).
    let d = ls.len();
    curves.push(Curve::sample("product", n, |t| {
        let mut w = vec![1.0 - t; d];
        w[0] = t;
        p.eval(&w)
    })?);
    let cfg = json!({
        "command": "product", "grid": n, "operands": p.provenance().operands,
        "copula": c.label(), "method": p.method(),
    });
    emit(cli, &render(cli, &Table::new(cfg, curves)))
}

fn cmd_iterate(cli: &Cli, tdf: Option<&str>, p: Option<f64>, n: usize, n_max: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(config_err("n", "must be at least 1"));
    }
    let l = match (tdf, p) {
        (Some(s), _) => tdf_arg(s, "tdf")?,
        (None, Some(p)) => TailDependenceFunction::plateau(p).map_err(|e| prefixed(e, "p"))?,
        (None, None) => return Err(config_err("tdf", "either --tdf or --p is required")),
    };
    let tol = tol(cli, taildep::iterates::DEFAULT_LIMIT_TOL)?;
    let its = iterates(&l, n)?;
    let mut curves = Vec::new();
    for (k, it) in its.iter().enumerate() {
        curves.push(Curve::sample(format!("n{}", k + 1), cli.grid, |t| it.eval(&[t, 1.0 - t]))?);
    }
    let trace = iterate_trace(&l, n, cli.grid)?;
    let verdict = classify_limit(&l, tol, n_max)?;
    let cfg = json!({ "command": "iterate", "grid": cli.grid, "operand": l.label(), "n": n, "tol": tol, "n_max": n_max });
    let summary = json!({ "trace": trace, "classification": verdict });
    let table = Table::new(cfg, curves).with_summary(summary);
    emit(cli, &render(cli, &table))?;
    eprintln!(
        "limit: {} (n_reached = {}, converged = {})",
        serde_json::to_value(verdict.tag).unwrap_or(Value::Null).as_str().unwrap_or("?"),
        verdict.n_reached,
        verdict.converged
    );
    if verdict.converged {
        Ok(())
    } else {
        Err(Failure::NoConvergence(format!("no limit within tol {tol} after {n_max} iterations")))
    }
}

fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .enumerate()
        .map(|(i, s)| {
            let bad = || config_err(&format!("points[{i}]"), format!("expected `w1:w2`, got `{s}`"));
            let (a, b) = s.split_once(':').ok_or_else(bad)?;
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
                return Err(bad());
            }
            Ok((a, b))
        })
        .collect()
}

fn cmd_extract_tail(cli: &Cli, copula: &str, points: Option<&str>) -> Result<(), Failure> {
    let c = copula_arg(copula, "copula")?;
    let sched = schedule(cli, tol(cli, LimitSchedule::default().stall)?)?;
    let pts = match points {
        Some(text) => parse_points(text)?,
        None => grid(11).into_iter().map(|t| (t, 1.0 - t)).collect(),
    };
    let mut rows = Vec::new();
    for &w in &pts {
        let est = extract_tail(&c, w, &sched)?;
        rows.push((w, est.value, est.converged));
    }
    let text = match cli.format {
        Format::Csv => {
            let mut s = String::from("w1,w2,value,converged\n");
            for ((a, b), v, ok) in &rows {
                s.push_str(&format!("{a:.6},{b:.6},{v:.12},{ok}\n"));
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "metadata": { "version": VERSION, "config": {
                    "command": "extract-tail", "copula": c.label(), "schedule": sched,
                }},
                "rows": rows.iter().map(|((a, b), v, ok)| json!({"w": [a, b], "value": v, "converged": ok})).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
        }
    };
    emit(cli, &text)?;
    if rows.iter().all(|r| r.2) {
        Ok(())
    } else {
        Err(Failure::NoConvergence("tail extraction did not settle at every point".into()))
    }
}

const CHECKS: [&str; 8] = [
    "positivity",
    "l1_contraction",
    "sup_contraction",
    "majorization",
    "markov",
    "equivariance",
    "round_trip",
    "adjoint",
];

fn random_step(rng: &mut ChaCha8Rng) -> StepFunction {
    let pieces = rng.gen_range(1..=4);
    let mut breaks = vec![0.0];
    for _ in 0..pieces {
        let last = *breaks.last().unwrap();
        breaks.push(last + rng.gen_range(0.1..2.0));
    }
    let values = (0..pieces).map(|_| rng.gen_range(0.0..1.0)).collect();
    StepFunction::new(breaks, values, 0.0).expect("increasing breaks and finite values")
}

fn cmd_operator(
    cli: &Cli,
    kernel: &str,
    step: Option<&str>,
    checks: Option<&str>,
    random: usize,
) -> Result<(), Failure> {
    let k = spec::parse_kernel(&read_spec(kernel, "kernel")?).map_err(|e| prefixed(e, "kernel"))?;
    let f = match step {
        Some(s) => spec::parse_step(&read_spec(s, "step")?).map_err(|e| prefixed(e, "step"))?,
        None => StepFunction::indicator(0.0, 1.0)?,
    };
    let selected: Vec<&str> = match checks {
        None => CHECKS.to_vec(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .map(|c| {
                CHECKS
                    .iter()
                    .copied()
                    .find(|k| *k == c)
                    .ok_or_else(|| config_err("checks", format!("unknown check `{c}`")))
            })
            .collect::<Result<_, _>>()?,
    };
    let tol = tol(cli, 1e-6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let mut vectors = vec![f.clone()];
    vectors.extend((0..random).map(|_| random_step(&mut rng)));
    let compact: Vec<&StepFunction> = vectors.iter().filter(|v| v.is_compact() && v.is_nonnegative()).collect();

    let mut rows: Vec<(&str, bool, f64)> = Vec::new();
    for check in selected {
        let (pass, defect) = match check {
            "positivity" | "l1_contraction" | "sup_contraction" | "majorization" => {
                let mut defect: f64 = 0.0;
                let mut majorized = true;
                for v in &compact {
                    let r = contraction_report(&k, v)?;
                    defect = defect.max(match check {
                        "positivity" => -r.min_value,
                        "l1_contraction" => r.l1_out - r.l1_in,
                        "sup_contraction" => r.sup_out - r.sup_in,
                        _ => 0.0,
                    });
                    majorized &= r.majorized;
                }
                if check == "majorization" {
                    (majorized, if majorized { 0.0 } else { 1.0 })
                } else {
                    (defect <= tol, defect.max(0.0))
                }
            }
            "markov" => {
                let r = markov_report(&k);
                let d = r.unit_defect.max(r.mass_defect).max(r.adjoint_unit_defect).max(r.adjoint_mass_defect);
                (r.is_markov(tol), d)
            }
            "equivariance" => {
                let pts = equivariance_points();
                let mut d: f64 = 0.0;
                for v in &vectors {
                    for s in [0.5, 2.0] {
                        d = d.max(check_equivariance(&k, v, s, &pts)?);
                    }
                }
                (d <= tol, d)
            }
            "round_trip" => {
                let mut d: f64 = 0.0;
                for v in &vectors {
                    let r = round_trip(&k, v)?;
                    d = d.max(r.kernel_defect).max(r.operator_defect);
                }
                (d <= tol, d)
            }
            _ => {
                let mut d: f64 = 0.0;
                for v in &vectors {
                    for g in &compact {
                        d = d.max(adjoint_pairing(&k, v, g)?.defect);
                    }
                }
                (d <= tol, d)
            }
        };
        rows.push((check, pass, defect));
    }
    let text = match cli.format {
        Format::Csv => {
            let mut s = String::from("check,pass,defect\n");
            for (c, p, d) in &rows {
                s.push_str(&format!("{c},{p},{d:.6e}\n"));
            }
            s
        }
        Format::Json => {
            let doc = json!({
                "metadata": { "version": VERSION, "config": {
                    "command": "operator", "kernel": k.label(), "tol": tol, "seed": cli.seed, "random": random,
                }},
                "checks": rows.iter().map(|(c, p, d)| json!({"check": c, "pass": p, "defect": d})).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
        }
    };
    emit(cli, &text)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if cli.grid < 3 {
        return Err(config_err("grid", format!("need at least 3 points, got {}", cli.grid)));
    }
    match &cli.command {
        Command::Product { tdfs, copula, quadrature } => cmd_product(cli, tdfs, copula.as_deref(), *quadrature),
        Command::Iterate { tdf, p, n, n_max } => cmd_iterate(cli, tdf.as_deref(), *p, *n, *n_max),
        Command::ExtractTail { copula, points } => cmd_extract_tail(cli, copula, points.as_deref()),
        Command::Operator {
            kernel,
            step,
            checks,
            random,
        } => cmd_operator(cli, kernel, step.as_deref(), checks.as_deref(), *random),
        Command::Figure { id } => {
            let table = figures::figure(*id, cli.grid)?;
            emit(cli, &render(cli, &table))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::NoConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
