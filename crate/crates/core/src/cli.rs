//! The `mdl` command line: verification suites, rate tables, single duality
//! values and Monte-Carlo duality checks.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::duality::{duality_braided, duality_msasep, duality_open};
use crate::error::{Error, Result};
use crate::fusion::{aux_process_distribution, fused_bond_probability};
use crate::generators::braided_rate;
use crate::qnum::{check_unit_interval, parse_rational, to_f64, Rational};
use crate::sim::{build_system, estimate_duality_gap_with, exact_expectation, z_score, ModelParams};
use crate::states::{parse_labels, Model};
use crate::verify::{run_suite, DualityReport, Suite, SuiteParams};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "mdl", version, about = "Exact and Monte-Carlo checks of ASEP self-dualities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run exact verification suites.
    Verify(VerifyArgs),
    /// Print braided jump probabilities.
    Rates(RatesArgs),
    /// Evaluate one duality value.
    Duality(DualityArgs),
    /// Estimate both sides of the duality identity by simulation.
    Simulate(SimulateArgs),
    /// Summarise a saved verify run, or run every suite and summarise.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Msasep,
    Open,
    Braided,
    Algebra,
    Appendix,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Msasep => Suite::Msasep,
            SuiteArg::Open => Suite::Open,
            SuiteArg::Braided => Suite::Braided,
            SuiteArg::Algebra => Suite::Algebra,
            SuiteArg::Appendix => Suite::Appendix,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Msasep,
    Open,
    Braided,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Msasep => Model::Msasep,
            ModelArg::Open => Model::Open,
            ModelArg::Braided => Model::Braided,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RateSource {
    Closed,
    Fusion,
    Aux,
}

#[derive(clap::Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: SuiteArg,
    #[arg(long = "L", default_value_t = 3)]
    pub l: usize,
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value = "1/2")]
    pub q: String,
    #[arg(long = "Q", default_value = "1/3")]
    pub big_q: String,
    #[arg(long = "s", num_args = 1.., default_values_t = ["1/3".to_string(), "1/2".to_string()])]
    pub s: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct RatesArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub k1: u32,
    #[arg(long)]
    pub k2: u32,
    #[arg(long, default_value = "1/2")]
    pub q: String,
    #[arg(long, value_enum, default_value_t = RateSource::Closed)]
    pub source: RateSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct DualityArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub eta: String,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    #[arg(long, default_value = "1/2")]
    pub q: String,
    #[arg(long = "Q", default_value = "1/3")]
    pub big_q: String,
    /// Site capacity for the braided model.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub y: String,
    #[arg(long, default_value = "1")]
    pub t: String,
    /// Trajectories per side.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "1/2")]
    pub q: String,
    #[arg(long = "Q", default_value = "1/3")]
    pub big_q: String,
    /// Number of species (msasep); defaults to the largest label present.
    #[arg(long)]
    pub species: Option<u32>,
    /// Site capacity (braided); defaults to the largest occupancy present.
    #[arg(long)]
    pub m: Option<u32>,
    /// Also evaluate both sides by a truncated exponential series.
    #[arg(long)]
    pub exact_order: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct ReportArgs {
    /// A JSON document written by `mdl verify --out`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "1/2")]
    pub q: String,
    #[arg(long = "Q", default_value = "1/3")]
    pub big_q: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub big_q: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub s: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Result of one command: JSON document, summary line, exit code.
#[derive(Debug)]
pub struct Outcome {
    pub json: Value,
    pub summary: String,
    pub code: i32,
}

fn q_param(name: &str, s: &str) -> Result<Rational> {
    let v = parse_rational(s)?;
    check_unit_interval(name, &v)?;
    Ok(v)
}

fn envelope(config: &RunConfig, result: Value) -> Value {
    json!({ "config": config, "result": result })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn summarise_reports(reports: &[DualityReport]) -> (bool, String) {
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.identity.as_str()).collect();
    let pass = failed.is_empty();
    let mut line = format!("{}: {}/{} checks passed", verdict(pass), reports.len() - failed.len(), reports.len());
    if !pass {
        line.push_str(&format!(" (failed: {})", failed.join(", ")));
    }
    (pass, line)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let q = q_param("q", &a.q)?;
    let big_q = q_param("Q", &a.big_q)?;
    let s_values = a.s.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
    if s_values.iter().any(|s| s < &Rational::from_integer(0.into())) {
        return Err(Error::InvalidParameter("s must be non-negative".into()));
    }
    if a.l == 0 || a.n == 0 || a.m == 0 {
        return Err(Error::InvalidParameter("L, n and m must be positive".into()));
    }
    let config = RunConfig {
        subcommand: "verify".into(),
        suite: Some(format!("{:?}", a.suite).to_lowercase()),
        l: Some(a.l),
        n: Some(a.n),
        m: Some(a.m),
        q: Some(q.to_string()),
        big_q: Some(big_q.to_string()),
        s: s_values.iter().map(ToString::to_string).collect(),
        out: a.out.clone(),
        ..Default::default()
    };
    let params = SuiteParams {
        l: a.l,
        n: a.n,
        m: a.m,
        q,
        big_q,
        s_values,
    };
    let reports = run_suite(a.suite.into(), &params)?;
    let (pass, summary) = summarise_reports(&reports);
    let json = envelope(&config, json!({ "pass": pass, "reports": reports }));
    Ok(Outcome {
        json,
        summary,
        code: if pass { EXIT_PASS } else { EXIT_FAIL },
    })
}

pub fn cmd_rates(a: &RatesArgs) -> Result<Outcome> {
    let q = q_param("q", &a.q)?;
    if a.k1 > a.m || a.k2 > a.m {
        return Err(Error::InvalidParameter(format!("occupancies ({}, {}) exceed m = {}", a.k1, a.k2, a.m)));
    }
    let probs: Vec<Rational> = match a.source {
        RateSource::Closed => (0..=a.m).map(|l2| braided_rate(a.m, a.k1, a.k2, l2, &q)).collect(),
        RateSource::Fusion => (0..=a.m)
            .map(|l2| fused_bond_probability(a.m, a.k1, a.k2, l2, &q))
            .collect::<Result<_>>()?,
        RateSource::Aux => aux_process_distribution(a.m, a.k1, a.k2, &q)?,
    };
    let total = a.k1 + a.k2;
    let rows: Vec<Value> = probs
        .iter()
        .enumerate()
        .filter(|(l2, _)| (*l2 as u32) <= total && total - *l2 as u32 <= a.m)
        .map(|(l2, p)| json!({ "l1": total - l2 as u32, "l2": l2, "p": p.to_string() }))
        .collect();
    let config = RunConfig {
        subcommand: "rates".into(),
        m: Some(a.m),
        q: Some(q.to_string()),
        out: a.out.clone(),
        ..Default::default()
    };
    let source = format!("{:?}", a.source).to_lowercase();
    let summary = format!(
        "rates m={} (k1,k2)=({},{}) source={source}: {}",
        a.m,
        a.k1,
        a.k2,
        rows.iter().map(|r| format!("l2={} p={}", r["l2"], r["p"].as_str().unwrap_or(""))).collect::<Vec<_>>().join(", ")
    );
    let json = envelope(&config, json!({ "k1": a.k1, "k2": a.k2, "source": source, "distribution": rows }));
    Ok(Outcome {
        json,
        summary,
        code: EXIT_PASS,
    })
}

pub fn cmd_duality(a: &DualityArgs) -> Result<Outcome> {
    let q = q_param("q", &a.q)?;
    let eta = parse_labels(&a.eta)?;
    let xi = parse_labels(&a.xi)?;
    let model: Model = a.model.into();
    let mut config = RunConfig {
        subcommand: "duality".into(),
        model: Some(model.to_string()),
        l: Some(eta.len().saturating_sub(usize::from(model == Model::Open))),
        q: Some(q.to_string()),
        out: a.out.clone(),
        ..Default::default()
    };
    let value = match model {
        Model::Msasep => {
            if eta.iter().chain(&xi).any(|&v| v < 0) {
                return Err(Error::InvalidParameter("msasep labels must be non-negative".into()));
            }
            duality_msasep(&eta, &xi, &q)?
        }
        Model::Open => {
            let big_q = q_param("Q", &a.big_q)?;
            config.big_q = Some(big_q.to_string());
            duality_open(&eta, &xi, &q, &big_q)?
        }
        Model::Braided => {
            let m = a.m.ok_or_else(|| Error::InvalidParameter("braided duality needs --m".into()))?;
            if m == 0 || eta.iter().chain(&xi).any(|&v| v < 0 || v as u32 > m) {
                return Err(Error::InvalidParameter(format!("occupancies must lie in 0..={m}")));
            }
            config.m = Some(m);
            duality_braided(&eta, &xi, &q, m)?
        }
    };
    let summary = format!("D({}, {}) = {value}", a.eta.trim(), a.xi.trim());
    let json = envelope(&config, json!({ "eta": eta, "xi": xi, "value": value.to_string(), "approx": to_f64(&value) }));
    Ok(Outcome {
        json,
        summary,
        code: EXIT_PASS,
    })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome> {
    let q = q_param("q", &a.q)?;
    let big_q = q_param("Q", &a.big_q)?;
    let t = parse_rational(&a.t)?;
    if t < Rational::from_integer(0.into()) {
        return Err(Error::InvalidParameter("t must be non-negative".into()));
    }
    let x = parse_labels(&a.x)?;
    let y = parse_labels(&a.y)?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    let model: Model = a.model.into();
    let largest = x.iter().chain(&y).map(|v| v.unsigned_abs()).max().unwrap_or(0).max(1);
    let (l, param) = match model {
        Model::Msasep => (x.len(), a.species.unwrap_or(largest)),
        Model::Open => (x.len().saturating_sub(1), 1),
        Model::Braided => (x.len(), a.m.unwrap_or(largest)),
    };
    let params = ModelParams {
        model,
        l,
        param,
        q: q.clone(),
        big_q: big_q.clone(),
    };
    let config = RunConfig {
        subcommand: "simulate".into(),
        model: Some(model.to_string()),
        l: Some(l),
        n: (model == Model::Msasep).then_some(param),
        m: (model == Model::Braided).then_some(param),
        q: Some(q.to_string()),
        big_q: (model == Model::Open).then(|| big_q.to_string()),
        seed: Some(a.seed),
        out: a.out.clone(),
        ..Default::default()
    };
    let started = Instant::now();
    let (gen, d) = build_system(&params)?;
    let tf = to_f64(&t);
    let (s1, s2) = estimate_duality_gap_with(&gen, &d, &x, &y, tf, a.n, a.seed)?;
    let z = z_score(&s1, &s2);
    let mut result = json!({
        "x": x,
        "y": y,
        "t": t.to_string(),
        "n": a.n,
        "side1": { "mean": s1.mean, "se": s1.se },
        "side2": { "mean": s2.mean, "se": s2.se },
        "z": z,
    });
    if let Some(order) = a.exact_order {
        let ex = exact_expectation(&gen, &d, &x, &y, tf, order)?;
        result["exact"] = serde_json::to_value(ex).expect("serialisable");
    }
    result["seconds"] = json!(started.elapsed().as_secs_f64());
    let summary = format!(
        "E_x[D(X_t,y)] = {:.6} ± {:.2e}, E_y[D(x,Y_t)] = {:.6} ± {:.2e}, z = {z:.3}",
        s1.mean, s1.se, s2.mean, s2.se
    );
    Ok(Outcome {
        json: envelope(&config, result),
        summary,
        code: EXIT_PASS,
    })
}

pub fn cmd_report(a: &ReportArgs) -> Result<Outcome> {
    let config = RunConfig {
        subcommand: "report".into(),
        q: Some(a.q.clone()),
        big_q: Some(a.big_q.clone()),
        out: a.out.clone(),
        ..Default::default()
    };
    let reports: Vec<DualityReport> = match &a.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            serde_json::from_value(doc["result"]["reports"].clone())
                .map_err(|e| Error::Parse(format!("not a verify document: {e}")))?
        }
        None => {
            let params = SuiteParams {
                q: q_param("q", &a.q)?,
                big_q: q_param("Q", &a.big_q)?,
                ..SuiteParams::default()
            };
            run_suite(Suite::All, &params)?
        }
    };
    let (pass, summary) = summarise_reports(&reports);
    let table: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "identity": r.identity, "pass": r.pass, "max_residual": r.max_residual }))
        .collect();
    let total_seconds: f64 = reports.iter().map(|r| r.seconds).sum();
    let json = envelope(
        &config,
        json!({ "pass": pass, "count": reports.len(), "failed": reports.iter().filter(|r| !r.pass).count(), "seconds": total_seconds, "checks": table }),
    );
    Ok(Outcome {
        json,
        summary,
        code: if pass { EXIT_PASS } else { EXIT_FAIL },
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Rates(a) => cmd_rates(a),
        Command::Duality(a) => cmd_duality(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn out_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::Verify(a) => a.out.as_ref(),
        Command::Rates(a) => a.out.as_ref(),
        Command::Duality(a) => a.out.as_ref(),
        Command::Simulate(a) => a.out.as_ref(),
        Command::Report(a) => a.out.as_ref(),
    }
}

/// Parses `args`, runs the command, writes JSON to `stdout` and the summary
/// line to `stderr`, and returns the exit code.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("serialisable");
            let _ = writeln!(stdout, "{text}");
            if let Some(path) = out_path(&cli) {
                if let Err(e) = std::fs::write(path, format!("{text}\n")) {
                    let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            }
            let _ = writeln!(stderr, "{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}
