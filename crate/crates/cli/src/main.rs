use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fatou_core::cantor::{
    cantor_constants, digit_decompose, verify_affine_identity, BetaSeq, CantorError,
};
use fatou_core::field::{
    check_contraction_lemma, check_perturbation_lemmas, FieldError, LabConfig, LabReport,
    Perturbation,
};
use fatou_core::flow::{
    certify_component, propagate, trace_to_csv, trace_to_json, verify_diameter_theorem_from,
    CheckpointKind, FlowError, Verdict,
};
use fatou_core::scale::parse_ratio;
use fatou_core::{EllSpec, Exponent, PrimeParams, Schedule};
use num_rational::Ratio;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

/// Exact checks for wandering-domain constructions over non-archimedean fields.
#[derive(Parser, Serialize)]
#[command(name = "fatou", version)]
struct Cli {
    #[command(subcommand)]
    #[serde(flatten)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Derived constants q, kappa and the Cantor-set constants for a prime.
    Constants(PrimeArg),
    /// Replay the ball from exponent t and compare every checkpoint exactly.
    Verify(VerifyArgs),
    /// Step-by-step diameter trace.
    Trace(TraceArgs),
    /// Run the component ball against a larger concentric ball.
    Certify(CertifyArgs),
    /// Diameter parametrization by bit sequences.
    Cantor {
        #[command(subcommand)]
        #[serde(flatten)]
        action: CantorCommand,
    },
    /// Split tau into bit expansions through its base-B digits.
    Decompose(DecomposeArgs),
    /// Seeded valuation trials in a ramified extension of Q_p.
    Fieldlab {
        #[command(subcommand)]
        #[serde(flatten)]
        check: FieldCommand,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "action", rename_all = "kebab-case")]
enum CantorCommand {
    /// Check the affine identity for one eventually constant beta.
    Identity(IdentityArgs),
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "check")]
enum FieldCommand {
    /// Contraction, expansion and the affine case near 1.
    #[serde(rename = "lemma32")]
    Lemma32(ContractionArgs),
    /// Parameter perturbation over `--m` iterates inside B(1).
    #[serde(rename = "lemma42")]
    Lemma42(PerturbArgs),
    /// Parameter perturbation over the `--m` iterates of a zero block.
    #[serde(rename = "lemma43")]
    Lemma43(PerturbArgs),
}

#[derive(Args, Serialize)]
struct PrimeArg {
    #[arg(long)]
    p: u32,
}

#[derive(Args, Serialize)]
struct ScheduleArgs {
    #[arg(long)]
    p: u32,
    /// `id` or `prefix=a,b;cycle=c,d`.
    #[arg(long, default_value = "id", value_parser = parse_ells)]
    ells: EllSpec,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    s_max: u64,
    /// Starting exponent; defaults to the closed-form t.
    #[arg(long, value_parser = parse_exponent)]
    d0: Option<Exponent>,
}

#[derive(Args, Serialize)]
struct TraceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    steps: u64,
    #[arg(long, value_parser = parse_exponent)]
    d0: Option<Exponent>,
}

#[derive(Args, Serialize)]
struct CertifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    schedule: ScheduleArgs,
    /// Exponent of the larger ball, `num/den`.
    #[arg(long, value_parser = parse_exponent)]
    tprime: Exponent,
    /// Step budget.
    #[arg(long, default_value_t = 500)]
    steps: u64,
}

#[derive(Args, Serialize)]
struct IdentityArgs {
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// `bits;tail=b`, e.g. `101;tail=0`.
    #[arg(long, value_parser = parse_beta)]
    beta: BetaSeq,
}

#[derive(Args, Serialize)]
struct DecomposeArgs {
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Rational in [0, 1) with a power-of-p denominator.
    #[arg(long, value_parser = parse_exponent)]
    tau: Exponent,
}

#[derive(Args, Serialize)]
struct LabArgs {
    #[arg(long)]
    p: u32,
    /// Ramification index; valuations live in (1/e)Z.
    #[arg(long)]
    e: u32,
    /// Valuation of the parameter a.
    #[arg(long, default_value = "-1", value_parser = parse_q64, allow_hyphen_values = true)]
    #[serde(serialize_with = "ser_q64")]
    v_a: Ratio<i64>,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Absolute pi-adic precision; defaults to 64e.
    #[arg(long)]
    precision: Option<i64>,
}

#[derive(Args, Serialize)]
struct ContractionArgs {
    #[command(flatten)]
    #[serde(flatten)]
    lab: LabArgs,
    #[arg(long)]
    m: u32,
    #[arg(long)]
    item: u8,
}

#[derive(Args, Serialize)]
struct PerturbArgs {
    #[command(flatten)]
    #[serde(flatten)]
    lab: LabArgs,
    #[arg(long)]
    m: u32,
}

fn parse_ells(s: &str) -> Result<EllSpec, String> {
    s.parse()
        .map_err(|e: fatou_core::scale::ScaleError| e.to_string())
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    parse_ratio(s).map(Exponent::new).map_err(|e| e.to_string())
}

fn parse_beta(s: &str) -> Result<BetaSeq, String> {
    s.parse().map_err(|e: CantorError| e.to_string())
}

fn parse_q64(s: &str) -> Result<Ratio<i64>, String> {
    let bad = || format!("cannot parse rational `{s}`");
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: i64 = n.trim().parse().map_err(|_| bad())?;
    let d: i64 = d.trim().parse().map_err(|_| bad())?;
    if d <= 0 {
        return Err(bad());
    }
    Ok(Ratio::new(n, d))
}

fn ser_q64<S: Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// A finished command: whether its checks passed, plus both renderings.
struct Report {
    passed: bool,
    body: Value,
    rows: Vec<Vec<String>>,
    header: Vec<&'static str>,
}

impl Report {
    fn table(passed: bool, body: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Self {
            passed,
            body,
            rows,
            header,
        }
    }

    fn summary(passed: bool, body: Value) -> Self {
        // flat key/value view of the top-level fields
        let rows = match &body {
            Value::Object(map) => map
                .iter()
                .filter(|(_, v)| !v.is_array() && !v.is_object())
                .map(|(k, v)| {
                    vec![
                        k.clone(),
                        v.as_str().map_or_else(|| v.to_string(), str::to_string),
                    ]
                })
                .collect(),
            _ => Vec::new(),
        };
        Self {
            passed,
            body,
            rows,
            header: vec!["key", "value"],
        }
    }
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

impl From<FieldError> for Failure {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::InvalidConfig(_) | FieldError::Infeasible(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn prime(p: u32) -> Result<PrimeParams, Failure> {
    PrimeParams::derive(p).map_err(|e| Failure::Usage(e.to_string()))
}

fn schedule(args: &ScheduleArgs) -> Result<Schedule, Failure> {
    Ok(Schedule::new(prime(args.p)?, args.ells.clone()))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize to JSON")
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Constants(a) => {
            let params = prime(a.p)?;
            let consts = cantor_constants(&params);
            let mut body = to_value(&params);
            if let (Value::Object(map), Value::Object(more)) = (&mut body, to_value(&consts)) {
                for (k, v) in more {
                    map.entry(k).or_insert(v);
                }
            }
            Ok(Report::summary(true, body))
        }
        Command::Verify(a) => {
            let s = schedule(&a.schedule)?;
            let d0 = a.d0.clone().unwrap_or_else(|| s.closed_form_t());
            let report = verify_diameter_theorem_from(&s, a.s_max, d0)?;
            let rows = report
                .checkpoints
                .iter()
                .map(|c| {
                    let (kind, s, i) = match c.kind {
                        CheckpointKind::Special { s } => ("special", s, String::new()),
                        CheckpointKind::Intermediate { s, i } => ("intermediate", s, i.to_string()),
                    };
                    vec![
                        kind.into(),
                        s.to_string(),
                        i,
                        c.time.to_string(),
                        c.expected.to_string(),
                        c.actual.to_string(),
                        c.pass.to_string(),
                    ]
                })
                .collect();
            Ok(Report::table(
                report.passed,
                to_value(&report),
                vec!["kind", "s", "i", "time", "expected", "actual", "pass"],
                rows,
            ))
        }
        Command::Trace(a) => {
            let s = schedule(&a.schedule)?;
            let t = s.closed_form_t();
            let d0 = a.d0.clone().unwrap_or_else(|| t.clone());
            let run = propagate(&s, d0.clone(), a.steps)?;
            let body = json!({
                "t": t,
                "d0": d0,
                "events": trace_to_json(&run.trace.events),
                "dropped": run.trace.dropped,
                "final_state": run.final_state,
            });
            let csv = trace_to_csv(&run.trace.events).map_err(|e| Failure::Check(e.to_string()))?;
            Ok(Report {
                passed: true,
                body,
                rows: vec![vec![csv]],
                header: Vec::new(),
            })
        }
        Command::Certify(a) => {
            let s = schedule(&a.schedule)?;
            let cert = certify_component(&s, a.tprime.clone(), a.steps)?;
            let rows = cert
                .checkpoints
                .iter()
                .map(|c| {
                    vec![
                        c.s.to_string(),
                        c.time.to_string(),
                        c.difference.to_string(),
                        c.lockstep.to_string(),
                    ]
                })
                .collect();
            let escaped = matches!(cert.verdict, Verdict::Escapes { .. });
            Ok(Report::table(
                escaped,
                to_value(&cert),
                vec!["s", "time", "difference", "lockstep"],
                rows,
            ))
        }
        Command::Cantor {
            action: CantorCommand::Identity(a),
        } => {
            let report = verify_affine_identity(&prime(a.p)?, &a.beta);
            Ok(Report::summary(report.passed, to_value(&report)))
        }
        Command::Decompose(a) => {
            let dec = digit_decompose(a.tau.value(), &prime(a.p)?)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let rows = dec
                .digits()
                .iter()
                .zip(&dec.counts)
                .enumerate()
                .map(|(m, (d, c))| vec![m.to_string(), d.to_string(), c.to_string()])
                .collect();
            Ok(Report::table(
                dec.passed,
                to_value(&dec),
                vec!["m", "digit", "count"],
                rows,
            ))
        }
        Command::Fieldlab { check } => {
            let lab = match check {
                FieldCommand::Lemma32(a) => &a.lab,
                FieldCommand::Lemma42(a) | FieldCommand::Lemma43(a) => &a.lab,
            };
            let precision = lab.precision.unwrap_or(64 * lab.e as i64);
            let cfg = LabConfig::with_precision(lab.p, lab.e, lab.v_a, lab.seed, precision)?;
            let report = match check {
                FieldCommand::Lemma32(a) => check_contraction_lemma(&cfg, a.item, a.m, lab.trials)?,
                FieldCommand::Lemma42(a) => check_perturbation_lemmas(
                    &cfg,
                    Perturbation::Lemma42 { big_m: a.m },
                    lab.trials,
                )?,
                FieldCommand::Lemma43(a) => {
                    check_perturbation_lemmas(&cfg, Perturbation::Lemma43 { m: a.m }, lab.trials)?
                }
            };
            Ok(lab_report(report))
        }
    }
}

fn lab_report(report: LabReport) -> Report {
    let rows = report
        .failures
        .iter()
        .map(|f| {
            vec![
                f.trial.to_string(),
                f.expected.clone(),
                f.observed.clone().unwrap_or_default(),
                f.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    Report::table(
        report.all_passed(),
        to_value(&report),
        vec!["trial", "expected", "observed", "error"],
        rows,
    )
}

fn render(cli: &Cli, config: &Value, report: &Report) -> Result<String, String> {
    match cli.format {
        Format::Json => {
            let doc = json!({ "config": config, "passed": report.passed, "report": report.body });
            Ok(serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())? + "\n")
        }
        Format::Csv => {
            let mut out = format!("# config {config}\n");
            if report.header.is_empty() {
                // already rendered
                out.extend(report.rows.iter().flatten().map(String::as_str));
                return Ok(out);
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.header).map_err(|e| e.to_string())?;
            for row in &report.rows {
                w.write_record(row).map_err(|e| e.to_string())?;
            }
            let bytes = w.into_inner().map_err(|e| e.to_string())?;
            out.push_str(&String::from_utf8_lossy(&bytes));
            Ok(out)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = to_value(&cli);
    let report = match run(&cli) {
        Ok(report) => report,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            Report::summary(false, json!({ "error": msg }))
        }
    };
    let text = match render(&cli, &config, &report) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cli, &text) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(if report.passed { 0 } else { 1 })
}
