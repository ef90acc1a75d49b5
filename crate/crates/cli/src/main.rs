//! `hhq`: evaluate three-point quadrature error bounds, run randomised
//! verification campaigns, sweep parameters and check means inequalities.
//!
//! Exit codes: 0 success, 1 error (including usage errors), 2 convexity
//! certificate invalid so the bound is not asserted, 3 negative slack or
//! campaign violations.

use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use hermite_hadamard::bounds::{self, BoundMode, DerivEndpoints};
use hermite_hadamard::campaign::{self, Axis, Family, SweepConfig, VerifyConfig, SWEEP_HEADER};
use hermite_hadamard::means::{self, MeansTheorem};
use hermite_hadamard::oracle::DEFAULT_TOL;
use hermite_hadamard::report::{self, BoundRequest, ModeChoice, RuleSpec};
use hermite_hadamard::{Error, Interval, LmRule, NamedRule};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "hhq", version, about = "Three-point quadrature error bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one bound instance.
    #[command(allow_negative_numbers = true)]
    Bound(BoundArgs),
    /// Randomised soundness campaign.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Sweep one parameter over a grid.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Check a means inequality.
    #[command(allow_negative_numbers = true)]
    Means(MeansArgs),
    /// Minimise a bound over p or over the rule.
    #[command(allow_negative_numbers = true)]
    Optimize(OptimizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("rulespec").required(true).multiple(false)))]
struct RuleArgs {
    /// Named rule: midpoint, trapezoid, avg3, avg-mid, fifth-13, fifth-221, simpson.
    #[arg(long, group = "rulespec")]
    rule: Option<NamedRule>,
    #[arg(long, group = "rulespec", requires = "mu")]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    mu: Option<f64>,
    #[arg(long, group = "rulespec", requires = "ell")]
    m: Option<f64>,
    #[arg(long, requires = "m")]
    ell: Option<f64>,
}

impl RuleArgs {
    fn spec(&self) -> RuleSpec {
        match (self.rule, self.lambda, self.mu, self.m, self.ell) {
            (Some(name), ..) => RuleSpec::Named { name },
            (_, Some(lambda), Some(mu), ..) => RuleSpec::LambdaMu { lambda, mu },
            (.., Some(m), Some(ell)) => RuleSpec::Lm { m, ell },
            _ => unreachable!("clap enforces exactly one rule form"),
        }
    }
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// Function of x, e.g. "x^2", "exp(x) - ln(x)".
    #[arg(long, allow_hyphen_values = true)]
    f: String,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Hoelder exponent in (0, q]; optimised when q > 1 and omitted.
    #[arg(long)]
    p: Option<f64>,
    /// auto, q1, p1, pq or general.
    #[arg(long, default_value = "auto")]
    mode: ModeChoice,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Add wall-clock time to the report; breaks byte-for-byte determinism.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// standard or concave.
    #[arg(long, default_value = "standard")]
    family: Family,
    /// Draw q = 1 on every trial.
    #[arg(long)]
    q1_only: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Function of x; ignored on the s axis, which sweeps x^s.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long)]
    p: Option<f64>,
    /// lambda, mu, lambda-sym, p, q or s.
    #[arg(long)]
    axis: Axis,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct MeansArgs {
    /// Theorem id, e.g. 4.1, 4.2-p1, 4.3-pq, 4.5-particular.
    #[arg(long)]
    theorem: String,
    #[command(flatten)]
    rule: RuleArgs,
    /// Power of the power-mean family.
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    P,
    Rule,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// Minimise over p in (0, q] or over (lambda, mu).
    #[arg(long, value_enum, default_value_t = Target::P)]
    target: Target,
    /// Function whose derivative gives |f'(a)| and |f'(b)|.
    #[arg(long, allow_hyphen_values = true, required_unless_present_all = ["da", "db"], conflicts_with_all = ["da", "db"])]
    f: Option<String>,
    #[arg(long, requires = "db")]
    da: Option<f64>,
    #[arg(long, requires = "da")]
    db: Option<f64>,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Rule to optimise p for; ignored with --target rule.
    #[arg(long, default_value = "simpson")]
    rule: NamedRule,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda")]
    mu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value = "auto")]
    mode: ModeChoice,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

/// Result of a command, mapped to the exit code.
enum Status {
    Ok,
    NotAsserted,
    Violated,
}

impl Status {
    fn code(&self) -> ExitCode {
        match self {
            Status::Ok => ExitCode::SUCCESS,
            Status::NotAsserted => ExitCode::from(2),
            Status::Violated => ExitCode::from(3),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Bound(args) => cmd_bound(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Means(args) => cmd_means(args),
        Command::Optimize(args) => cmd_optimize(args),
    };
    match result {
        Ok(status) => status.code(),
        // a closed pipe (e.g. `| head`) is not an error
        Err(e) if is_broken_pipe(e.as_ref()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(e: &(dyn std::error::Error + 'static)) -> bool {
    let io = match e.downcast_ref::<csv::Error>() {
        Some(c) => match c.kind() {
            csv::ErrorKind::Io(io) => Some(io),
            _ => None,
        },
        None => e.downcast_ref::<io::Error>(),
    };
    io.is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

type CmdResult = Result<Status, Box<dyn std::error::Error>>;

fn interval(a: f64, b: f64) -> Result<Interval, Error> {
    Ok(Interval::new(a, b)?)
}

fn print_json(value: &Value) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

fn print_csv<R: Serialize>(rows: &[R]) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn print_text(pairs: &[(&str, String)]) -> io::Result<()> {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = io::stdout().lock();
    for (k, v) in pairs {
        writeln!(out, "{k:<width$}  {v}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundRow<'a> {
    formula_id: &'a str,
    lhs: f64,
    lhs_abs: f64,
    rhs: f64,
    slack: f64,
    p: Option<f64>,
    certificate_valid: bool,
    certificate_max_violation: f64,
}

fn cmd_bound(args: BoundArgs) -> CmdResult {
    let started = Instant::now();
    let req = BoundRequest {
        function: args.f.clone(),
        interval: interval(args.a, args.b)?,
        rule: args.rule.spec(),
        q: args.q,
        p: args.p,
        mode: args.mode,
        tol: args.tol,
        seed: args.seed,
    };
    let r = report::evaluate_bound(&req)?;
    let elapsed = started.elapsed();

    match args.format {
        Format::Json => {
            let mut timings = json!({
                "quadrature_evaluations": r.counters.quadrature_evaluations,
                "certificate_pairs": r.counters.certificate_pairs,
            });
            if args.timings {
                timings["wall_seconds"] = json!(elapsed.as_secs_f64());
            }
            print_json(&json!({
                "schema": SCHEMA,
                "config": {
                    "command": "bound",
                    "request": req,
                    "resolved": {
                        "rule": r.rule,
                        "mode": r.mode,
                        "p": r.p,
                        "p_optimized": r.p_optimized,
                        "function": r.function,
                        "derivative": r.derivative,
                        "da": r.da,
                        "db": r.db,
                    },
                },
                "lhs": r.lhs,
                "lhs_abs": r.lhs_abs,
                "rhs": r.rhs,
                "slack": r.slack,
                "formula_id": r.formula_id,
                "asserted": r.asserted(),
                "rule_value": r.rule_value,
                "mean_integral": r.mean_integral,
                "quadrature_error": r.quadrature_error,
                "certificate": {
                    "valid": r.certificate.valid,
                    "samples": r.certificate.samples,
                    "pairs": r.certificate.pairs,
                    "max_violation": r.certificate.max_violation,
                    "witness": r.certificate.witness,
                },
                "timings": timings,
            }))?;
        }
        Format::Csv => print_csv(&[BoundRow {
            formula_id: &r.formula_id,
            lhs: r.lhs,
            lhs_abs: r.lhs_abs,
            rhs: r.rhs,
            slack: r.slack,
            p: r.p,
            certificate_valid: r.certificate.valid,
            certificate_max_violation: r.certificate.max_violation,
        }])?,
        Format::Text => {
            let mut lines = vec![
                ("formula", r.formula_id.clone()),
                ("rule", format!("lambda = {}, mu = {}", r.rule.lambda, r.rule.mu)),
                ("mode", format!("{:?}", r.mode)),
                ("f'", r.derivative.clone()),
                ("lhs", format!("{:?}", r.lhs)),
                ("rhs", format!("{:?}", r.rhs)),
                ("slack", format!("{:?}", r.slack)),
                (
                    "certificate",
                    format!(
                        "{} ({} pairs, max violation {})",
                        if r.certificate.valid { "valid" } else { "INVALID" },
                        r.certificate.pairs,
                        r.certificate.max_violation
                    ),
                ),
            ];
            if args.timings {
                lines.push(("wall seconds", format!("{:?}", elapsed.as_secs_f64())));
            }
            print_text(&lines)?;
        }
    }

    Ok(if !r.asserted() {
        eprintln!("warning: |f'|^{} is not certified convex; the bound is not asserted", r.q);
        Status::NotAsserted
    } else if !r.holds() {
        Status::Violated
    } else {
        Status::Ok
    })
}

#[derive(Serialize)]
struct PathRow<'a> {
    formula_id: &'a str,
    checked: usize,
    skipped: usize,
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let started = Instant::now();
    let cfg = VerifyConfig {
        trials: args.trials,
        seed: args.seed,
        family: args.family,
        q1_only: args.q1_only,
        ..Default::default()
    };
    let s = campaign::run_verify(&cfg)?;
    let elapsed = started.elapsed();

    match args.format {
        Format::Json => {
            let mut value = json!({
                "schema": SCHEMA,
                "config": { "command": "verify", "verify": s.config },
                "checked": s.checked,
                "skipped": s.skipped,
                "paths": s.paths,
                "min_slack": s.min_slack,
                "min_slack_at": s.min_slack_at,
                "violations": s.violations,
                "passed": s.passed(),
            });
            if args.timings {
                value["timings"] = json!({ "wall_seconds": elapsed.as_secs_f64() });
            }
            print_json(&value)?;
        }
        Format::Csv => {
            let rows: Vec<PathRow> = s
                .paths
                .iter()
                .map(|p| PathRow { formula_id: &p.formula_id, checked: p.checked, skipped: p.skipped })
                .collect();
            print_csv(&rows)?;
        }
        Format::Text => {
            let mut lines = vec![
                ("trials", cfg.trials.to_string()),
                ("seed", cfg.seed.to_string()),
                ("checked", s.checked.to_string()),
                ("skipped", s.skipped.to_string()),
                ("min slack", s.min_slack.map_or("n/a".to_string(), |v| format!("{v:?}"))),
                ("violations", s.violations.len().to_string()),
            ];
            for p in &s.paths {
                lines.push((p.formula_id.as_str(), format!("{} checked, {} skipped", p.checked, p.skipped)));
            }
            if args.timings {
                lines.push(("wall seconds", format!("{:?}", elapsed.as_secs_f64())));
            }
            print_text(&lines)?;
            for v in &s.violations {
                writeln!(io::stdout(), "violation: {v:?}")?;
            }
        }
    }
    Ok(if s.passed() { Status::Ok } else { Status::Violated })
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let function = match (&args.f, args.axis) {
        (Some(f), _) => f.clone(),
        (None, Axis::S) => "x".to_string(),
        (None, _) => return Err(Error::Config("--f is required unless --axis s".to_string()).into()),
    };
    let cfg = SweepConfig {
        function,
        interval: interval(args.a, args.b)?,
        rule: args.rule.spec(),
        q: args.q,
        p: args.p,
        axis: args.axis,
        from: args.from,
        to: args.to,
        step: args.step,
        tol: args.tol,
    };
    let rows = campaign::run_sweep(&cfg)?;
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(SWEEP_HEADER)?;
            for r in &rows {
                w.write_record([
                    r.axis.to_string(),
                    format!("{:?}", r.value),
                    format!("{:?}", r.lhs_abs),
                    format!("{:?}", r.rhs),
                    format!("{:?}", r.slack),
                    r.formula_id.clone(),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => print_json(&json!({
            "schema": SCHEMA,
            "config": { "command": "sweep", "sweep": cfg },
            "rows": rows,
        }))?,
        Format::Text => {
            let mut out = io::stdout().lock();
            writeln!(out, "{:<10} {:>24} {:>24} {:>24} {:>24}  formula_id", "axis", "value", "lhs_abs", "rhs", "slack")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<10} {:>24?} {:>24?} {:>24?} {:>24?}  {}",
                    r.axis, r.value, r.lhs_abs, r.rhs, r.slack, r.formula_id
                )?;
            }
        }
    }
    Ok(Status::Ok)
}

fn cmd_means(args: MeansArgs) -> CmdResult {
    let lm = match args.rule.spec() {
        RuleSpec::Lm { m, ell } => LmRule::new(m, ell)?,
        RuleSpec::Named { name } => name.lm(),
        RuleSpec::LambdaMu { .. } => {
            return Err(Error::Config("means theorems take an (m, ell) rule: use --m/--ell or --rule".into()).into())
        }
    };
    let theorem = MeansTheorem::from_id(&args.theorem, args.s, args.p, args.q)?;
    let r = means::evaluate_means(&theorem, lm, args.a, args.b)?;
    match args.format {
        Format::Json => print_json(&json!({
            "schema": SCHEMA,
            "config": {
                "command": "means",
                "theorem": theorem,
                "m": lm.m,
                "ell": lm.ell,
                "a": args.a,
                "b": args.b,
            },
            "theorem": r.theorem,
            "gap": r.gap,
            "bound": r.bound,
            "slack": r.slack,
        }))?,
        Format::Csv => print_csv(&[&r])?,
        Format::Text => print_text(&[
            ("theorem", r.theorem.clone()),
            ("(m, ell)", format!("({}, {})", r.m, r.ell)),
            ("[a, b]", format!("[{}, {}]", r.a, r.b)),
            ("gap", format!("{:?}", r.gap)),
            ("bound", format!("{:?}", r.bound)),
            ("slack", format!("{:?}", r.slack)),
        ])?,
    }
    Ok(if r.slack >= 0.0 { Status::Ok } else { Status::Violated })
}

#[derive(Serialize)]
struct OptimizeRow {
    target: &'static str,
    lambda: f64,
    mu: f64,
    p: f64,
    q: f64,
    rhs: f64,
}

fn cmd_optimize(args: OptimizeArgs) -> CmdResult {
    let i = interval(args.a, args.b)?;
    let d = match (&args.f, args.da, args.db) {
        (Some(src), ..) => {
            let fprime = report::parse_checked(src, i)?.differentiate();
            DerivEndpoints::from_derivative(&fprime, i)?
        }
        (None, Some(da), Some(db)) => DerivEndpoints::new(da, db)?,
        _ => unreachable!("clap requires --f or both --da and --db"),
    };
    let row = match args.target {
        Target::P => {
            let rule = match (args.lambda, args.mu) {
                (Some(lambda), Some(mu)) => RuleSpec::LambdaMu { lambda, mu }.rule()?,
                _ => args.rule.rule(),
            };
            let opt = bounds::optimize_p(rule, args.q, d, i)?;
            OptimizeRow { target: "p", lambda: rule.lambda, mu: rule.mu, p: opt.p, q: args.q, rhs: opt.rhs }
        }
        Target::Rule => {
            let (mode, open_p) = report::resolve_mode(args.mode, args.q, args.p)?;
            // without a p, optimise the rule for the p = q assembly
            let mode = if open_p { BoundMode::Pq { q: args.q } } else { mode };
            let opt = bounds::optimize_rule(mode, d, i)?;
            OptimizeRow {
                target: "rule",
                lambda: opt.rule.lambda,
                mu: opt.rule.mu,
                p: mode.p(),
                q: args.q,
                rhs: opt.rhs,
            }
        }
    };
    match args.format {
        Format::Json => print_json(&json!({
            "schema": SCHEMA,
            "config": { "command": "optimize", "a": args.a, "b": args.b, "da": d.da, "db": d.db },
            "target": row.target,
            "lambda": row.lambda,
            "mu": row.mu,
            "p": row.p,
            "q": row.q,
            "rhs": row.rhs,
        }))?,
        Format::Csv => print_csv(&[&row])?,
        Format::Text => print_text(&[
            ("target", row.target.to_string()),
            ("(lambda, mu)", format!("({}, {})", row.lambda, row.mu)),
            ("(p, q)", format!("({}, {})", row.p, row.q)),
            ("rhs", format!("{:?}", row.rhs)),
        ])?,
    }
    Ok(Status::Ok)
}
