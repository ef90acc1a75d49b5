//! One evaluated bound instance: rule value, reference integral, deficit,
//! bound, slack and the convexity certificate that gates the bound.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundMode, DerivEndpoints, HolderParams};
use crate::convexity::{self, CertifyOptions, ConvexityCertificate};
use crate::expr::Expr;
use crate::oracle::{Interval, DEFAULT_TOL};
use crate::rules::{self, LmRule, NamedRule, RuleParams};
use crate::Error;

/// How the user named the rule; decides which formula family is reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum RuleSpec {
    Named { name: NamedRule },
    LambdaMu { lambda: f64, mu: f64 },
    Lm { m: f64, ell: f64 },
}

impl RuleSpec {
    pub fn rule(&self) -> Result<RuleParams, Error> {
        Ok(match *self {
            RuleSpec::Named { name } => name.rule(),
            RuleSpec::LambdaMu { lambda, mu } => RuleParams::new(lambda, mu)?,
            RuleSpec::Lm { m, ell } => LmRule::new(m, ell)?.rule(),
        })
    }

    /// The same spec with `(lambda, mu)` replaced, as a `LambdaMu` spec.
    pub fn with_lambda_mu(lambda: f64, mu: f64) -> Self {
        RuleSpec::LambdaMu { lambda, mu }
    }
}

/// Identifier of the formula that produced a bound.
///
/// | rule form | `Q1` | `General` | `P1` | `Pq` |
/// |---|---|---|---|---|
/// | `(lambda, mu)` | `thm3.1` | `thm3.2` | `cor3.1-p1` | `cor3.1-pq` |
/// | `(m, ell)` | `cor3.3-q1` | `cor3.2` | `cor3.3-p1` | `cor3.3-pq` |
/// | named | `cor3.7-<name>` | `cor3.4-<name>` | `cor3.6-<name>` | `cor3.5-<name>` |
pub fn formula_id(spec: &RuleSpec, mode: &BoundMode) -> String {
    match spec {
        RuleSpec::LambdaMu { .. } => match mode {
            BoundMode::Q1 => "thm3.1",
            BoundMode::General { .. } => "thm3.2",
            BoundMode::P1 { .. } => "cor3.1-p1",
            BoundMode::Pq { .. } => "cor3.1-pq",
        }
        .to_string(),
        RuleSpec::Lm { .. } => match mode {
            BoundMode::Q1 => "cor3.3-q1",
            BoundMode::General { .. } => "cor3.2",
            BoundMode::P1 { .. } => "cor3.3-p1",
            BoundMode::Pq { .. } => "cor3.3-pq",
        }
        .to_string(),
        RuleSpec::Named { name } => {
            let prefix = match mode {
                BoundMode::Q1 => "cor3.7",
                BoundMode::General { .. } => "cor3.4",
                BoundMode::P1 { .. } => "cor3.6",
                BoundMode::Pq { .. } => "cor3.5",
            };
            format!("{prefix}-{}", name.name())
        }
    }
}

/// Requested assembly; `Auto` picks one from `q` and `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    #[default]
    Auto,
    Q1,
    P1,
    Pq,
    General,
}

impl std::str::FromStr for ModeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "auto" => ModeChoice::Auto,
            "q1" => ModeChoice::Q1,
            "p1" => ModeChoice::P1,
            "pq" => ModeChoice::Pq,
            "general" => ModeChoice::General,
            _ => return Err(Error::Config(format!("unknown mode `{s}` (auto, q1, p1, pq, general)"))),
        })
    }
}

/// Mode resolution before `p` is known to be optimised. `None` for `p`
/// under `General` means "optimise".
pub fn resolve_mode(choice: ModeChoice, q: f64, p: Option<f64>) -> Result<(BoundMode, bool), Error> {
    let bad = |msg: String| Err(Error::Config(msg));
    if !(q >= 1.0 && q.is_finite()) {
        return bad(format!("q = {q} must be a finite number >= 1"));
    }
    let general = |p: Option<f64>| -> Result<(BoundMode, bool), Error> {
        match p {
            Some(p) => {
                HolderParams::new(p, q)?;
                Ok((BoundMode::General { p, q }, false))
            }
            None => Ok((BoundMode::General { p: q, q }, true)),
        }
    };
    match choice {
        ModeChoice::Auto => {
            if q == 1.0 {
                match p {
                    None => Ok((BoundMode::Q1, false)),
                    Some(1.0) => Ok((BoundMode::Q1, false)),
                    Some(p) => bad(format!("p = {p} needs q > 1 (at q = 1 only p = 1 applies)")),
                }
            } else {
                match p {
                    Some(1.0) => Ok((BoundMode::P1 { q }, false)),
                    Some(p) if p == q => Ok((BoundMode::Pq { q }, false)),
                    _ => general(p),
                }
            }
        }
        ModeChoice::Q1 if q == 1.0 => Ok((BoundMode::Q1, false)),
        ModeChoice::Q1 => bad(format!("mode q1 needs q = 1, got {q}")),
        ModeChoice::P1 => Ok((BoundMode::P1 { q }, false)),
        ModeChoice::Pq => Ok((BoundMode::Pq { q }, false)),
        ModeChoice::General if q == 1.0 => bad("mode general needs q > 1".to_string()),
        ModeChoice::General => general(p),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    /// Source of `f` in the expression language.
    pub function: String,
    pub interval: Interval,
    pub rule: RuleSpec,
    pub q: f64,
    pub p: Option<f64>,
    #[serde(default)]
    pub mode: ModeChoice,
    /// Oracle tolerance.
    pub tol: f64,
    pub seed: u64,
}

impl BoundRequest {
    pub fn new(function: &str, interval: Interval, rule: RuleSpec, q: f64) -> Self {
        BoundRequest {
            function: function.to_string(),
            interval,
            rule,
            q,
            p: None,
            mode: ModeChoice::Auto,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

/// Deterministic work counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub quadrature_evaluations: usize,
    pub certificate_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rule: RuleParams,
    pub interval: Interval,
    pub q: f64,
    /// Hölder `p` used (`1` for the `q = 1` bound).
    pub p: Option<f64>,
    /// Whether `p` was chosen by minimising the bound.
    pub p_optimized: bool,
    pub mode: BoundMode,
    pub function: String,
    pub derivative: String,
    pub da: f64,
    pub db: f64,
    pub rule_value: f64,
    pub mean_integral: f64,
    pub quadrature_error: f64,
    /// Signed `Q(lambda, mu) - mean integral`.
    pub lhs: f64,
    pub lhs_abs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub formula_id: String,
    pub certificate: ConvexityCertificate,
    pub counters: Counters,
}

impl BoundReport {
    /// The bound is asserted only under a valid certificate.
    pub fn asserted(&self) -> bool {
        self.certificate.valid
    }

    pub fn holds(&self) -> bool {
        self.slack >= 0.0
    }
}

/// Parse `f` and refuse it if it is undefined somewhere on the interval.
pub fn parse_checked(source: &str, interval: Interval) -> Result<Expr, Error> {
    let f = Expr::parse(source)?;
    let report = f.domain_check(interval);
    if !report.is_ok() {
        return Err(Error::Domain(report.to_string()));
    }
    Ok(f)
}

pub fn evaluate_bound(req: &BoundRequest) -> Result<BoundReport, Error> {
    let interval = req.interval;
    let f = parse_checked(&req.function, interval)?;
    let fprime = f.differentiate();
    let rule = req.rule.rule()?;
    rule.require_bound_admissible()?;
    let (mut mode, optimize) = resolve_mode(req.mode, req.q, req.p)?;

    let mean = rules::mean_integral(&f, interval, req.tol)?;
    let rule_value = rule.apply(&f, interval)?;
    let lhs = rule_value - mean.value;
    let d = DerivEndpoints::from_derivative(&fprime, interval)?;

    let rhs = if optimize {
        let opt = bounds::optimize_p(rule, req.q, d, interval)?;
        mode = BoundMode::General { p: opt.p, q: req.q };
        opt.rhs
    } else {
        bounds::bound(rule, mode, d, interval)?
    };

    let certificate = convexity::certify_derivative_power(
        &fprime,
        req.q,
        interval,
        CertifyOptions {
            seed: req.seed,
            ..Default::default()
        },
    )?;

    let lhs_abs = lhs.abs();
    Ok(BoundReport {
        rule,
        interval,
        q: req.q,
        p: Some(mode.p()),
        p_optimized: optimize,
        mode,
        function: f.to_string(),
        derivative: fprime.to_string(),
        da: d.da,
        db: d.db,
        rule_value,
        mean_integral: mean.value,
        quadrature_error: mean.error_estimate,
        lhs,
        lhs_abs,
        rhs,
        slack: rhs - lhs_abs,
        formula_id: formula_id(&req.rule, &mode),
        counters: Counters {
            quadrature_evaluations: mean.evaluations,
            certificate_pairs: certificate.pairs,
        },
        certificate,
    })
}
