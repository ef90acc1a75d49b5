//! Randomised verification campaigns and parameter sweeps.
//!
//! Every trial draws from its own ChaCha8 stream (`seed`, stream = trial
//! index), so results do not depend on scheduling and any single trial can
//! be reproduced in isolation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundMode, DerivEndpoints};
use crate::convexity::{self, admissible_power, CertifyOptions};
use crate::expr::Expr;
use crate::oracle::{Interval, DEFAULT_TOL};
use crate::report::{formula_id, parse_checked, RuleSpec};
use crate::rules::{self, NamedRule, RuleParams};
use crate::Error;

/// `|LHS| > RHS + VIOLATION_TOL` counts as a violation; covers quadrature and
/// rounding error in the deficit.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Redraws allowed per trial before the generator is declared exhausted.
pub const MAX_REDRAWS: usize = 100;

/// Function families a campaign draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Polynomials of degree <= 4, powers `x^s` and `ln x`.
    #[default]
    Standard,
    /// `x^s` with `1 < s < 2` on `q = 1`: `|f'|` is concave, so every
    /// certificate should fail and every trial be skipped. A test hook for
    /// the certificate gate.
    Concave,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "standard" => Ok(Family::Standard),
            "concave" => Ok(Family::Concave),
            _ => Err(Error::Config(format!("unknown family `{s}` (standard, concave)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    pub family: Family,
    /// Restrict every trial to `q = 1`.
    pub q1_only: bool,
    /// Random pairs per convexity certificate.
    pub certificate_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: 1000,
            seed: 0,
            family: Family::Standard,
            q1_only: false,
            certificate_samples: 1024,
        }
    }
}

/// Everything needed to replay one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub trial: usize,
    pub function: String,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub mu: f64,
    pub q: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub formula_id: String,
    pub mode: BoundMode,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub instance: Instance,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub instance: Instance,
    /// Bounds asserted under a valid certificate.
    pub checks: Vec<Check>,
    /// Formula paths not asserted because their certificate failed.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathCount {
    pub formula_id: String,
    pub checked: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub config: VerifyConfig,
    pub checked: usize,
    pub skipped: usize,
    pub paths: Vec<PathCount>,
    pub min_slack: Option<f64>,
    pub min_slack_at: Option<Violation>,
    pub violations: Vec<Violation>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const PATHS: [&str; 4] = ["thm3.1", "thm3.2", "cor3.1-p1", "cor3.1-pq"];

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn draw_q(rng: &mut ChaCha8Rng, trial: usize, cfg: &VerifyConfig) -> f64 {
    if cfg.q1_only || cfg.family == Family::Concave || trial.is_multiple_of(4) {
        1.0
    } else {
        // uniform on (1, 4]
        4.0 - 3.0 * rng.random::<f64>()
    }
}

fn draw_rule(rng: &mut ChaCha8Rng) -> RuleParams {
    if rng.random_bool(0.25) {
        NamedRule::ALL[rng.random_range(0..NamedRule::ALL.len())].rule()
    } else {
        RuleParams {
            lambda: 0.5 * rng.random::<f64>(),
            mu: 0.5 + 0.5 * rng.random::<f64>(),
        }
    }
}

fn positive_interval(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = rng.random_range(0.1..3.0);
    (a, a + rng.random_range(0.1..3.0))
}

/// Draw `(f, a, b)` for the family; `None` if the draw must be redrawn.
fn draw_function(rng: &mut ChaCha8Rng, family: Family, q: f64, samples: usize, seed: u64) -> Result<Option<(String, f64, f64)>, Error> {
    match family {
        Family::Concave => {
            let s = rng.random_range(1.1..1.9);
            let (a, b) = positive_interval(rng);
            Ok(Some((format!("x^{s}"), a, b)))
        }
        Family::Standard => match rng.random_range(0..3) {
            0 => {
                let degree = rng.random_range(1..=4);
                let terms: Vec<String> = (0..=degree)
                    .map(|k| {
                        let c: f64 = rng.random_range(-2.0..=2.0);
                        format!("({c})*x^{k}")
                    })
                    .collect();
                let source = terms.join(" + ");
                let a = rng.random_range(-2.0..2.0);
                let b = a + rng.random_range(0.1..2.0);
                let fprime = Expr::parse(&source)?.differentiate();
                let cert = convexity::certify_derivative_power(
                    &fprime,
                    q,
                    Interval::new(a, b)?,
                    CertifyOptions { samples, tol: convexity::DEFAULT_TOL, seed },
                )?;
                Ok(cert.valid.then_some((source, a, b)))
            }
            1 => {
                let s = rng.random_range(-2.0..3.0);
                if s == 0.0 || !admissible_power(s, q) {
                    return Ok(None);
                }
                let (a, b) = positive_interval(rng);
                Ok(Some((format!("x^{s}"), a, b)))
            }
            _ => {
                let (a, b) = positive_interval(rng);
                Ok(Some(("ln(x)".to_string(), a, b)))
            }
        },
    }
}

/// Run one trial of a campaign.
pub fn run_trial(cfg: &VerifyConfig, trial: usize) -> Result<TrialOutcome, Error> {
    let mut rng = trial_rng(cfg.seed, trial);
    let q = draw_q(&mut rng, trial, cfg);
    let mut drawn = None;
    for _ in 0..MAX_REDRAWS {
        if let Some(d) = draw_function(&mut rng, cfg.family, q, cfg.certificate_samples, cfg.seed)? {
            drawn = Some(d);
            break;
        }
    }
    let (source, a, b) = drawn.ok_or(Error::GeneratorExhausted { trial, redraws: MAX_REDRAWS })?;
    let rule = draw_rule(&mut rng);
    // p uniform on (0, q]
    let p = q * (1.0 - rng.random::<f64>());

    let interval = Interval::new(a, b)?;
    let f = parse_checked(&source, interval)?;
    let fprime = f.differentiate();
    let mean = rules::mean_integral(&f, interval, DEFAULT_TOL)?;
    let lhs = rule.apply(&f, interval)? - mean.value;
    let d = DerivEndpoints::from_derivative(&fprime, interval)?;

    let opts = CertifyOptions {
        samples: cfg.certificate_samples,
        tol: convexity::DEFAULT_TOL,
        seed: cfg.seed ^ trial as u64,
    };
    let cert_1 = convexity::certify_derivative_power(&fprime, 1.0, interval, opts)?;
    let cert_q = if q == 1.0 {
        cert_1.clone()
    } else {
        convexity::certify_derivative_power(&fprime, q, interval, opts)?
    };

    let spec = RuleSpec::LambdaMu { lambda: rule.lambda, mu: rule.mu };
    let mut modes = vec![(BoundMode::Q1, cert_1.valid)];
    if q > 1.0 {
        modes.push((BoundMode::General { p, q }, cert_q.valid));
    }
    modes.push((BoundMode::P1 { q }, cert_q.valid));
    modes.push((BoundMode::Pq { q }, cert_q.valid));

    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for (mode, valid) in modes {
        let id = formula_id(&spec, &mode);
        if !valid {
            skipped.push(id);
            continue;
        }
        let rhs = bounds::bound(rule, mode, d, interval)?;
        checks.push(Check { formula_id: id, mode, lhs, rhs, slack: rhs - lhs.abs() });
    }
    Ok(TrialOutcome {
        instance: Instance { trial, function: source, a, b, lambda: rule.lambda, mu: rule.mu, q, p },
        checks,
        skipped,
    })
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary, Error> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".to_string()));
    }
    let outcomes: Vec<TrialOutcome> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<_, _>>()?;

    let mut paths: Vec<PathCount> = PATHS
        .iter()
        .map(|id| PathCount { formula_id: id.to_string(), checked: 0, skipped: 0 })
        .collect();
    let mut summary = VerifySummary {
        config: *cfg,
        checked: 0,
        skipped: 0,
        paths: Vec::new(),
        min_slack: None,
        min_slack_at: None,
        violations: Vec::new(),
    };
    for out in outcomes {
        for id in &out.skipped {
            summary.skipped += 1;
            if let Some(pc) = paths.iter_mut().find(|pc| &pc.formula_id == id) {
                pc.skipped += 1;
            }
        }
        for check in out.checks {
            summary.checked += 1;
            if let Some(pc) = paths.iter_mut().find(|pc| pc.formula_id == check.formula_id) {
                pc.checked += 1;
            }
            let record = || Violation { instance: out.instance.clone(), check: check.clone() };
            if summary.min_slack.is_none_or(|m| check.slack < m) {
                summary.min_slack = Some(check.slack);
                summary.min_slack_at = Some(record());
            }
            if check.lhs.abs() > check.rhs + VIOLATION_TOL {
                summary.violations.push(record());
            }
        }
    }
    summary.paths = paths;
    Ok(summary)
}

/// Parameter swept by [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Lambda,
    Mu,
    /// `lambda` with `mu = 1 - lambda`.
    LambdaSym,
    P,
    Q,
    /// Exponent of `f(x) = x^s`; the configured function is ignored.
    S,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Lambda => "lambda",
            Axis::Mu => "mu",
            Axis::LambdaSym => "lambda-sym",
            Axis::P => "p",
            Axis::Q => "q",
            Axis::S => "s",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [Axis::Lambda, Axis::Mu, Axis::LambdaSym, Axis::P, Axis::Q, Axis::S]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown axis `{s}` (lambda, mu, lambda-sym, p, q, s)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub function: String,
    pub interval: Interval,
    pub rule: RuleSpec,
    pub q: f64,
    pub p: Option<f64>,
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub tol: f64,
}

/// One CSV row: `axis,value,lhs_abs,rhs,slack,formula_id`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub lhs_abs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub formula_id: String,
}

pub const SWEEP_HEADER: [&str; 6] = ["axis", "value", "lhs_abs", "rhs", "slack", "formula_id"];

/// Grid `from + i * step` for `i = 0, 1, ...` while the value stays `<= to`
/// (up to a relative slack of `1e-9` steps).
pub fn sweep_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 || to < from {
        return Err(Error::Config(format!(
            "empty sweep grid (from = {from}, to = {to}, step = {step})"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| (from + i as f64 * step).min(to)).collect())
}

fn sweep_point(cfg: &SweepConfig, value: f64) -> Result<Vec<SweepRow>, Error> {
    let (mut spec, mut q, mut p) = (cfg.rule, cfg.q, cfg.p);
    let mut source = cfg.function.clone();
    let base = cfg.rule.rule()?;
    match cfg.axis {
        Axis::Lambda => spec = RuleSpec::with_lambda_mu(value, base.mu),
        Axis::Mu => spec = RuleSpec::with_lambda_mu(base.lambda, value),
        Axis::LambdaSym => spec = RuleSpec::with_lambda_mu(value, 1.0 - value),
        Axis::P => p = Some(value),
        Axis::Q => q = value,
        Axis::S => source = format!("x^{value}"),
    }
    let rule = spec.rule()?;
    rule.require_bound_admissible()?;
    let interval = cfg.interval;
    let f = parse_checked(&source, interval)?;
    let fprime = f.differentiate();
    let mean = rules::mean_integral(&f, interval, cfg.tol)?;
    let lhs_abs = (rule.apply(&f, interval)? - mean.value).abs();
    let d = DerivEndpoints::from_derivative(&fprime, interval)?;

    let mut modes = Vec::new();
    if cfg.axis == Axis::P {
        modes.push(BoundMode::General { p: value, q });
    } else if q == 1.0 {
        modes.push(BoundMode::Q1);
    } else {
        modes.push(BoundMode::P1 { q });
        modes.push(BoundMode::Pq { q });
        let p = match p {
            Some(p) => p,
            None => bounds::optimize_p(rule, q, d, interval)?.p,
        };
        modes.push(BoundMode::General { p, q });
    }
    modes
        .into_iter()
        .map(|mode| {
            let rhs = bounds::bound(rule, mode, d, interval)?;
            Ok(SweepRow {
                axis: cfg.axis.name(),
                value,
                lhs_abs,
                rhs,
                slack: rhs - lhs_abs,
                formula_id: formula_id(&spec, &mode),
            })
        })
        .collect()
}

/// Evaluate the bounds along one axis; rows come back in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, Error> {
    let grid = sweep_grid(cfg.from, cfg.to, cfg.step)?;
    let per_point: Vec<Vec<SweepRow>> =
        grid.par_iter().map(|&v| sweep_point(cfg, v)).collect::<Result<_, _>>()?;
    Ok(per_point.into_iter().flatten().collect())
}
