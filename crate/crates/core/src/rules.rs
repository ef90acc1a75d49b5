//! The `(lambda, mu)` family of three-point rules
//!
//! ```text
//! Q(lambda, mu) = (1 - mu) f(a) + lambda f(b) + (mu - lambda) f((a + b) / 2)
//! ```
//!
//! together with the kernel representations of the deficit
//! `Q(lambda, mu) - (1/(b-a)) ∫ f` as integrals of `f'`, so the identities can
//! be checked numerically on both sides.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::oracle::{self, Interval, OracleError, QuadratureOptions, QuadratureResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("rule parameters must be finite (lambda = {lambda}, mu = {mu})")]
    NonFinite { lambda: f64, mu: f64 },
    #[error("m must be non-zero")]
    ZeroM,
    #[error("rule (lambda = {lambda}, mu = {mu}) is outside 0 <= lambda <= 1/2 <= mu <= 1")]
    NotBoundAdmissible { lambda: f64, mu: f64 },
    #[error("unknown rule `{0}` (expected one of midpoint, trapezoid, avg3, avg-mid, fifth-13, fifth-221, simpson)")]
    UnknownName(String),
}

/// Whether a rule may only be used in the identities or also in the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Admissibility {
    IdentityOnly,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    pub lambda: f64,
    pub mu: f64,
}

impl RuleParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self, RuleError> {
        if lambda.is_finite() && mu.is_finite() {
            Ok(RuleParams { lambda, mu })
        } else {
            Err(RuleError::NonFinite { lambda, mu })
        }
    }

    /// Rule with `lambda = ell/m`, `mu = 1 - ell/m`.
    pub fn from_lm(lm: LmRule) -> Self {
        let lambda = lm.ell / lm.m;
        RuleParams {
            lambda,
            mu: 1.0 - lambda,
        }
    }

    /// Convert the parameters of the midpoint-split identity, whose rule is
    /// `(lambda2 f(a) + mu2 f(b))/2 + (2 - lambda2 - mu2)/2 f((a+b)/2)`,
    /// into the equivalent `(lambda, mu)`.
    pub fn from_split(lambda2: f64, mu2: f64) -> Self {
        RuleParams {
            lambda: mu2 / 2.0,
            mu: 1.0 - lambda2 / 2.0,
        }
    }

    pub fn admissibility(&self) -> Admissibility {
        if self.is_bound_admissible() {
            Admissibility::Bound
        } else {
            Admissibility::IdentityOnly
        }
    }

    pub fn is_bound_admissible(&self) -> bool {
        (0.0..=0.5).contains(&self.lambda) && (0.5..=1.0).contains(&self.mu)
    }

    pub fn require_bound_admissible(&self) -> Result<(), RuleError> {
        if self.is_bound_admissible() {
            Ok(())
        } else {
            Err(RuleError::NotBoundAdmissible {
                lambda: self.lambda,
                mu: self.mu,
            })
        }
    }

    /// Weights of `f(a)`, `f(b)` and `f((a+b)/2)`; they always sum to one.
    pub fn weights(&self) -> [f64; 3] {
        [1.0 - self.mu, self.lambda, self.mu - self.lambda]
    }

    /// The rule applied to `f` on `interval`.
    pub fn apply(&self, f: &Expr, interval: Interval) -> Result<f64, EvalError> {
        let [wa, wb, wm] = self.weights();
        Ok(wa * f.eval(interval.a())? + wb * f.eval(interval.b())? + wm * f.eval(interval.midpoint())?)
    }
}

/// The `(m, ell)` parametrisation: `lambda = ell/m`, `mu = (m - ell)/m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmRule {
    pub m: f64,
    pub ell: f64,
}

impl LmRule {
    pub fn new(m: f64, ell: f64) -> Result<Self, RuleError> {
        if !(m.is_finite() && ell.is_finite()) {
            return Err(RuleError::NonFinite { lambda: ell, mu: m });
        }
        if m == 0.0 {
            return Err(RuleError::ZeroM);
        }
        Ok(LmRule { m, ell })
    }

    /// `m > 0` and `m >= 2 ell >= 0`.
    pub fn is_bound_admissible(&self) -> bool {
        self.m > 0.0 && self.m >= 2.0 * self.ell && self.ell >= 0.0
    }

    pub fn rule(&self) -> RuleParams {
        RuleParams::from_lm(*self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NamedRule {
    #[serde(rename = "midpoint")]
    Midpoint,
    #[serde(rename = "trapezoid")]
    Trapezoid,
    #[serde(rename = "avg3")]
    Avg3,
    #[serde(rename = "avg-mid")]
    AvgMid,
    #[serde(rename = "fifth-13")]
    Fifth13,
    #[serde(rename = "fifth-221")]
    Fifth221,
    #[serde(rename = "simpson")]
    Simpson,
}

impl NamedRule {
    pub const ALL: [NamedRule; 7] = [
        NamedRule::Midpoint,
        NamedRule::Trapezoid,
        NamedRule::Avg3,
        NamedRule::AvgMid,
        NamedRule::Fifth13,
        NamedRule::Fifth221,
        NamedRule::Simpson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedRule::Midpoint => "midpoint",
            NamedRule::Trapezoid => "trapezoid",
            NamedRule::Avg3 => "avg3",
            NamedRule::AvgMid => "avg-mid",
            NamedRule::Fifth13 => "fifth-13",
            NamedRule::Fifth221 => "fifth-221",
            NamedRule::Simpson => "simpson",
        }
    }

    /// `(m, ell)` integers of the rule.
    pub fn lm_integers(self) -> (i64, i64) {
        match self {
            NamedRule::Midpoint => (1, 0),
            NamedRule::Trapezoid => (2, 1),
            NamedRule::Avg3 => (3, 1),
            NamedRule::AvgMid => (4, 1),
            NamedRule::Fifth13 => (5, 1),
            NamedRule::Fifth221 => (5, 2),
            NamedRule::Simpson => (6, 1),
        }
    }

    pub fn lm(self) -> LmRule {
        let (m, ell) = self.lm_integers();
        LmRule {
            m: m as f64,
            ell: ell as f64,
        }
    }

    pub fn rule(self) -> RuleParams {
        self.lm().rule()
    }
}

impl fmt::Display for NamedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedRule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NamedRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| RuleError::UnknownName(s.to_string()))
    }
}

/// `(1/(b-a)) ∫_a^b f`, computed by the oracle.
pub fn mean_integral(
    f: &Expr,
    interval: Interval,
    tol: f64,
) -> Result<QuadratureResult, OracleError> {
    let width = interval.width();
    let r = oracle::try_integrate(
        |x| f.eval(x),
        interval,
        QuadratureOptions::with_tol(tol),
    )?;
    Ok(QuadratureResult {
        value: r.value / width,
        error_estimate: r.error_estimate / width,
        evaluations: r.evaluations,
    })
}

/// Signed deficit `Q(lambda, mu) - mean_integral`.
pub fn lhs_value(
    rule: RuleParams,
    f: &Expr,
    interval: Interval,
    mean_integral: f64,
) -> Result<f64, EvalError> {
    Ok(rule.apply(f, interval)? - mean_integral)
}

const IDENTITY_TOL: f64 = 1e-12;

fn half_integral<K>(
    kernel: K,
    fprime: &Expr,
    lo: f64,
    hi: f64,
    node: impl Fn(f64) -> f64,
) -> Result<f64, OracleError>
where
    K: Fn(f64) -> f64,
{
    let r = oracle::try_integrate(
        |t| fprime.eval(node(t)).map(|d| kernel(t) * d),
        Interval::new(lo, hi)?,
        QuadratureOptions::with_tol(IDENTITY_TOL),
    )?;
    Ok(r.value)
}

/// Kernel form of the deficit:
/// `(b-a) [∫_0^{1/2} (lambda - t) f'(ta + (1-t)b) dt + ∫_{1/2}^1 (mu - t) f'(ta + (1-t)b) dt]`.
pub fn identity_rhs_qi(
    rule: RuleParams,
    fprime: &Expr,
    interval: Interval,
) -> Result<f64, OracleError> {
    let node = |t| interval.point_at(t);
    let left = half_integral(|t| rule.lambda - t, fprime, 0.0, 0.5, node)?;
    let right = half_integral(|t| rule.mu - t, fprime, 0.5, 1.0, node)?;
    Ok(interval.width() * (left + right))
}

/// Left side of the midpoint-split identity:
/// `(lambda f(a) + mu f(b))/2 + (2 - lambda - mu)/2 · f((a+b)/2) - mean_integral`.
pub fn lhs_split(
    lambda: f64,
    mu: f64,
    f: &Expr,
    interval: Interval,
    mean_integral: f64,
) -> Result<f64, EvalError> {
    let fa = f.eval(interval.a())?;
    let fb = f.eval(interval.b())?;
    let fm = f.eval(interval.midpoint())?;
    Ok(0.5 * (lambda * fa + mu * fb) + 0.5 * (2.0 - lambda - mu) * fm - mean_integral)
}

/// Kernel form of [`lhs_split`], integrating over each half of `[a, b]`
/// separately:
/// `((b-a)/4) ∫_0^1 [(1 - lambda - t) f'(ta + (1-t)c) + (mu - t) f'(tc + (1-t)b)] dt`
/// with `c = (a+b)/2`.
pub fn identity_rhs_xi(
    lambda: f64,
    mu: f64,
    fprime: &Expr,
    interval: Interval,
) -> Result<f64, OracleError> {
    let (a, b, c) = (interval.a(), interval.b(), interval.midpoint());
    let first = half_integral(|t| 1.0 - lambda - t, fprime, 0.0, 1.0, |t| t * a + (1.0 - t) * c)?;
    let second = half_integral(|t| mu - t, fprime, 0.0, 1.0, |t| t * c + (1.0 - t) * b)?;
    Ok(0.25 * interval.width() * (first + second))
}
