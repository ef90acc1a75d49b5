//! Special means of two positive numbers and the means inequalities obtained
//! by applying the `(m, ell)` bounds to `f(x) = x^s` and `f(x) = ln x`.
//!
//! The bounds are never re-derived here: each theorem supplies the endpoint
//! derivative magnitudes of its `f` and delegates to [`crate::bounds`].

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundError, BoundMode, DerivEndpoints, HolderParams};
use crate::convexity::admissible_power;
use crate::oracle::{self, Interval, OracleError};
use crate::rules::{LmRule, RuleError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeansError {
    #[error("means need positive finite arguments (got a = {a}, b = {b})")]
    NonPositive { a: f64, b: f64 },
    #[error("(m, ell) = ({m}, {ell}) violates m > 0, m >= 2 ell >= 0")]
    InadmissibleLm { m: f64, ell: f64 },
    #[error("s = 0 is excluded")]
    ZeroS,
    #[error("|(x^{s})'|^{q} is not known to be convex: need s > 1 and (s-1)q >= 1, or s < 1 and s != 0")]
    InadmissiblePower { s: f64, q: f64 },
    #[error("unknown mean `{0}` (expected A, G, H, L, I or Ls)")]
    UnknownMean(String),
    #[error("unknown theorem `{0}`")]
    UnknownTheorem(String),
    #[error("theorem {id} needs parameter `{name}`")]
    MissingParameter { id: String, name: &'static str },
    #[error("theorem {id}: {reason}")]
    InvalidParameter { id: String, reason: String },
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MeanKind {
    /// arithmetic
    A,
    /// geometric
    G,
    /// harmonic
    H,
    /// logarithmic
    L,
    /// identric (exponential)
    I,
    /// generalized logarithmic
    Ls(f64),
}

impl FromStr for MeanKind {
    type Err = MeansError;

    /// `A`, `G`, `H`, `L`, `I` or `Ls:<s>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "A" => MeanKind::A,
            "G" => MeanKind::G,
            "H" => MeanKind::H,
            "L" => MeanKind::L,
            "I" => MeanKind::I,
            _ => {
                let v = s
                    .strip_prefix("Ls:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| MeansError::UnknownMean(s.to_string()))?;
                MeanKind::Ls(v)
            }
        })
    }
}

fn check_positive(a: f64, b: f64) -> Result<(), MeansError> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(MeansError::NonPositive { a, b })
    }
}

/// `ln(expm1(k)/k)`, stable for large `|k|`; `k = 0` gives `0`.
fn ln_expm1_over(k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else if k > 30.0 {
        k + (-(-k).exp()).ln_1p() - k.ln()
    } else if k < -30.0 {
        (-k.exp_m1()).ln() - (-k).ln()
    } else {
        (k.exp_m1() / k).ln()
    }
}

/// `ln` of `(1/(b-a)) ∫_a^b x^s dx`, i.e. of `L_s(a,b)^s`, for `s != -1`
/// and `0 < a < b`.
fn ln_power_mean_integral(s: f64, a: f64, b: f64) -> f64 {
    let t = (b / a).ln();
    let k = (s + 1.0) * t;
    (s + 1.0) * a.ln() + t.ln() + ln_expm1_over(k) - (b - a).ln()
}

/// `ln I(a, b)` for `0 < a < b`.
fn ln_identric(a: f64, b: f64) -> f64 {
    b.ln() - 1.0 + a * ((b - a) / a).ln_1p() / (b - a)
}

fn logarithmic(a: f64, b: f64) -> f64 {
    (b - a) / ((b - a) / a).ln_1p()
}

pub fn compute_mean(kind: MeanKind, a: f64, b: f64) -> Result<f64, MeansError> {
    check_positive(a, b)?;
    if a == b {
        return Ok(a);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    Ok(match kind {
        MeanKind::A => 0.5 * (a + b),
        MeanKind::G => (a * b).sqrt(),
        MeanKind::H => 2.0 * a * b / (a + b),
        MeanKind::L | MeanKind::Ls(-1.0) => logarithmic(lo, hi),
        MeanKind::I | MeanKind::Ls(0.0) => ln_identric(lo, hi).exp(),
        MeanKind::Ls(s) => (ln_power_mean_integral(s, lo, hi) / s).exp(),
    })
}

/// `I(a, b)` as `exp` of the oracle's mean of `ln x` over `[a, b]`.
pub fn identric_by_quadrature(a: f64, b: f64) -> Result<f64, MeansError> {
    check_positive(a, b)?;
    if a == b {
        return Ok(a);
    }
    let iv = Interval::new(a.min(b), a.max(b)).map_err(OracleError::from)?;
    let r = oracle::integrate(f64::ln, iv, 1e-13)?;
    Ok((r.value / iv.width()).exp())
}

/// `(1/(b-a)) ∫ x^s`, which is `[L_s(a,b)]^s` (and `1/L` at `s = -1`).
fn power_mean_integral(s: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    if s == -1.0 {
        1.0 / logarithmic(lo, hi)
    } else {
        ln_power_mean_integral(s, lo, hi).exp()
    }
}

fn check_lm(lm: LmRule) -> Result<(), MeansError> {
    if lm.is_bound_admissible() {
        Ok(())
    } else {
        Err(MeansError::InadmissibleLm { m: lm.m, ell: lm.ell })
    }
}

/// `[2 ell A(a^s, b^s) + (m - 2 ell) A(a,b)^s]/m - [L_s(a,b)]^s`.
pub fn means_gap_power(lm: LmRule, s: f64, a: f64, b: f64) -> Result<f64, MeansError> {
    check_positive(a, b)?;
    check_lm(lm)?;
    if s == 0.0 {
        return Err(MeansError::ZeroS);
    }
    if a == b {
        return Ok(0.0);
    }
    let LmRule { m, ell } = lm;
    let arith = |x: f64, y: f64| 0.5 * (x + y);
    let rule_value = (2.0 * ell * arith(a.powf(s), b.powf(s)) + (m - 2.0 * ell) * arith(a, b).powf(s)) / m;
    Ok(rule_value - power_mean_integral(s, a, b))
}

/// `[2 ell ln G(a,b) + (m - 2 ell) ln A(a,b)]/m - ln I(a,b)`.
pub fn means_gap_log(lm: LmRule, a: f64, b: f64) -> Result<f64, MeansError> {
    check_positive(a, b)?;
    check_lm(lm)?;
    if a == b {
        return Ok(0.0);
    }
    let LmRule { m, ell } = lm;
    let ln_g = 0.5 * (a.ln() + b.ln());
    let ln_a = (0.5 * (a + b)).ln();
    Ok((2.0 * ell * ln_g + (m - 2.0 * ell) * ln_a) / m - ln_identric(a.min(b), a.max(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum MeansFamily {
    /// `f(x) = x^s`
    Power { s: f64 },
    /// `f(x) = 1/x`
    Harmonic,
    /// `f(x) = ln x`
    Log,
}

/// A means inequality: a function family plus the bound assembly applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeansTheorem {
    pub family: MeansFamily,
    pub mode: BoundMode,
}

impl MeansTheorem {
    /// Identifier such as `4.1`, `4.2-p1`, `4.5-particular`.
    pub fn id(&self) -> String {
        let (general, variant) = match self.family {
            MeansFamily::Power { .. } => ("4.1", "4.2"),
            MeansFamily::Harmonic => ("4.3", "4.3"),
            MeansFamily::Log => ("4.4", "4.5"),
        };
        match self.mode {
            BoundMode::General { .. } => general.to_string(),
            BoundMode::P1 { .. } => format!("{variant}-p1"),
            BoundMode::Pq { .. } => format!("{variant}-pq"),
            BoundMode::Q1 => format!("{variant}-particular"),
        }
    }

    pub fn from_id(id: &str, s: Option<f64>, p: Option<f64>, q: Option<f64>) -> Result<Self, MeansError> {
        let missing = |name| MeansError::MissingParameter { id: id.to_string(), name };
        let (head, variant) = id.split_once('-').unwrap_or((id, ""));
        let family = match head {
            "4.1" | "4.2" => MeansFamily::Power { s: s.ok_or_else(|| missing("s"))? },
            "4.3" => MeansFamily::Harmonic,
            "4.4" | "4.5" => MeansFamily::Log,
            _ => return Err(MeansError::UnknownTheorem(id.to_string())),
        };
        let general = matches!(head, "4.1" | "4.4") || (head == "4.3" && variant.is_empty());
        let mode = match (general, variant) {
            (true, "") => BoundMode::General {
                p: p.ok_or_else(|| missing("p"))?,
                q: q.ok_or_else(|| missing("q"))?,
            },
            (false, "p1") => BoundMode::P1 { q: q.ok_or_else(|| missing("q"))? },
            (false, "pq") => BoundMode::Pq { q: q.ok_or_else(|| missing("q"))? },
            (false, "particular") => BoundMode::Q1,
            _ => return Err(MeansError::UnknownTheorem(id.to_string())),
        };
        Ok(MeansTheorem { family, mode })
    }

    /// Check the exponent hypotheses of the theorem.
    pub fn check_hypotheses(&self) -> Result<(), MeansError> {
        let invalid = |reason: String| MeansError::InvalidParameter { id: self.id(), reason };
        let q = self.mode.q();
        match self.mode {
            BoundMode::General { p, q } => {
                HolderParams::new(p, q)?;
            }
            BoundMode::P1 { q } | BoundMode::Pq { q } => {
                if !(q >= 1.0 && q.is_finite()) {
                    return Err(invalid(format!("q = {q} must be >= 1")));
                }
            }
            BoundMode::Q1 => {}
        }
        if let MeansFamily::Power { s } = self.family {
            if s == 0.0 {
                return Err(MeansError::ZeroS);
            }
            if !admissible_power(s, q) {
                return Err(MeansError::InadmissiblePower { s, q });
            }
        }
        Ok(())
    }

    /// `|f'(a)|`, `|f'(b)|` for the theorem's `f`.
    fn endpoints(&self, a: f64, b: f64) -> Result<DerivEndpoints, MeansError> {
        let d = |x: f64| match self.family {
            MeansFamily::Power { s } => s.abs() * x.powf(s - 1.0),
            MeansFamily::Harmonic => 1.0 / (x * x),
            MeansFamily::Log => 1.0 / x,
        };
        Ok(DerivEndpoints::new(d(a), d(b))?)
    }
}

impl fmt::Display for MeansTheorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Signed left side of the theorem's inequality.
pub fn means_gap(theorem: &MeansTheorem, lm: LmRule, a: f64, b: f64) -> Result<f64, MeansError> {
    match theorem.family {
        MeansFamily::Power { s } => means_gap_power(lm, s, a, b),
        MeansFamily::Harmonic => means_gap_power(lm, -1.0, a, b),
        MeansFamily::Log => means_gap_log(lm, a, b),
    }
}

/// Right side of the theorem's inequality, routed through the bounds module.
pub fn means_bound(theorem: &MeansTheorem, lm: LmRule, a: f64, b: f64) -> Result<f64, MeansError> {
    check_positive(a, b)?;
    check_lm(lm)?;
    theorem.check_hypotheses()?;
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let interval = Interval::new(lo, hi).map_err(OracleError::from)?;
    let d = theorem.endpoints(lo, hi)?;
    Ok(bounds::bound(lm.rule(), theorem.mode, d, interval)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeansReport {
    pub theorem: String,
    pub m: f64,
    pub ell: f64,
    pub a: f64,
    pub b: f64,
    pub gap: f64,
    pub bound: f64,
    pub slack: f64,
}

pub fn evaluate_means(theorem: &MeansTheorem, lm: LmRule, a: f64, b: f64) -> Result<MeansReport, MeansError> {
    let bound = means_bound(theorem, lm, a, b)?;
    let gap = means_gap(theorem, lm, a, b)?;
    Ok(MeansReport {
        theorem: theorem.id(),
        m: lm.m,
        ell: lm.ell,
        a,
        b,
        gap,
        bound,
        slack: bound - gap.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lm(m: f64, ell: f64) -> LmRule {
        LmRule::new(m, ell).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(compute_mean(MeanKind::A, 1.0, 2.0).unwrap(), 1.5);
        assert_eq!(compute_mean(MeanKind::L, 3.0, 3.0).unwrap(), 3.0);
        let l2 = compute_mean(MeanKind::Ls(2.0), 1.0, 2.0).unwrap();
        assert!((l2 * l2 - 7.0 / 3.0).abs() < 1e-14);
        assert_eq!(
            compute_mean(MeanKind::Ls(-1.0), 1.0, 3.0).unwrap(),
            compute_mean(MeanKind::L, 1.0, 3.0).unwrap()
        );
        assert_eq!(
            compute_mean(MeanKind::Ls(0.0), 1.0, 3.0).unwrap(),
            compute_mean(MeanKind::I, 1.0, 3.0).unwrap()
        );
        assert!(compute_mean(MeanKind::G, 0.0, 1.0).is_err());
        assert!(compute_mean(MeanKind::G, -1.0, 1.0).is_err());
    }

    #[test]
    fn mean_names_parse() {
        assert_eq!("H".parse::<MeanKind>().unwrap(), MeanKind::H);
        assert_eq!("Ls:2.5".parse::<MeanKind>().unwrap(), MeanKind::Ls(2.5));
        assert!("Q".parse::<MeanKind>().is_err());
    }

    #[test]
    fn identric_closed_form_matches_quadrature() {
        for (a, b) in [(1.0, 2.0), (0.01, 50.0), (3.0, 3.5), (200.0, 900.0)] {
            let closed = compute_mean(MeanKind::I, a, b).unwrap();
            let quad = identric_by_quadrature(a, b).unwrap();
            assert!((closed - quad).abs() <= 1e-11 * closed, "{a} {b}");
        }
    }

    #[test]
    fn identric_survives_large_arguments() {
        let v = compute_mean(MeanKind::I, 1e300, 1.5e300).unwrap();
        assert!(v.is_finite() && v > 1e300 && v < 1.5e300);
    }

    #[test]
    fn gap_examples() {
        let g = means_gap_power(lm(2.0, 1.0), 2.0, 1.0, 2.0).unwrap();
        assert!((g - 1.0 / 6.0).abs() < 1e-14);
        let g = means_gap_power(lm(1.0, 0.0), 2.0, 1.0, 2.0).unwrap();
        assert!((g + 1.0 / 12.0).abs() < 1e-14);
        assert_eq!(means_gap_power(lm(6.0, 1.0), 3.0, 2.0, 2.0).unwrap(), 0.0);
        assert_eq!(means_gap_log(lm(6.0, 1.0), 2.0, 2.0).unwrap(), 0.0);
        assert!(means_gap_power(lm(1.0, 1.0), 2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn log_gap_against_quadrature() {
        let e = std::f64::consts::E;
        let g = means_gap_log(lm(2.0, 1.0), 1.0, e).unwrap();
        let ln_i = identric_by_quadrature(1.0, e).unwrap().ln();
        assert!((g - (0.5 - ln_i)).abs() < 1e-12);
        let g = means_gap_log(lm(1.0, 0.0), 1.0, 2.0).unwrap();
        let ln_i = identric_by_quadrature(1.0, 2.0).unwrap().ln();
        assert!((g - (1.5f64.ln() - ln_i)).abs() < 1e-12);
    }

    #[test]
    fn worked_particular_instance() {
        let t = MeansTheorem::from_id("4.2-particular", Some(2.0), None, None).unwrap();
        let r = evaluate_means(&t, lm(2.0, 1.0), 1.0, 2.0).unwrap();
        assert!((r.gap - 1.0 / 6.0).abs() < 1e-14);
        assert!((r.bound - 0.75).abs() < 1e-14);
        let r = evaluate_means(&t, lm(2.0, 1.0), 1.0, 1.0).unwrap();
        assert_eq!((r.gap, r.bound), (0.0, 0.0));
    }

    #[test]
    fn inadmissible_power_is_rejected_with_reason() {
        let t = MeansTheorem::from_id("4.2-particular", Some(1.5), None, None).unwrap();
        let err = means_bound(&t, lm(2.0, 1.0), 1.0, 2.0).unwrap_err();
        assert_eq!(err, MeansError::InadmissiblePower { s: 1.5, q: 1.0 });
        assert!(err.to_string().contains("(s-1)q >= 1"));
    }

    #[test]
    fn theorem_ids_round_trip() {
        for id in [
            "4.1", "4.2-p1", "4.2-pq", "4.2-particular", "4.3", "4.3-p1", "4.3-pq", "4.3-particular",
            "4.4", "4.5-p1", "4.5-pq", "4.5-particular",
        ] {
            let t = MeansTheorem::from_id(id, Some(-0.5), Some(1.5), Some(2.0)).unwrap();
            assert_eq!(t.id(), id);
        }
        assert!(MeansTheorem::from_id("4.6", None, None, None).is_err());
        assert!(MeansTheorem::from_id("4.1", None, Some(1.0), Some(2.0)).is_err());
        assert!(MeansTheorem::from_id("4.4-p1", None, None, Some(2.0)).is_err());
    }
}
