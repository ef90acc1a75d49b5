//! A-priori error bounds for the three-point rules.
//!
//! Every bound here comes from one of two assemblies:
//!
//! * the `q = 1` polynomial bound, cubic in `lambda` and `mu`;
//! * the Hölder bound for exponents `(p, q)`, `q > 1`, `0 < p <= q`, built
//!   from closed-form kernel moments over each half of `[0, 1]`.
//!
//! The `p = 1`, `p = q`, `(m, ell)` and named-rule variants are all routed
//! through these two; there is no second copy of the algebra.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::oracle::{Interval, Side};
use crate::rules::{NamedRule, RuleError, RuleParams};
use crate::search;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("invalid Hölder exponents p = {p}, q = {q}: {reason}")]
    InvalidHolder { p: f64, q: f64, reason: &'static str },
    #[error("q = {0} must be >= 1")]
    InvalidQ(f64),
    #[error("derivative magnitudes must be finite and >= 0 (got {da}, {db})")]
    InvalidEndpoints { da: f64, db: f64 },
    #[error("{side:?} kernel shift {shift} outside its half interval")]
    InvalidShift { side: Side, shift: f64 },
    #[error("bound evaluation overflowed (p = {p}, q = {q})")]
    Overflow { p: f64, q: f64 },
    #[error("cannot evaluate derivative at an endpoint: {0}")]
    Derivative(#[from] EvalError),
}

/// Hölder exponents for the general bound: `q > 1`, `0 < p <= q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderParams {
    pub p: f64,
    pub q: f64,
}

impl HolderParams {
    pub fn new(p: f64, q: f64) -> Result<Self, BoundError> {
        let bad = |reason| Err(BoundError::InvalidHolder { p, q, reason });
        if !(p.is_finite() && q.is_finite()) {
            return bad("exponents must be finite");
        }
        if q <= 1.0 {
            return bad("q must exceed 1");
        }
        if !(p > 0.0 && p <= q) {
            return bad("need 0 < p <= q");
        }
        Ok(HolderParams { p, q })
    }

    /// Exponent `(q - p)/(q - 1)` of the kernel factor pulled out by Hölder.
    pub fn kernel_exponent(&self) -> f64 {
        (self.q - self.p) / (self.q - 1.0)
    }
}

/// `|f'(a)|` and `|f'(b)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivEndpoints {
    pub da: f64,
    pub db: f64,
}

impl DerivEndpoints {
    pub fn new(da: f64, db: f64) -> Result<Self, BoundError> {
        if da.is_finite() && db.is_finite() && da >= 0.0 && db >= 0.0 {
            Ok(DerivEndpoints { da, db })
        } else {
            Err(BoundError::InvalidEndpoints { da, db })
        }
    }

    pub fn from_derivative(fprime: &Expr, interval: Interval) -> Result<Self, BoundError> {
        let da = fprime.eval(interval.a())?.abs();
        let db = fprime.eval(interval.b())?.abs();
        DerivEndpoints::new(da, db)
    }

    pub fn swapped(self) -> Self {
        DerivEndpoints {
            da: self.db,
            db: self.da,
        }
    }
}

/// Which assembly a bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BoundMode {
    /// `|f'|` convex, polynomial bound.
    Q1,
    /// Hölder bound at `p = 1`; defined for `q >= 1`.
    P1 { q: f64 },
    /// Hölder bound at `p = q`; `q = 1` reduces to [`BoundMode::Q1`].
    Pq { q: f64 },
    /// Hölder bound at arbitrary `(p, q)`.
    General { p: f64, q: f64 },
}

impl BoundMode {
    pub fn q(&self) -> f64 {
        match *self {
            BoundMode::Q1 => 1.0,
            BoundMode::P1 { q } | BoundMode::Pq { q } | BoundMode::General { q, .. } => q,
        }
    }

    /// The Hölder `p` actually used.
    pub fn p(&self) -> f64 {
        match *self {
            BoundMode::Q1 | BoundMode::P1 { .. } => 1.0,
            BoundMode::Pq { q } => q,
            BoundMode::General { p, .. } => p,
        }
    }
}

/// Coefficients of `|f'(a)|` and `|f'(b)|` in the `q = 1` bound, before the
/// `(b-a)/24` factor. Generic so they can be evaluated in exact arithmetic.
pub fn q1_coefficients<T>(lambda: T, mu: T) -> (T, T)
where
    T: Num + Copy + FromPrimitive,
{
    let c = |n: i32| T::from_i32(n).expect("small integer constant");
    let (l2, m2) = (lambda * lambda, mu * mu);
    let (l3, m3) = (l2 * lambda, m2 * mu);
    let coef_a = c(10) - c(3) * lambda + c(8) * l3 - c(15) * mu + c(8) * m3;
    let coef_b = c(8) - c(9) * lambda + c(24) * l2 - c(8) * l3 - c(21) * mu + c(24) * m2
        - c(8) * m3;
    (coef_a, coef_b)
}

/// Bound for `|f'|` convex:
/// `(b-a)/24 · [(10 - 3λ + 8λ³ - 15μ + 8μ³)|f'(a)| + (8 - 9λ + 24λ² - 8λ³ - 21μ + 24μ² - 8μ³)|f'(b)|]`.
pub fn bound_q1(rule: RuleParams, d: DerivEndpoints, interval: Interval) -> Result<f64, BoundError> {
    rule.require_bound_admissible()?;
    let (ca, cb) = q1_coefficients(rule.lambda, rule.mu);
    Ok(interval.width() / 24.0 * (ca * d.da + cb * d.db))
}

/// `ln((q-1)/(2q-p-1))` and `r = (2q-p-1)/(q-1)`. At `q = 1` only `p = 1`
/// is meaningful and the limits `ln(1/2)`, `r = 2` are used.
fn holder_shape(p: f64, q: f64) -> (f64, f64) {
    if q == 1.0 {
        debug_assert_eq!(p, 1.0);
        (0.5f64.ln(), 2.0)
    } else if p == 1.0 {
        (0.5f64.ln(), 2.0)
    } else {
        let denom = 2.0 * q - p - 1.0;
        ((q - 1.0).ln() - denom.ln(), denom / (q - 1.0))
    }
}

/// Per-half pieces of the Hölder bound.
struct HalfTerms {
    /// `ln(u^r + v^r)` with `u`, `v` the two kernel arm lengths.
    ln_arms: f64,
    /// Bracketed coefficients of `|f'(a)|^q` and `|f'(b)|^q`; dividing by
    /// `(p+1)(p+2)` gives the weighted kernel moments.
    bracket_a: f64,
    bracket_b: f64,
}

fn ln_sum_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((x - m).exp() + (y - m).exp()).ln()
    }
}

fn half_terms(side: Side, shift: f64, p: f64, r: f64) -> HalfTerms {
    match side {
        Side::Left => {
            let (u, v) = (0.5 - shift, shift);
            HalfTerms {
                ln_arms: ln_sum_exp(r * u.ln(), r * v.ln()),
                bracket_a: 0.5 * (p + 1.0 + 2.0 * shift) * u.powf(p + 1.0) + v.powf(p + 2.0),
                bracket_b: 0.5 * (p + 3.0 - 2.0 * shift) * u.powf(p + 1.0)
                    + (p + 2.0 - shift) * v.powf(p + 1.0),
            }
        }
        Side::Right => {
            let (u, v) = (shift - 0.5, 1.0 - shift);
            HalfTerms {
                ln_arms: ln_sum_exp(r * u.ln(), r * v.ln()),
                bracket_a: 0.5 * (p + 1.0 + 2.0 * shift) * u.powf(p + 1.0)
                    + (p + 1.0 + shift) * v.powf(p + 1.0),
                bracket_b: 0.5 * (p + 3.0 - 2.0 * shift) * u.powf(p + 1.0) + v.powf(p + 2.0),
            }
        }
    }
}

fn check_shift(side: Side, shift: f64) -> Result<(), BoundError> {
    let (lo, hi) = side.range();
    if (lo..=hi).contains(&shift) {
        Ok(())
    } else {
        Err(BoundError::InvalidShift { side, shift })
    }
}

/// Closed-form kernel moments over one half of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelMoments {
    /// `∫ |shift - t|^((q-p)/(q-1)) dt`
    pub hoelder_factor: f64,
    /// `∫ |shift - t|^p · t dt`
    pub weight_a: f64,
    /// `∫ |shift - t|^p · (1 - t) dt`
    pub weight_b: f64,
}

pub fn kernel_moments_closed(
    shift: f64,
    side: Side,
    hp: HolderParams,
) -> Result<KernelMoments, BoundError> {
    check_shift(side, shift)?;
    let HolderParams { p, q } = hp;
    let (ln_ratio, r) = holder_shape(p, q);
    let h = half_terms(side, shift, p, r);
    let norm = (p + 1.0) * (p + 2.0);
    let m = KernelMoments {
        hoelder_factor: (ln_ratio + h.ln_arms).exp(),
        weight_a: h.bracket_a / norm,
        weight_b: h.bracket_b / norm,
    };
    if m.hoelder_factor.is_finite() && m.weight_a.is_finite() && m.weight_b.is_finite() {
        Ok(m)
    } else {
        Err(BoundError::Overflow { p, q })
    }
}

/// `(A·da^q + B·db^q)^(1/q)`, scaled to avoid overflow for large `q`.
fn weighted_power_mean(wa: f64, wb: f64, d: DerivEndpoints, q: f64) -> f64 {
    let scale = d.da.max(d.db);
    if scale == 0.0 {
        return 0.0;
    }
    let (xa, xb) = (d.da / scale, d.db / scale);
    scale * (wa * xa.powf(q) + wb * xb.powf(q)).powf(1.0 / q)
}

/// Hölder assembly shared by every `q >= 1` path. Arguments are assumed
/// validated by the caller.
fn assemble(rule: RuleParams, p: f64, q: f64, d: DerivEndpoints, interval: Interval) -> Result<f64, BoundError> {
    let outer = 1.0 - 1.0 / q;
    let (ln_ratio, r) = holder_shape(p, q);
    let ln_prefactor = outer * ln_ratio - ((p + 1.0) * (p + 2.0)).ln() / q;
    let mut braces = 0.0;
    for (side, shift) in [(Side::Left, rule.lambda), (Side::Right, rule.mu)] {
        let h = half_terms(side, shift, p, r);
        braces += (outer * h.ln_arms).exp() * weighted_power_mean(h.bracket_a, h.bracket_b, d, q);
    }
    let total = interval.width() * ln_prefactor.exp() * braces;
    if total.is_finite() {
        Ok(total)
    } else {
        Err(BoundError::Overflow { p, q })
    }
}

/// General Hölder bound for `|f'|^q` convex, `q > 1`, `0 < p <= q`.
pub fn bound_pq(
    rule: RuleParams,
    hp: HolderParams,
    d: DerivEndpoints,
    interval: Interval,
) -> Result<f64, BoundError> {
    rule.require_bound_admissible()?;
    let hp = HolderParams::new(hp.p, hp.q)?;
    assemble(rule, hp.p, hp.q, d, interval)
}

/// Hölder bound at `p = 1`, valid for `q >= 1`; equals [`bound_q1`] at `q = 1`.
pub fn bound_p1(rule: RuleParams, q: f64, d: DerivEndpoints, interval: Interval) -> Result<f64, BoundError> {
    rule.require_bound_admissible()?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(BoundError::InvalidQ(q));
    }
    assemble(rule, 1.0, q, d, interval)
}

/// Evaluate the bound selected by `mode`.
pub fn bound(rule: RuleParams, mode: BoundMode, d: DerivEndpoints, interval: Interval) -> Result<f64, BoundError> {
    match mode {
        BoundMode::Q1 => bound_q1(rule, d, interval),
        BoundMode::P1 { q } => bound_p1(rule, q, d, interval),
        BoundMode::Pq { q: 1.0 } => bound_q1(rule, d, interval),
        BoundMode::Pq { q } => bound_pq(rule, HolderParams::new(q, q)?, d, interval),
        BoundMode::General { p, q } if q == 1.0 && p == 1.0 => bound_q1(rule, d, interval),
        BoundMode::General { p, q } => bound_pq(rule, HolderParams::new(p, q)?, d, interval),
    }
}

pub fn bound_named(name: NamedRule, mode: BoundMode, d: DerivEndpoints, interval: Interval) -> Result<f64, BoundError> {
    bound(name.rule(), mode, d, interval)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalP {
    pub p: f64,
    pub rhs: f64,
}

const P_GRID_POINTS: usize = 64;
const P_GRID_DECADES: f64 = 6.0;

/// Minimise [`bound_pq`] over `p` in `(0, q]`.
///
/// A 64-point log-spaced grid from `q·1e-6` to `q` (plus `p = 1`) brackets
/// the minimum, golden-section search refines it.
pub fn optimize_p(rule: RuleParams, q: f64, d: DerivEndpoints, interval: Interval) -> Result<OptimalP, BoundError> {
    HolderParams::new(q, q)?;
    rule.require_bound_admissible()?;
    let mut grid: Vec<f64> = (0..P_GRID_POINTS)
        .map(|k| {
            let frac = k as f64 / (P_GRID_POINTS - 1) as f64;
            q * 10f64.powf(-P_GRID_DECADES * (1.0 - frac))
        })
        .collect();
    grid[P_GRID_POINTS - 1] = q;
    if q > 1.0 {
        grid.push(1.0);
        grid.sort_by(f64::total_cmp);
    }
    let objective = |p: f64| assemble(rule, p, q, d, interval);
    let (p, rhs) = search::grid_then_golden(objective, &grid, 1e-10 * q)?;
    Ok(OptimalP { p, rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalRule {
    pub rule: RuleParams,
    pub rhs: f64,
}

const RULE_LINE_GRID: usize = 33;
const RULE_TOL: f64 = 1e-6;

/// Minimise the bound selected by `mode` over `0 <= lambda <= 1/2 <= mu <= 1`
/// by coordinate descent from a 3x3 grid of starts. Returns the best local
/// optimum found.
pub fn optimize_rule(mode: BoundMode, d: DerivEndpoints, interval: Interval) -> Result<OptimalRule, BoundError> {
    let eval = |lambda: f64, mu: f64| bound(RuleParams { lambda, mu }, mode, d, interval);
    let line = |lo: f64| -> Vec<f64> {
        (0..RULE_LINE_GRID)
            .map(|i| lo + 0.5 * i as f64 / (RULE_LINE_GRID - 1) as f64)
            .collect()
    };
    let (lambda_grid, mu_grid) = (line(0.0), line(0.5));

    let mut best: Option<OptimalRule> = None;
    for lambda0 in [0.0, 0.25, 0.5] {
        for mu0 in [0.5, 0.75, 1.0] {
            let (mut lambda, mut mu) = (lambda0, mu0);
            let mut value = eval(lambda, mu)?;
            for _ in 0..100 {
                let (nl, vl) = search::grid_then_golden(|l| eval(l, mu), &lambda_grid, 1e-10)?;
                let (nm, vm) = search::grid_then_golden(|m| eval(nl, m), &mu_grid, 1e-10)?;
                let moved = (nl - lambda).abs().max((nm - mu).abs());
                if vl <= value {
                    lambda = nl;
                    value = vl;
                }
                if vm <= value {
                    mu = nm;
                    value = vm;
                }
                if moved < RULE_TOL {
                    break;
                }
            }
            if best.is_none_or(|b| value < b.rhs) {
                best = Some(OptimalRule {
                    rule: RuleParams { lambda, mu },
                    rhs: value,
                });
            }
        }
    }
    Ok(best.expect("nine starts evaluated"))
}
