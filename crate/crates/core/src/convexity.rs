//! Sampled midpoint-convexity certificates for `|f'|^q`.
//!
//! A passing certificate is evidence, not proof. A failing one carries a
//! concrete pair `(x, y)` with `g((x+y)/2) > (g(x)+g(y))/2`, which is
//! definitive.

use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::oracle::Interval;

pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_SAMPLES: usize = 64;

/// Rounding allowance, in units of machine epsilon times the magnitude of
/// the three values compared.
const ROUNDING_ULPS: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvexityError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid tolerance {0}")]
    InvalidTolerance(f64),
    #[error("evaluation failed at x = {x}: {message}")]
    Evaluation { x: f64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Random pairs; the same number of low-discrepancy pairs is added.
    pub samples: usize,
    /// Absolute tolerance on midpoint residuals.
    pub tol: f64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    /// `g((x+y)/2) - (g(x)+g(y))/2`
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub function_id: String,
    pub q: f64,
    pub interval: Interval,
    pub samples: usize,
    /// Number of `(x, y)` pairs actually tested.
    pub pairs: usize,
    /// Largest midpoint residual beyond the rounding allowance, clamped at 0.
    pub max_violation: f64,
    pub valid: bool,
    /// The worst pair, present when the certificate is invalid.
    pub witness: Option<Witness>,
}

/// Radical-inverse in base `b` (van der Corput / Halton component).
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Evaluate `g` at `x`, stepping one ulp inward if `x` hits a point where
/// `g` is undefined (a kink of `abs` in `f'`).
fn eval_nudged<G, E>(g: &G, x: f64, interval: Interval) -> Result<f64, ConvexityError>
where
    G: Fn(f64) -> Result<f64, E>,
    E: Display,
{
    match g(x) {
        Ok(v) => Ok(v),
        Err(first) => {
            let nudged = if x < interval.b() { x.next_up() } else { x.next_down() };
            g(nudged).map_err(|_| ConvexityError::Evaluation {
                x,
                message: first.to_string(),
            })
        }
    }
}

/// Certify midpoint convexity of `g` on `interval`.
///
/// Tests the endpoint pair, `samples` pairs from a 2-D Halton sequence and
/// `samples` seeded random pairs.
pub fn certify_convex<G, E>(
    g: G,
    function_id: &str,
    q: f64,
    interval: Interval,
    opts: CertifyOptions,
) -> Result<ConvexityCertificate, ConvexityError>
where
    G: Fn(f64) -> Result<f64, E>,
    E: Display,
{
    if opts.samples < MIN_SAMPLES {
        return Err(ConvexityError::TooFewSamples(opts.samples));
    }
    if !(opts.tol >= 0.0 && opts.tol.is_finite()) {
        return Err(ConvexityError::InvalidTolerance(opts.tol));
    }
    let (a, w) = (interval.a(), interval.width());
    let at = |u: f64| (a + w * u).min(interval.b());

    let mut pairs = Vec::with_capacity(2 * opts.samples + 1);
    pairs.push((interval.a(), interval.b()));
    for i in 1..=opts.samples as u64 {
        pairs.push((at(radical_inverse(i, 2)), at(radical_inverse(i, 3))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.samples {
        pairs.push((at(rng.random::<f64>()), at(rng.random::<f64>())));
    }

    let mut worst: Option<Witness> = None;
    for &(x, y) in &pairs {
        let gx = eval_nudged(&g, x, interval)?;
        let gy = eval_nudged(&g, y, interval)?;
        let gm = eval_nudged(&g, 0.5 * (x + y), interval)?;
        let residual = gm - 0.5 * (gx + gy);
        let allowance = ROUNDING_ULPS * f64::EPSILON * (gm.abs() + gx.abs() + gy.abs());
        let excess = residual - allowance;
        if worst.is_none_or(|wt| excess > wt.residual) {
            worst = Some(Witness { x, y, residual: excess });
        }
    }
    let worst = worst.expect("at least the endpoint pair");
    let max_violation = worst.residual.max(0.0);
    let valid = max_violation <= opts.tol;
    Ok(ConvexityCertificate {
        function_id: function_id.to_string(),
        q,
        interval,
        samples: opts.samples,
        pairs: pairs.len(),
        max_violation,
        valid,
        witness: (!valid).then_some(worst),
    })
}

/// Certify `|f'|^q` where `fprime` is the symbolic derivative of `f`.
pub fn certify_derivative_power(
    fprime: &Expr,
    q: f64,
    interval: Interval,
    opts: CertifyOptions,
) -> Result<ConvexityCertificate, ConvexityError> {
    let id = format!("|{fprime}|^{q}");
    certify_convex(|x| fprime.eval(x).map(|v| v.abs().powf(q)), &id, q, interval, opts)
}

/// Whether `|d/dx x^s|^q = |s|^q x^((s-1)q)` is convex on the positive axis
/// by the sign of its second derivative `(s-1)q((s-1)q-1)|s|^q x^((s-1)q-2)`:
/// true iff `s > 1` and `(s-1)q >= 1`, or `s < 1` and `s != 0`.
pub fn admissible_power(s: f64, q: f64) -> bool {
    (s > 1.0 && (s - 1.0) * q >= 1.0) || (s < 1.0 && s != 0.0)
}
