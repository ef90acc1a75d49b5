//! Ground-truth numerical integration.
//!
//! Globally adaptive bisection driven by an embedded 7-point Gauss /
//! 15-point Kronrod pair. Used for mean integrals, for the integral sides of
//! the quadrature identities, and as the brute-force route for the kernel
//! moment integrals whose closed forms live in [`crate::bounds`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Display;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_EVALUATIONS: usize = 1_000_000;
pub const MIN_TOL: f64 = 1e-13;

/// A closed interval `[a, b]` with finite `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawInterval {
    a: f64,
    b: f64,
}

impl TryFrom<RawInterval> for Interval {
    type Error = IntervalError;

    fn try_from(raw: RawInterval) -> Result<Self, Self::Error> {
        Interval::new(raw.a, raw.b)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid interval [{a}, {b}]: need finite a < b")]
pub struct IntervalError {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, IntervalError> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Interval { a, b })
        } else {
            Err(IntervalError { a, b })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    /// `t*a + (1-t)*b`: `t = 0` maps to `b`, `t = 1` maps to `a`.
    pub fn point_at(&self, t: f64) -> f64 {
        t * self.a + (1.0 - t) * self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate, always `>= 0`.
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("tolerance {0} is below the supported minimum {MIN_TOL}")]
    InvalidTolerance(f64),
    #[error("integrand failed at x = {x}: {message}")]
    Integrand { x: f64, message: String },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("no convergence after {evaluations} evaluations (estimate {value}, error {error_estimate})")]
    NonConvergence {
        evaluations: usize,
        value: f64,
        error_estimate: f64,
    },
    #[error("negative kernel exponent {0}")]
    NegativeExponent(f64),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Absolute tolerance on the integral.
    pub tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            tol: DEFAULT_TOL,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
        }
    }
}

impl QuadratureOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureOptions {
            tol,
            ..Default::default()
        }
    }
}

// Kronrod abscissae, Kronrod weights and Gauss weights for the G7/K15 pair.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<F, E>(f: &mut F, lo: f64, hi: f64) -> Result<Panel, OracleError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: Display,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut eval = |x: f64| -> Result<f64, OracleError> {
        match f(x) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => Err(OracleError::NonFinite { x }),
            Err(e) => Err(OracleError::Integrand {
                x,
                message: e.to_string(),
            }),
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
        abs_value: res_abs,
    })
}

const PANEL_EVALUATIONS: usize = 15;

/// Integrate a fallible integrand over `interval`.
///
/// Panels are bisected in order of decreasing error estimate until the
/// summed estimate drops below `opts.tol` (or below the round-off floor for
/// integrals whose magnitude makes `tol` unattainable in binary64).
pub fn try_integrate<F, E>(
    mut f: F,
    interval: Interval,
    opts: QuadratureOptions,
) -> Result<QuadratureResult, OracleError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: Display,
{
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(opts.tol >= MIN_TOL) {
        return Err(OracleError::InvalidTolerance(opts.tol));
    }
    let first = kronrod_panel(&mut f, interval.a(), interval.b())?;
    let mut evaluations = PANEL_EVALUATIONS;
    let mut value = first.value;
    let mut error = first.error;
    let mut abs_sum = first.abs_value;
    // Panels too narrow to bisect keep contributing their error here.
    let mut frozen_error = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let target = opts.tol.max(100.0 * f64::EPSILON * abs_sum);
        if error <= target {
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            frozen_error += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        if evaluations + 2 * PANEL_EVALUATIONS > opts.max_evaluations {
            break;
        }
        let left = kronrod_panel(&mut f, worst.lo, mid)?;
        let right = kronrod_panel(&mut f, mid, worst.hi)?;
        evaluations += 2 * PANEL_EVALUATIONS;
        value += left.value + right.value - worst.value;
        abs_sum += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        // Re-summing avoids drift from repeated add/subtract of estimates.
        error = heap.iter().map(|p| p.error).sum::<f64>() + frozen_error;
    }
    Err(OracleError::NonConvergence {
        evaluations,
        value,
        error_estimate: error,
    })
}

/// Integrate an infallible integrand.
pub fn integrate<F>(mut f: F, interval: Interval, tol: f64) -> Result<QuadratureResult, OracleError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(
        |x| Ok::<f64, std::convert::Infallible>(f(x)),
        interval,
        QuadratureOptions::with_tol(tol),
    )
}

/// Which half of `[0, 1]` a kernel moment integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `t` in `[0, 1/2]`, shift plays `lambda`.
    Left,
    /// `t` in `[1/2, 1]`, shift plays `mu`.
    Right,
}

impl Side {
    pub fn range(self) -> (f64, f64) {
        match self {
            Side::Left => (0.0, 0.5),
            Side::Right => (0.5, 1.0),
        }
    }
}

/// Weight multiplying the kernel `|shift - t|^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    One,
    T,
    OneMinusT,
}

impl Weight {
    pub fn at(self, t: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::T => t,
            Weight::OneMinusT => 1.0 - t,
        }
    }
}

const KERNEL_TOL: f64 = 1e-13;

/// Brute-force `∫ |shift - t|^exponent · w(t) dt` over one half of `[0, 1]`.
///
/// The kink at `t = shift` is split out explicitly so each panel is smooth
/// in its interior.
pub fn kernel_moment_numeric(
    side: Side,
    shift: f64,
    exponent: f64,
    weight: Weight,
) -> Result<f64, OracleError> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(exponent >= 0.0) {
        return Err(OracleError::NegativeExponent(exponent));
    }
    let (lo, hi) = side.range();
    let integrand = |t: f64| (shift - t).abs().powf(exponent) * weight.at(t);
    let mut cuts = vec![lo];
    if shift > lo && shift < hi {
        cuts.push(shift);
    }
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let piece = Interval::new(w[0], w[1])?;
        total += integrate(integrand, piece, KERNEL_TOL)?.value;
    }
    Ok(total)
}
