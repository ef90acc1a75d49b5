//! Closed-form bounds transcribed term by term from their printed displays.
//!
//! These are deliberately independent of the library: every constant and
//! power is written out as printed, so agreement with the library's single
//! assembly is a real check. `w = b - a`, `fa = |f'(a)|^q`, `fb = |f'(b)|^q`.

#![allow(dead_code)]

/// `(q-1)/(2q-p-1)` raised to `1 - 1/q`.
fn ratio_factor(p: f64, q: f64) -> f64 {
    ((q - 1.0) / (2.0 * q - p - 1.0)).powf(1.0 - 1.0 / q)
}

/// `(2q-p-1)/(q-1)`
fn r_exp(p: f64, q: f64) -> f64 {
    (2.0 * q - p - 1.0) / (q - 1.0)
}

fn pair(q: f64, c_a: f64, c_b: f64, fa: f64, fb: f64) -> f64 {
    (c_a * fa + c_b * fb).powf(1.0 / q) + (c_b * fa + c_a * fb).powf(1.0 / q)
}

/// `(lambda, mu)` rule, `p = 1`, `q >= 1`.
pub fn lm_p1(lambda: f64, mu: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let (l, m) = (lambda, mu);
    let lu = 0.5 - l;
    let mu_ = m - 0.5;
    let left = (lu.powi(2) + l.powi(2)).powf(1.0 - 1.0 / q)
        * (((1.0 + l) * lu.powi(2) + l.powi(3)) * fa + ((2.0 - l) * lu.powi(2) + (3.0 - l) * l.powi(2)) * fb)
            .powf(1.0 / q);
    let right = (mu_.powi(2) + (1.0 - m).powi(2)).powf(1.0 - 1.0 / q)
        * (((1.0 + m) * mu_.powi(2) + (2.0 + m) * (1.0 - m).powi(2)) * fa
            + ((2.0 - m) * mu_.powi(2) + (1.0 - m).powi(3)) * fb)
            .powf(1.0 / q);
    w / 2.0 * (1.0f64 / 3.0).powf(1.0 / q) * (left + right)
}

/// `(lambda, mu)` rule, `p = q`, `q > 1`.
pub fn lm_pq(lambda: f64, mu: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let (l, m) = (lambda, mu);
    let lu = 0.5 - l;
    let mu_ = m - 0.5;
    let left = ((0.5 * (q + 1.0 + 2.0 * l) * lu.powf(q + 1.0) + l.powf(q + 2.0)) * fa
        + (0.5 * (q + 3.0 - 2.0 * l) * lu.powf(q + 1.0) + (q + 2.0 - l) * l.powf(q + 1.0)) * fb)
        .powf(1.0 / q);
    let right = ((0.5 * (q + 1.0 + 2.0 * m) * mu_.powf(q + 1.0) + (q + 1.0 + m) * (1.0 - m).powf(q + 1.0)) * fa
        + (0.5 * (q + 3.0 - 2.0 * m) * mu_.powf(q + 1.0) + (1.0 - m).powf(q + 2.0)) * fb)
        .powf(1.0 / q);
    w / 2.0 * (2.0 / ((q + 1.0) * (q + 2.0))).powf(1.0 / q) * (left + right)
}

/// `(lambda, mu)` rule, general `(p, q)`.
pub fn lm_general(lambda: f64, mu: f64, p: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let (l, m) = (lambda, mu);
    let r = r_exp(p, q);
    let lu = 0.5 - l;
    let mu_ = m - 0.5;
    let left = (lu.powf(r) + l.powf(r)).powf(1.0 - 1.0 / q)
        * ((0.5 * (p + 1.0 + 2.0 * l) * lu.powf(p + 1.0) + l.powf(p + 2.0)) * fa
            + (0.5 * (p + 3.0 - 2.0 * l) * lu.powf(p + 1.0) + (p + 2.0 - l) * l.powf(p + 1.0)) * fb)
            .powf(1.0 / q);
    let right = (mu_.powf(r) + (1.0 - m).powf(r)).powf(1.0 - 1.0 / q)
        * ((0.5 * (p + 1.0 + 2.0 * m) * mu_.powf(p + 1.0) + (p + 1.0 + m) * (1.0 - m).powf(p + 1.0)) * fa
            + (0.5 * (p + 3.0 - 2.0 * m) * mu_.powf(p + 1.0) + (1.0 - m).powf(p + 2.0)) * fb)
            .powf(1.0 / q);
    w * ratio_factor(p, q) * (1.0 / ((p + 1.0) * (p + 2.0))).powf(1.0 / q) * (left + right)
}

/// `(lambda, mu)` rule, `q = 1`, in the expanded cubic form.
pub fn lm_q1(lambda: f64, mu: f64, w: f64, da: f64, db: f64) -> f64 {
    let (l, m) = (lambda, mu);
    let ca = 10.0 - 3.0 * l + 8.0 * l.powi(3) - 15.0 * m + 8.0 * m.powi(3);
    let cb = 8.0 - 9.0 * l + 24.0 * l.powi(2) - 8.0 * l.powi(3) - 21.0 * m + 24.0 * m.powi(2) - 8.0 * m.powi(3);
    w / 24.0 * (ca * da + cb * db)
}

/// Coefficients of the `(m, ell)` Hölder bound at exponent `p`.
fn ml_coeffs(m: f64, ell: f64, p: f64) -> (f64, f64) {
    let t = 2.0 * ell;
    let u = m - 2.0 * ell;
    let c1 = t.powf(p + 2.0) + (m * p + m + t) * u.powf(p + 1.0);
    let c2 = (2.0 * m * p + 4.0 * m - t) * t.powf(p + 1.0) + (m * p + 3.0 * m - t) * u.powf(p + 1.0);
    (c1, c2)
}

/// `(m, ell)` rule, general `(p, q)`.
pub fn ml_general(m: f64, ell: f64, p: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let r = r_exp(p, q);
    let (c1, c2) = ml_coeffs(m, ell, p);
    w / (4.0 * m * m)
        * ratio_factor(p, q)
        * (1.0 / (2.0 * m * (p + 1.0) * (p + 2.0))).powf(1.0 / q)
        * ((2.0 * ell).powf(r) + (m - 2.0 * ell).powf(r)).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, fa, fb)
}

/// `(m, ell)` rule, `p = 1`, `q >= 1`.
pub fn ml_p1(m: f64, ell: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let u = m - 2.0 * ell;
    let c1 = (m + ell) * u * u + 4.0 * ell.powi(3);
    let c2 = (2.0 * m - ell) * u * u + 4.0 * (3.0 * m - ell) * ell * ell;
    w / (8.0 * m * m)
        * (1.0 / (3.0 * m)).powf(1.0 / q)
        * (u * u + (2.0 * ell).powi(2)).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, fa, fb)
}

/// `(m, ell)` rule, `p = q`.
pub fn ml_pq(m: f64, ell: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let (c1, c2) = ml_coeffs(m, ell, q);
    w / (4.0 * m) * (1.0 / (2.0 * m * m * (q + 1.0) * (q + 2.0))).powf(1.0 / q) * pair(q, c1, c2, fa, fb)
}

/// Named rules at general `(p, q)`, in the simplified printed forms.
pub fn named_general(name: &str, p: f64, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let rf = ratio_factor(p, q);
    let r = r_exp(p, q);
    let k = 1.0 / q;
    let pp = (p + 1.0) * (p + 2.0);
    let two = 2.0f64;
    match name {
        "midpoint" => w / 4.0 * rf * (1.0 / (2.0 * pp)).powf(k) * pair(q, p + 1.0, p + 3.0, fa, fb),
        "trapezoid" => w / 4.0 * rf * (1.0 / (2.0 * pp)).powf(k) * pair(q, 1.0, 2.0 * p + 3.0, fa, fb),
        "avg3" => {
            w / 36.0
                * rf
                * (1.0 / (6.0 * pp)).powf(k)
                * (1.0 + two.powf(r)).powf(1.0 - k)
                * pair(
                    q,
                    two.powf(p + 2.0) + 3.0 * p + 5.0,
                    (3.0 * p + 5.0) * two.powf(p + 2.0) + 3.0 * p + 7.0,
                    fa,
                    fb,
                )
        }
        "avg-mid" => w / 8.0 * rf * (1.0 / (4.0 * pp)).powf(k) * pair(q, p + 2.0, 3.0 * p + 6.0, fa, fb),
        "fifth-13" => {
            w / 100.0
                * rf
                * (1.0 / (10.0 * pp)).powf(k)
                * (two.powf(r) + 3f64.powf(r)).powf(1.0 - k)
                * pair(
                    q,
                    two.powf(p + 2.0) + (5.0 * p + 7.0) * 3f64.powf(p + 1.0),
                    (5.0 * p + 9.0) * two.powf(p + 2.0) + (5.0 * p + 13.0) * 3f64.powf(p + 1.0),
                    fa,
                    fb,
                )
        }
        "fifth-221" => {
            w / 100.0
                * rf
                * (1.0 / (10.0 * pp)).powf(k)
                * (1.0 + 4f64.powf(r)).powf(1.0 - k)
                * pair(
                    q,
                    4f64.powf(p + 2.0) + 5.0 * p + 9.0,
                    (5.0 * p + 8.0) * two.powf(2.0 * p + 3.0) + 5.0 * p + 11.0,
                    fa,
                    fb,
                )
        }
        "simpson" => {
            w / 36.0
                * rf
                * (1.0 / (6.0 * pp)).powf(k)
                * (1.0 + two.powf(r)).powf(1.0 - k)
                * pair(
                    q,
                    (3.0 * p + 4.0) * two.powf(p + 1.0) + 1.0,
                    (3.0 * p + 8.0) * two.powf(p + 1.0) + 6.0 * p + 11.0,
                    fa,
                    fb,
                )
        }
        _ => panic!("unknown rule {name}"),
    }
}

/// Named rules at `p = q`. The avg-mid display carries stray
/// `4(q+2)` factors inside both brackets; [`avg_mid_pq_as_printed`] keeps
/// them, this function is not defined for avg-mid.
pub fn named_pq(name: &str, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let k = 1.0 / q;
    let qq = (q + 1.0) * (q + 2.0);
    let two = 2.0f64;
    match name {
        "midpoint" => w / 4.0 * (1.0 / (2.0 * qq)).powf(k) * pair(q, q + 1.0, q + 3.0, fa, fb),
        "trapezoid" => w / 4.0 * (1.0 / (2.0 * qq)).powf(k) * pair(q, 1.0, 2.0 * q + 3.0, fa, fb),
        "avg3" => {
            w / 12.0
                * (1.0 / (18.0 * qq)).powf(k)
                * pair(
                    q,
                    two.powf(q + 2.0) + 3.0 * q + 5.0,
                    (3.0 * q + 5.0) * two.powf(q + 2.0) + 3.0 * q + 7.0,
                    fa,
                    fb,
                )
        }
        "fifth-13" => {
            w / 20.0
                * (1.0 / (50.0 * qq)).powf(k)
                * pair(
                    q,
                    two.powf(q + 2.0) + (5.0 * q + 7.0) * 3f64.powf(q + 1.0),
                    (5.0 * q + 9.0) * two.powf(q + 2.0) + (5.0 * q + 13.0) * 3f64.powf(q + 1.0),
                    fa,
                    fb,
                )
        }
        "fifth-221" => {
            w / 20.0
                * (1.0 / (50.0 * qq)).powf(k)
                * pair(
                    q,
                    4f64.powf(q + 2.0) + 5.0 * q + 9.0,
                    (5.0 * q + 8.0) * two.powf(2.0 * q + 3.0) + 5.0 * q + 11.0,
                    fa,
                    fb,
                )
        }
        // printed with (p+1)(p+2) in a p = q statement
        "simpson" => {
            w / 12.0
                * (1.0 / (18.0 * qq)).powf(k)
                * pair(
                    q,
                    (3.0 * q + 4.0) * two.powf(q + 1.0) + 1.0,
                    (3.0 * q + 8.0) * two.powf(q + 1.0) + 6.0 * q + 11.0,
                    fa,
                    fb,
                )
        }
        _ => panic!("no usable p = q display for {name}"),
    }
}

/// The avg-mid `p = q` display read literally, stray factors included.
pub fn avg_mid_pq_as_printed(q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let k = 1.0 / q;
    let extra = 4.0 * (q + 2.0);
    w / 8.0
        * (1.0 / (4.0 * (q + 1.0) * (q + 2.0))).powf(k)
        * (((q + 2.0) * fa + (3.0 * q + 6.0) * fb) * extra).powf(k)
        + w / 8.0
            * (1.0 / (4.0 * (q + 1.0) * (q + 2.0))).powf(k)
            * (((3.0 * q + 6.0) * fa + (q + 2.0) * fb) * extra).powf(k)
}

/// Named rules at `p = 1`: `C w [((alpha fa + beta fb)/gamma)^(1/q) + (swap)]`.
pub fn named_p1_constants(name: &str) -> (f64, f64, f64, f64) {
    match name {
        "midpoint" => (1.0 / 8.0, 1.0, 2.0, 3.0),
        "trapezoid" => (1.0 / 8.0, 1.0, 5.0, 6.0),
        "avg3" => (5.0 / 72.0, 8.0, 37.0, 45.0),
        "avg-mid" => (1.0 / 16.0, 1.0, 3.0, 4.0),
        "fifth-13" => (13.0 / 200.0, 58.0, 137.0, 195.0),
        "fifth-221" => (17.0 / 200.0, 13.0, 72.0, 85.0),
        "simpson" => (5.0 / 72.0, 29.0, 61.0, 90.0),
        _ => panic!("unknown rule {name}"),
    }
}

pub fn named_p1(name: &str, q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let (c, alpha, beta, gamma) = named_p1_constants(name);
    let k = 1.0 / q;
    c * w * (((alpha * fa + beta * fb) / gamma).powf(k) + ((beta * fa + alpha * fb) / gamma).powf(k))
}

/// The `q = 1` constants as exact fractions `(numerator, denominator)`.
pub const NAMED_Q1_CONSTANTS: [(&str, i64, i64); 7] = [
    ("midpoint", 1, 8),
    ("trapezoid", 1, 8),
    ("avg3", 5, 72),
    ("avg-mid", 1, 16),
    ("fifth-13", 13, 200),
    ("fifth-221", 17, 200),
    ("simpson", 5, 72),
];

/// Simpson `p = 1` in the earlier weighted power-mean form.
pub fn simpson_power_mean_form(q: f64, w: f64, fa: f64, fb: f64) -> f64 {
    let k = 1.0 / q;
    5.0 * w / 72.0 * (((61.0 * fa + 29.0 * fb) / 90.0).powf(k) + ((29.0 * fa + 61.0 * fb) / 90.0).powf(k))
}

// Means inequalities. `xa`, `xb` are the endpoints.

/// Power means, general `(p, q)`: `f = x^s`.
pub fn means_power_general(m: f64, ell: f64, s: f64, p: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let r = r_exp(p, q);
    let (c1, c2) = ml_coeffs(m, ell, p);
    let (ea, eb) = (xa.powf((s - 1.0) * q), xb.powf((s - 1.0) * q));
    (xb - xa) / (4.0 * m * m)
        * s.abs()
        * ratio_factor(p, q)
        * (1.0 / (2.0 * m * (p + 1.0) * (p + 2.0))).powf(1.0 / q)
        * ((2.0 * ell).powf(r) + (m - 2.0 * ell).powf(r)).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, ea, eb)
}

/// Harmonic/logarithmic, general `(p, q)`: `f = x^{-1}` gives `a^{-2q}`.
pub fn means_harmonic_general(m: f64, ell: f64, p: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let r = r_exp(p, q);
    let (c1, c2) = ml_coeffs(m, ell, p);
    (xb - xa) / (4.0 * m * m)
        * ratio_factor(p, q)
        * (1.0 / (2.0 * m * (p + 1.0) * (p + 2.0))).powf(1.0 / q)
        * ((2.0 * ell).powf(r) + (m - 2.0 * ell).powf(r)).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, xa.powf(-2.0 * q), xb.powf(-2.0 * q))
}

/// Power means, `p = 1`.
pub fn means_power_p1(m: f64, ell: f64, s: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let u = m - 2.0 * ell;
    let c1 = 4.0 * ell.powi(3) + (m + ell) * u * u;
    let c2 = 4.0 * (3.0 * m - ell) * ell * ell + (2.0 * m - ell) * u * u;
    (xb - xa) / (8.0 * m * m)
        * (1.0 / (3.0 * m)).powf(1.0 / q)
        * (4.0 * ell * ell + u * u).powf(1.0 - 1.0 / q)
        * s.abs()
        * pair(q, c1, c2, xa.powf((s - 1.0) * q), xb.powf((s - 1.0) * q))
}

/// Power means, `p = q`, as printed: the second bracket has the exponents
/// `q+2` and `q+1` of `2 ell` exchanged relative to the first.
pub fn means_power_pq_as_printed(m: f64, ell: f64, s: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let t = 2.0 * ell;
    let u = m - 2.0 * ell;
    let (ea, eb) = (xa.powf((s - 1.0) * q), xb.powf((s - 1.0) * q));
    let first = ((t.powf(q + 2.0) + (m * q + m + t) * u.powf(q + 1.0)) * ea
        + ((2.0 * m * q + 4.0 * m - t) * t.powf(q + 1.0) + (m * q + 3.0 * m - t) * u.powf(q + 1.0)) * eb)
        .powf(1.0 / q);
    let second = (((2.0 * m * q + 4.0 * m - t) * t.powf(q + 2.0) + (m * q + 3.0 * m - t) * u.powf(q + 1.0)) * ea
        + (t.powf(q + 1.0) + (m * q + m + t) * u.powf(q + 1.0)) * eb)
        .powf(1.0 / q);
    (xb - xa) / (4.0 * m) * s.abs() * (1.0 / (2.0 * m * m * (q + 1.0) * (q + 2.0))).powf(1.0 / q) * (first + second)
}

/// Harmonic, `p = 1`.
pub fn means_harmonic_p1(m: f64, ell: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let u = m - 2.0 * ell;
    let c1 = 4.0 * ell.powi(3) + (m + ell) * u * u;
    let c2 = 4.0 * (3.0 * m - ell) * ell * ell + (2.0 * m - ell) * u * u;
    (xb - xa) / (8.0 * m * m)
        * (1.0 / (3.0 * m)).powf(1.0 / q)
        * (4.0 * ell * ell + u * u).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, xa.powf(-2.0 * q), xb.powf(-2.0 * q))
}

/// Harmonic, `p = q`.
pub fn means_harmonic_pq(m: f64, ell: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let (c1, c2) = ml_coeffs(m, ell, q);
    (xb - xa) / (4.0 * m)
        * (1.0 / (2.0 * m * m * (q + 1.0) * (q + 2.0))).powf(1.0 / q)
        * pair(q, c1, c2, xa.powf(-2.0 * q), xb.powf(-2.0 * q))
}

/// Power means at `q = 1`.
pub fn means_power_particular(m: f64, ell: f64, s: f64, xa: f64, xb: f64) -> f64 {
    let arith = 0.5 * (xa.powf(s - 1.0) + xb.powf(s - 1.0));
    (xb - xa) / (4.0 * m * m) * s.abs() * (4.0 * ell * ell + (m - 2.0 * ell).powi(2)) * arith
}

/// Harmonic at `q = 1`.
pub fn means_harmonic_particular(m: f64, ell: f64, xa: f64, xb: f64) -> f64 {
    let h2 = 2.0 * xa * xa * xb * xb / (xa * xa + xb * xb);
    (xb - xa) / (4.0 * m * m) * (4.0 * ell * ell + (m - 2.0 * ell).powi(2)) / h2
}

/// Logarithm, general `(p, q)`: `|f'|^q = x^{-q}`.
pub fn means_log_general(m: f64, ell: f64, p: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let r = r_exp(p, q);
    let (c1, c2) = ml_coeffs(m, ell, p);
    (xb - xa) / (4.0 * m * m)
        * ratio_factor(p, q)
        * (1.0 / (2.0 * m * (p + 1.0) * (p + 2.0))).powf(1.0 / q)
        * ((m - 2.0 * ell).powf(r) + (2.0 * ell).powf(r)).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, xa.powf(-q), xb.powf(-q))
}

/// Logarithm, `p = q`.
pub fn means_log_pq(m: f64, ell: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let (c1, c2) = ml_coeffs(m, ell, q);
    (xb - xa) / (4.0 * m)
        * (1.0 / (2.0 * m * m * (q + 1.0) * (q + 2.0))).powf(1.0 / q)
        * pair(q, c1, c2, xa.powf(-q), xb.powf(-q))
}

/// Logarithm, `p = 1`.
pub fn means_log_p1(m: f64, ell: f64, q: f64, xa: f64, xb: f64) -> f64 {
    let u = m - 2.0 * ell;
    let c1 = 4.0 * ell.powi(3) + (m + ell) * u * u;
    let c2 = (2.0 * m - ell) * u * u + 4.0 * (3.0 * m - ell) * ell * ell;
    (xb - xa) / (8.0 * m * m)
        * (1.0 / (3.0 * m)).powf(1.0 / q)
        * (u * u + (2.0 * ell).powi(2)).powf(1.0 - 1.0 / q)
        * pair(q, c1, c2, xa.powf(-q), xb.powf(-q))
}

/// Logarithm at `q = 1`.
pub fn means_log_particular(m: f64, ell: f64, xa: f64, xb: f64) -> f64 {
    let h = 2.0 * xa * xb / (xa + xb);
    (xb - xa) / (4.0 * m * m) * (4.0 * ell * ell + (m - 2.0 * ell).powi(2)) / h
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) || a == b
}
