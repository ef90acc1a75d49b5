//! Python bindings: expressions, quadrature, bounds, optimisers, convexity
//! certificates and means. Structured reports cross the boundary as JSON.

use hermite_hadamard::bounds::{self, BoundMode, DerivEndpoints, HolderParams};
use hermite_hadamard::convexity::{self, CertifyOptions};
use hermite_hadamard::means::{self, MeanKind, MeansTheorem};
use hermite_hadamard::oracle::{self, QuadratureOptions, DEFAULT_TOL};
use hermite_hadamard::report::{self, BoundRequest, ModeChoice, RuleSpec};
use hermite_hadamard::rules;
use hermite_hadamard::{Interval, LmRule, NamedRule, RuleParams};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn interval(a: f64, b: f64) -> PyResult<Interval> {
    Interval::new(a, b).map_err(err)
}

fn mode_of(mode: &str, q: f64, p: Option<f64>) -> PyResult<BoundMode> {
    let m = match mode {
        "q1" => BoundMode::Q1,
        "p1" => BoundMode::P1 { q },
        "pq" => BoundMode::Pq { q },
        "general" => {
            let p = p.ok_or_else(|| PyValueError::new_err("mode 'general' needs p"))?;
            HolderParams::new(p, q).map_err(err)?;
            BoundMode::General { p, q }
        }
        _ => return Err(PyValueError::new_err(format!("unknown mode '{mode}' (q1, p1, pq, general)"))),
    };
    Ok(m)
}

/// A parsed expression in one variable `x`.
#[pyclass(name = "Expr", frozen)]
struct PyExpr {
    inner: hermite_hadamard::Expr,
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        let inner = hermite_hadamard::Expr::parse(source).map_err(err)?;
        Ok(PyExpr { inner })
    }

    fn eval(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(err)
    }

    fn derivative(&self) -> PyExpr {
        PyExpr { inner: self.inner.differentiate() }
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner)
    }
}

/// Integral of `f` over `[a, b]` as `(value, error_estimate)`.
#[pyfunction]
#[pyo3(signature = (f, a, b, tol = DEFAULT_TOL))]
fn integrate(f: &str, a: f64, b: f64, tol: f64) -> PyResult<(f64, f64)> {
    let i = interval(a, b)?;
    let e = report::parse_checked(f, i).map_err(err)?;
    let r = oracle::try_integrate(|x| e.eval(x), i, QuadratureOptions::with_tol(tol)).map_err(err)?;
    Ok((r.value, r.error_estimate))
}

/// `(lambda, mu)` of a named rule.
#[pyfunction]
fn named_rule(name: &str) -> PyResult<(f64, f64)> {
    let r = name.parse::<NamedRule>().map_err(err)?.rule();
    Ok((r.lambda, r.mu))
}

/// `(lambda, mu)` of the `(m, ell)` rule.
#[pyfunction]
fn lm_rule(m: f64, ell: f64) -> PyResult<(f64, f64)> {
    let r = LmRule::new(m, ell).map_err(err)?.rule();
    Ok((r.lambda, r.mu))
}

/// Rule value `Q(lambda, mu)` for `f` on `[a, b]`.
#[pyfunction]
fn rule_value(f: &str, a: f64, b: f64, lam: f64, mu: f64) -> PyResult<f64> {
    let i = interval(a, b)?;
    let e = report::parse_checked(f, i).map_err(err)?;
    RuleParams::new(lam, mu).map_err(err)?.apply(&e, i).map_err(err)
}

/// Signed deficit: rule value minus the mean of `f` over `[a, b]`.
#[pyfunction]
#[pyo3(signature = (f, a, b, lam, mu, tol = DEFAULT_TOL))]
fn deficit(f: &str, a: f64, b: f64, lam: f64, mu: f64, tol: f64) -> PyResult<f64> {
    let i = interval(a, b)?;
    let e = report::parse_checked(f, i).map_err(err)?;
    let mean = rules::mean_integral(&e, i, tol).map_err(err)?.value;
    rules::lhs_value(RuleParams::new(lam, mu).map_err(err)?, &e, i, mean).map_err(err)
}

/// Error bound for the rule `(lambda, mu)` given `|f'(a)|`, `|f'(b)|`.
#[pyfunction]
#[pyo3(signature = (lam, mu, da, db, a, b, mode = "q1", q = 1.0, p = None))]
#[allow(clippy::too_many_arguments)]
fn bound(lam: f64, mu: f64, da: f64, db: f64, a: f64, b: f64, mode: &str, q: f64, p: Option<f64>) -> PyResult<f64> {
    let d = DerivEndpoints::new(da, db).map_err(err)?;
    bounds::bound(RuleParams::new(lam, mu).map_err(err)?, mode_of(mode, q, p)?, d, interval(a, b)?).map_err(err)
}

/// Hoelder exponent minimising the general bound: `(p, rhs)`.
#[pyfunction]
fn optimize_p(lam: f64, mu: f64, q: f64, da: f64, db: f64, a: f64, b: f64) -> PyResult<(f64, f64)> {
    let d = DerivEndpoints::new(da, db).map_err(err)?;
    let opt = bounds::optimize_p(RuleParams::new(lam, mu).map_err(err)?, q, d, interval(a, b)?).map_err(err)?;
    Ok((opt.p, opt.rhs))
}

/// Rule minimising the bound: `(lambda, mu, rhs)`.
#[pyfunction]
#[pyo3(signature = (da, db, a, b, mode = "q1", q = 1.0, p = None))]
fn optimize_rule(da: f64, db: f64, a: f64, b: f64, mode: &str, q: f64, p: Option<f64>) -> PyResult<(f64, f64, f64)> {
    let d = DerivEndpoints::new(da, db).map_err(err)?;
    let opt = bounds::optimize_rule(mode_of(mode, q, p)?, d, interval(a, b)?).map_err(err)?;
    Ok((opt.rule.lambda, opt.rule.mu, opt.rhs))
}

/// Sampled convexity check of `|f'|^q` on `[a, b]`: `(valid, max_violation)`.
#[pyfunction]
#[pyo3(signature = (f, q, a, b, samples = 1024, seed = 0))]
fn certify(f: &str, q: f64, a: f64, b: f64, samples: usize, seed: u64) -> PyResult<(bool, f64)> {
    let i = interval(a, b)?;
    let fp = report::parse_checked(f, i).map_err(err)?.differentiate();
    let opts = CertifyOptions { samples, seed, ..Default::default() };
    let c = convexity::certify_derivative_power(&fp, q, i, opts).map_err(err)?;
    Ok((c.valid, c.max_violation))
}

/// Classical mean of `a, b > 0`: "A", "G", "H", "L", "I" or "Ls:<s>".
#[pyfunction]
fn mean(kind: &str, a: f64, b: f64) -> PyResult<f64> {
    means::compute_mean(kind.parse::<MeanKind>().map_err(err)?, a, b).map_err(err)
}

/// Means inequality report as JSON: gap, bound and slack.
#[pyfunction]
#[pyo3(signature = (theorem, m, ell, a, b, s = None, p = None, q = None))]
#[allow(clippy::too_many_arguments)]
fn means_report(
    theorem: &str,
    m: f64,
    ell: f64,
    a: f64,
    b: f64,
    s: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
) -> PyResult<String> {
    let t = MeansTheorem::from_id(theorem, s, p, q).map_err(err)?;
    let r = means::evaluate_means(&t, LmRule::new(m, ell).map_err(err)?, a, b).map_err(err)?;
    serde_json::to_string(&r).map_err(err)
}

/// Full bound report as JSON. Give exactly one of `rule`, `(lam, mu)` or
/// `(m, ell)`.
#[pyfunction]
#[pyo3(signature = (f, a, b, rule = None, lam = None, mu = None, m = None, ell = None, q = 1.0, p = None, mode = "auto", seed = 0))]
#[allow(clippy::too_many_arguments)]
fn evaluate_bound(
    f: &str,
    a: f64,
    b: f64,
    rule: Option<&str>,
    lam: Option<f64>,
    mu: Option<f64>,
    m: Option<f64>,
    ell: Option<f64>,
    q: f64,
    p: Option<f64>,
    mode: &str,
    seed: u64,
) -> PyResult<String> {
    let spec = match (rule, lam, mu, m, ell) {
        (Some(name), None, None, None, None) => RuleSpec::Named { name: name.parse().map_err(err)? },
        (None, Some(lambda), Some(mu), None, None) => RuleSpec::LambdaMu { lambda, mu },
        (None, None, None, Some(m), Some(ell)) => RuleSpec::Lm { m, ell },
        _ => return Err(PyValueError::new_err("give exactly one of rule, (lam, mu) or (m, ell)")),
    };
    let mut req = BoundRequest::new(f, interval(a, b)?, spec, q);
    req.p = p;
    req.mode = mode.parse::<ModeChoice>().map_err(err)?;
    req.seed = seed;
    let r = report::evaluate_bound(&req).map_err(err)?;
    serde_json::to_string(&r).map_err(err)
}

#[pymodule(name = "hermite_hadamard")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(named_rule, m)?)?;
    m.add_function(wrap_pyfunction!(lm_rule, m)?)?;
    m.add_function(wrap_pyfunction!(rule_value, m)?)?;
    m.add_function(wrap_pyfunction!(deficit, m)?)?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_p, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_rule, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(mean, m)?)?;
    m.add_function(wrap_pyfunction!(means_report, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_bound, m)?)?;
    Ok(())
}
