//! A small single-variable expression language.
//!
//! Every function handed to the rest of the crate is an [`Expr`], so its
//! first derivative is available symbolically and can be evaluated, sampled
//! and certified without trusting user-supplied callbacks.
//!
//! Grammar (whitespace is insignificant, `x` is the only variable):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ['^' number]
//! atom   := number | 'x' | '(' expr ')' | ('ln' | 'exp' | 'abs') '(' expr ')'
//! number := decimal literal with optional sign and exponent
//! ```
//!
//! As a convenience a leading `-` in front of a non-numeric atom is read as
//! multiplication by `-1`, and a parenthesised constant expression is
//! accepted as an exponent (`x^(1/3)`) and folded to a literal.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::oracle::Interval;

/// Parsed expression tree. Exponents of [`Expr::Pow`] are always literals.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
    Abs(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable exponent at byte {offset}: exponents must be numeric literals")]
    VariableExponent { offset: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("ln of non-positive value {arg} at x = {x}")]
    LogDomain { x: f64, arg: f64 },
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("{base}^{exponent} is undefined at x = {x}")]
    PowDomain { x: f64, base: f64, exponent: f64 },
    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        if p.at_end() {
            return Err(p.syntax("empty expression"));
        }
        let e = p.expr()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(p.syntax("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Add(l, r) => l.eval(x)? + r.eval(x)?,
            Expr::Sub(l, r) => l.eval(x)? - r.eval(x)?,
            Expr::Mul(l, r) => l.eval(x)? * r.eval(x)?,
            Expr::Div(l, r) => {
                let num = l.eval(x)?;
                let den = r.eval(x)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero { x });
                }
                num / den
            }
            Expr::Pow(base, exponent) => {
                let b = base.eval(x)?;
                if !pow_defined(b, *exponent) {
                    return Err(EvalError::PowDomain {
                        x,
                        base: b,
                        exponent: *exponent,
                    });
                }
                b.powf(*exponent)
            }
            Expr::Ln(arg) => {
                let a = arg.eval(x)?;
                if a <= 0.0 {
                    return Err(EvalError::LogDomain { x, arg: a });
                }
                a.ln()
            }
            Expr::Exp(arg) => arg.eval(x)?.exp(),
            Expr::Abs(arg) => arg.eval(x)?.abs(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x })
        }
    }

    /// Exact symbolic first derivative, lightly simplified.
    ///
    /// `abs(u)` differentiates to `u / abs(u) * u'`, which is only defined
    /// where `u != 0`; see [`Expr::is_kink`].
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::X => Expr::Const(1.0),
            Expr::Add(l, r) => add(l.differentiate(), r.differentiate()),
            Expr::Sub(l, r) => sub(l.differentiate(), r.differentiate()),
            Expr::Mul(l, r) => add(
                mul(l.differentiate(), (**r).clone()),
                mul((**l).clone(), r.differentiate()),
            ),
            Expr::Div(l, r) => div(
                sub(
                    mul(l.differentiate(), (**r).clone()),
                    mul((**l).clone(), r.differentiate()),
                ),
                pow((**r).clone(), 2.0),
            ),
            Expr::Pow(base, exponent) => {
                if *exponent == 0.0 {
                    return Expr::Const(0.0);
                }
                mul(
                    mul(Expr::Const(*exponent), pow((**base).clone(), exponent - 1.0)),
                    base.differentiate(),
                )
            }
            Expr::Ln(arg) => div(arg.differentiate(), (**arg).clone()),
            Expr::Exp(arg) => mul(self.clone(), arg.differentiate()),
            Expr::Abs(arg) => mul(
                div((**arg).clone(), self.clone()),
                arg.differentiate(),
            ),
        }
    }

    /// True when some `abs` node has a zero argument at `x`, i.e. the
    /// expression is not differentiable there.
    pub fn is_kink(&self, x: f64) -> bool {
        let mut found = false;
        self.visit(&mut |node| {
            if let Expr::Abs(arg) = node {
                if matches!(arg.eval(x), Ok(v) if v == 0.0) {
                    found = true;
                }
            }
        });
        found
    }

    pub fn contains_x(&self) -> bool {
        let mut found = false;
        self.visit(&mut |node| found |= matches!(node, Expr::X));
        found
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::X => {}
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Pow(a, _) | Expr::Ln(a) | Expr::Exp(a) | Expr::Abs(a) => a.visit(f),
        }
    }

    /// Check that every sub-expression is defined on all of `interval`.
    pub fn domain_check(&self, interval: Interval) -> DomainReport {
        let mut report = DomainReport::default();
        let grid = sample_grid(interval, DOMAIN_SAMPLES);
        check_node(self, interval, &grid, &mut report);
        report
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

fn pow_defined(base: f64, exponent: f64) -> bool {
    if base < 0.0 && exponent.fract() != 0.0 {
        return false;
    }
    !(base == 0.0 && exponent < 0.0)
}

// Simplifying constructors used by `differentiate`; the parser never
// simplifies so that printing round-trips structurally.

fn add(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
        (Expr::Const(z), _) if *z == 0.0 => r,
        (_, Expr::Const(z)) if *z == 0.0 => l,
        _ => Expr::Add(Box::new(l), Box::new(r)),
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a - b),
        (_, Expr::Const(z)) if *z == 0.0 => l,
        _ => Expr::Sub(Box::new(l), Box::new(r)),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
        (Expr::Const(z), _) | (_, Expr::Const(z)) if *z == 0.0 => Expr::Const(0.0),
        (Expr::Const(o), _) if *o == 1.0 => r,
        (_, Expr::Const(o)) if *o == 1.0 => l,
        _ => Expr::Mul(Box::new(l), Box::new(r)),
    }
}

fn div(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        (Expr::Const(z), _) if *z == 0.0 => Expr::Const(0.0),
        (_, Expr::Const(o)) if *o == 1.0 => l,
        _ => Expr::Div(Box::new(l), Box::new(r)),
    }
}

fn pow(base: Expr, exponent: f64) -> Expr {
    if exponent == 1.0 {
        base
    } else if exponent == 0.0 {
        Expr::Const(1.0)
    } else {
        Expr::Pow(Box::new(base), exponent)
    }
}

/// Fully parenthesised printing; `Expr::parse(&e.to_string())` reproduces
/// `e` exactly.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X => write!(f, "x"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(base, e) => match **base {
                Expr::Pow(..) => write!(f, "({base})^{e}"),
                _ => write!(f, "{base}^{e}"),
            },
            Expr::Ln(a) => write!(f, "ln({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Abs(a) => write!(f, "abs({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let base = if self.peek() == Some(b'-') && !self.number_follows() {
            // `-atom` for non-numeric atoms
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::Mul(Box::new(Expr::Const(-1.0)), Box::new(inner)));
        } else {
            self.atom()?
        };
        self.skip_ws();
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        let exponent = if self.number_follows() {
            self.number()?
        } else {
            let e = match self.peek() {
                Some(b'-') => {
                    self.pos += 1;
                    let a = self.atom()?;
                    Expr::Mul(Box::new(Expr::Const(-1.0)), Box::new(a))
                }
                _ => self.atom()?,
            };
            if e.contains_x() {
                return Err(ParseError::VariableExponent { offset: start });
            }
            e.eval(0.0).map_err(|err| ParseError::Syntax {
                offset: start,
                message: format!("exponent is not a finite constant: {err}"),
            })?
        };
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    /// Whether a (possibly signed) numeric literal starts here.
    fn number_follows(&self) -> bool {
        let mut i = self.pos;
        if matches!(self.src.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        match self.src.get(i) {
            Some(c) if c.is_ascii_digit() => true,
            Some(b'.') => matches!(self.src.get(i + 1), Some(c) if c.is_ascii_digit()),
            _ => false,
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mut j = self.pos + 1;
            if matches!(self.src.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            if matches!(self.src.get(j), Some(c) if c.is_ascii_digit()) {
                self.pos = j;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ParseError::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.number_follows() {
            return Ok(Expr::Const(self.number()?));
        }
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
                let wrap: fn(Box<Expr>) -> Expr = match name {
                    "x" => return Ok(Expr::X),
                    "ln" => Expr::Ln,
                    "exp" => Expr::Exp,
                    "abs" => Expr::Abs,
                    _ => {
                        return Err(ParseError::UnknownIdentifier {
                            name: name.to_string(),
                            offset: start,
                        })
                    }
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(wrap(Box::new(arg)))
            }
            Some(_) => Err(self.syntax("expected a number, `x`, `(` or a function name")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}

// ---------------------------------------------------------------------------
// Domain checking

const DOMAIN_SAMPLES: usize = 4097;

#[derive(Debug, Clone, PartialEq)]
pub struct DomainViolation {
    /// Printed form of the offending sub-expression.
    pub node: String,
    pub reason: String,
    /// A point of the interval where the sub-expression is undefined.
    pub witness: f64,
}

/// Result of [`Expr::domain_check`].
///
/// `unproven` lists nodes whose safety could not be established by interval
/// enclosure and rests on dense sampling only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainReport {
    pub violations: Vec<DomainViolation>,
    pub unproven: Vec<String>,
}

impl DomainReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for DomainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} ({}, e.g. x = {})", v.node, v.reason, v.witness)?;
        }
        Ok(())
    }
}

fn sample_grid(interval: Interval, n: usize) -> Vec<f64> {
    let (a, b) = (interval.a(), interval.b());
    let mut pts: Vec<f64> = (0..n)
        .map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64))
        .collect();
    pts[n - 1] = b;
    pts
}

/// Closed range `[lo, hi]` enclosing the values of a sub-expression.
#[derive(Debug, Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn checked(lo: f64, hi: f64) -> Option<Range> {
        (lo.is_finite() && hi.is_finite() && lo <= hi).then_some(Range { lo, hi })
    }

    fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }
}

fn min_max(vals: &[f64]) -> Option<Range> {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if vals.iter().any(|v| v.is_nan()) {
        return None;
    }
    Range::checked(lo, hi)
}

/// Natural interval extension. `None` means the enclosure is unknown or
/// the node may be undefined somewhere on the interval.
fn enclose(e: &Expr, iv: Interval) -> Option<Range> {
    match e {
        Expr::Const(c) => Range::checked(*c, *c),
        Expr::X => Range::checked(iv.a(), iv.b()),
        Expr::Add(l, r) => {
            let (l, r) = (enclose(l, iv)?, enclose(r, iv)?);
            Range::checked(l.lo + r.lo, l.hi + r.hi)
        }
        Expr::Sub(l, r) => {
            let (l, r) = (enclose(l, iv)?, enclose(r, iv)?);
            Range::checked(l.lo - r.hi, l.hi - r.lo)
        }
        Expr::Mul(l, r) => {
            let (l, r) = (enclose(l, iv)?, enclose(r, iv)?);
            min_max(&[l.lo * r.lo, l.lo * r.hi, l.hi * r.lo, l.hi * r.hi])
        }
        Expr::Div(l, r) => {
            let (l, r) = (enclose(l, iv)?, enclose(r, iv)?);
            if r.contains_zero() {
                return None;
            }
            min_max(&[l.lo / r.lo, l.lo / r.hi, l.hi / r.lo, l.hi / r.hi])
        }
        Expr::Pow(base, p) => {
            let r = enclose(base, iv)?;
            if !pow_safe_on(r, *p) {
                return None;
            }
            let mut vals = vec![r.lo.powf(*p), r.hi.powf(*p)];
            if r.contains_zero() && *p > 0.0 {
                vals.push(0.0);
            }
            min_max(&vals)
        }
        Expr::Ln(a) => {
            let r = enclose(a, iv)?;
            (r.lo > 0.0).then(|| Range::checked(r.lo.ln(), r.hi.ln()))?
        }
        Expr::Exp(a) => {
            let r = enclose(a, iv)?;
            Range::checked(r.lo.exp(), r.hi.exp())
        }
        Expr::Abs(a) => {
            let r = enclose(a, iv)?;
            if r.contains_zero() {
                Range::checked(0.0, r.lo.abs().max(r.hi.abs()))
            } else {
                let (x, y) = (r.lo.abs(), r.hi.abs());
                Range::checked(x.min(y), x.max(y))
            }
        }
    }
}

fn pow_safe_on(r: Range, p: f64) -> bool {
    if p.fract() != 0.0 && r.lo < 0.0 {
        return false;
    }
    !(p < 0.0 && r.contains_zero())
}

fn check_node(e: &Expr, iv: Interval, grid: &[f64], report: &mut DomainReport) {
    // Children first so the innermost failing node is reported once.
    let before = report.violations.len();
    match e {
        Expr::Const(_) | Expr::X => return,
        Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
            check_node(l, iv, grid, report);
            check_node(r, iv, grid, report);
        }
        Expr::Pow(a, _) | Expr::Ln(a) | Expr::Exp(a) | Expr::Abs(a) => {
            check_node(a, iv, grid, report)
        }
    }
    if report.violations.len() > before {
        return;
    }
    let restricted = matches!(e, Expr::Div(..) | Expr::Pow(..) | Expr::Ln(..) | Expr::Exp(..));
    if !restricted || enclose(e, iv).is_some() {
        return;
    }
    // Enclosure inconclusive: look for a concrete failing point.
    for &x in grid {
        if let Err(err) = e.eval(x) {
            let reason = match err {
                EvalError::LogDomain { .. } => "ln needs a positive argument",
                EvalError::DivisionByZero { .. } => "division by zero",
                EvalError::PowDomain { .. } => {
                    "negative base with non-integer exponent or zero base with negative exponent"
                }
                EvalError::NonFinite { .. } => "overflow",
            };
            report.violations.push(DomainViolation {
                node: e.to_string(),
                reason: reason.to_string(),
                witness: x,
            });
            return;
        }
    }
    report.unproven.push(e.to_string());
}
