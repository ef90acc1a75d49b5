//! Three-point quadrature rules `Q(lambda, mu)` with certified a-priori error
//! bounds for functions whose derivative, raised to a power `q >= 1`, is
//! convex in absolute value.
//!
//! * [`expr`]: the expression language every function is written in, with
//!   symbolic differentiation and domain checks.
//! * [`oracle`]: adaptive Gauss-Kronrod quadrature used as the reference.
//! * [`rules`]: the rule family, named members and the kernel identities.
//! * [`bounds`]: the `q = 1` and Hölder bounds and their optimisers.
//! * [`convexity`]: sampled certificates for the convexity hypothesis.
//! * [`means`]: the bounds applied to special means.
//! * [`report`], [`campaign`]: evaluated instances, randomised verification
//!   and parameter sweeps.

pub mod bounds;
pub mod campaign;
pub mod convexity;
pub mod expr;
pub mod means;
pub mod oracle;
pub mod report;
pub mod rules;
mod search;

use thiserror::Error;

pub use bounds::{BoundError, BoundMode, DerivEndpoints, HolderParams};
pub use convexity::{ConvexityCertificate, ConvexityError};
pub use expr::{EvalError, Expr, ParseError};
pub use means::{MeanKind, MeansError, MeansTheorem};
pub use oracle::{Interval, IntervalError, OracleError};
pub use report::{BoundReport, BoundRequest, RuleSpec};
pub use rules::{LmRule, NamedRule, RuleError, RuleParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid interval: {0}")]
    Interval(#[from] IntervalError),
    #[error("quadrature error: {0}")]
    Oracle(#[from] OracleError),
    #[error("rule error: {0}")]
    Rule(#[from] RuleError),
    #[error("bound error: {0}")]
    Bound(#[from] BoundError),
    #[error("convexity error: {0}")]
    Convexity(#[from] ConvexityError),
    #[error("means error: {0}")]
    Means(#[from] MeansError),
    #[error("generator exhausted at trial {trial}: no admissible instance in {redraws} draws")]
    GeneratorExhausted { trial: usize, redraws: usize },
    #[error("{0}")]
    Config(String),
}
