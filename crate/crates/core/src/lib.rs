//! Multiple-precision root finding with quadrature-based derivative estimates.

// `!(a < b)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod harness;
pub mod mp;
pub mod problems;
pub mod quadrature;
pub mod solvers;

pub use mp::{format_scientific, parse_scalar, PrecisionContext, Scalar};
pub use problems::{EvalCounter, Function, Problem, ProblemId};
pub use solvers::{solve, IterationTrace, MethodId, MethodParams, Status, StoppingCriteria};
