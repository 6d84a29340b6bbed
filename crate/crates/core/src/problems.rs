//! Test functions with analytic derivatives and evaluation accounting.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mp::{PrecisionContext, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{what} is undefined at x = {x}")]
    Domain { what: &'static str, x: String },
    #[error("{kind:?} evaluation overflowed at x = {x}")]
    NonFinite { kind: EvalKind, x: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("unknown problem id {0:?} (expected f1..f6)")]
    UnknownId(String),
    #[error("root refinement for {0} did not converge")]
    RootRefinement(ProblemId),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A scalar function with analytic first and second derivatives.
///
/// Implementations must be pure; evaluation accounting happens in
/// [`evaluate`].
pub trait Function: Send + Sync {
    fn value(&self, x: &Scalar) -> Result<Scalar, EvalError>;
    fn first_derivative(&self, x: &Scalar) -> Result<Scalar, EvalError>;
    fn second_derivative(&self, x: &Scalar) -> Result<Scalar, EvalError>;

    fn label(&self) -> String {
        "f".to_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvalKind {
    F,
    Df,
    D2f,
}

/// Functional evaluations consumed by a solve.
///
/// `n_check` holds the driver's stopping-test evaluations of `f` at a new
/// iterate; they are tracked but kept out of [`EvalCounter::total`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounter {
    pub n_f: u64,
    pub n_df: u64,
    pub n_d2f: u64,
    pub n_check: u64,
}

impl EvalCounter {
    pub fn total(&self) -> u64 {
        self.n_f + self.n_df + self.n_d2f
    }
}

/// Evaluates `f`, `f'` or `f''` at `x` and charges exactly one evaluation.
pub fn evaluate<F: Function + ?Sized>(
    f: &F,
    kind: EvalKind,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, EvalError> {
    let v = match kind {
        EvalKind::F => {
            counter.n_f += 1;
            f.value(x)?
        }
        EvalKind::Df => {
            counter.n_df += 1;
            f.first_derivative(x)?
        }
        EvalKind::D2f => {
            counter.n_d2f += 1;
            f.second_derivative(x)?
        }
    };
    finite(v, kind, x)
}

/// Stopping-test evaluation of `f`, charged to `n_check`.
pub fn evaluate_check<F: Function + ?Sized>(
    f: &F,
    x: &Scalar,
    counter: &mut EvalCounter,
) -> Result<Scalar, EvalError> {
    counter.n_check += 1;
    finite(f.value(x)?, EvalKind::F, x)
}

fn finite(v: Scalar, kind: EvalKind, x: &Scalar) -> Result<Scalar, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite {
            kind,
            x: format!("{x:.6}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
}

impl ProblemId {
    pub const ALL: [ProblemId; 6] = [
        ProblemId::F1,
        ProblemId::F2,
        ProblemId::F3,
        ProblemId::F4,
        ProblemId::F5,
        ProblemId::F6,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemId::F1 => "f1",
            ProblemId::F2 => "f2",
            ProblemId::F3 => "f3",
            ProblemId::F4 => "f4",
            ProblemId::F5 => "f5",
            ProblemId::F6 => "f6",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ProblemError::UnknownId(s.to_owned()))
    }
}

/// One of the six benchmark equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Problem {
    pub id: ProblemId,
    /// Starting point used by the reference tables.
    pub default_x0: &'static str,
    /// Low-precision root the reference refinement starts from.
    pub root_hint: &'static str,
    pub description: &'static str,
}

impl Problem {
    pub fn new(id: ProblemId) -> Self {
        let (default_x0, root_hint, description) = match id {
            ProblemId::F1 => ("1.2", "1.365", "x^3 + 4x^2 - 10"),
            ProblemId::F2 => ("-1.0", "-1.207", "x exp(x^2) - sin^2(x) + 3cos(x) + 5"),
            ProblemId::F3 => ("1.5", "1.404", "sin^2(x) - x^2 + 1 (positive root)"),
            ProblemId::F4 => ("0.5", "0", "arctan(x)"),
            ProblemId::F5 => ("1.3", "1.414", "x^4 + sin(pi/x^2) - 5"),
            ProblemId::F6 => ("1.2", "2.0", "exp(-x^2 + x + 2) - 1"),
        };
        Self {
            id,
            default_x0,
            root_hint,
            description,
        }
    }

    pub fn all() -> Vec<Problem> {
        ProblemId::ALL.into_iter().map(Problem::new).collect()
    }

    pub fn default_x0(&self, ctx: PrecisionContext) -> Scalar {
        Scalar::parse(self.default_x0, ctx).expect("built-in starting point parses")
    }

    pub fn root_hint(&self, ctx: PrecisionContext) -> Scalar {
        Scalar::parse(self.root_hint, ctx).expect("built-in root hint parses")
    }
}

impl Function for Problem {
    fn value(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(match self.id {
            ProblemId::F1 => x.powi(3) + x.powi(2) * 4 - 10,
            ProblemId::F2 => x * (x * x).exp() - x.sin().powi(2) + x.cos() * 3 + 5,
            ProblemId::F3 => x.sin().powi(2) - x * x + 1,
            ProblemId::F4 => x.atan(),
            ProblemId::F5 => {
                let arg = f5_arg(x)?;
                x.powi(4) + arg.sin() - 5
            }
            ProblemId::F6 => f6_exp(x).exp() - 1,
        })
    }

    fn first_derivative(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(match self.id {
            ProblemId::F1 => x * x * 3 + x * 8,
            ProblemId::F2 => {
                let sq = x * x;
                sq.exp() * (&sq * 2 + 1) - (x * 2).sin() - x.sin() * 3
            }
            ProblemId::F3 => (x * 2).sin() - x * 2,
            ProblemId::F4 => (x * x + 1).recip(),
            ProblemId::F5 => {
                let arg = f5_arg(x)?;
                let pi = Scalar::pi(x.ctx());
                x.powi(3) * 4 - pi * 2 * arg.cos() / x.powi(3)
            }
            ProblemId::F6 => (x * -2 + 1) * f6_exp(x).exp(),
        })
    }

    fn second_derivative(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(match self.id {
            ProblemId::F1 => x * 6 + 8,
            ProblemId::F2 => {
                let sq = x * x;
                sq.exp() * (x * 6 + x.powi(3) * 4) - (x * 2).cos() * 2 - x.cos() * 3
            }
            ProblemId::F3 => (x * 2).cos() * 2 - 2,
            ProblemId::F4 => x * -2 / (x * x + 1).powi(2),
            ProblemId::F5 => {
                let arg = f5_arg(x)?;
                let pi = Scalar::pi(x.ctx());
                x * x * 12 + &pi * 6 * arg.cos() / x.powi(4)
                    - pi.powi(2) * 4 * arg.sin() / x.powi(6)
            }
            ProblemId::F6 => ((x * -2 + 1).powi(2) - 2) * f6_exp(x).exp(),
        })
    }

    fn label(&self) -> String {
        self.id.to_string()
    }
}

fn f5_arg(x: &Scalar) -> Result<Scalar, EvalError> {
    if x.is_zero() {
        return Err(EvalError::Domain {
            what: "sin(pi/x^2)",
            x: "0".to_owned(),
        });
    }
    Ok(Scalar::pi(x.ctx()) / (x * x))
}

fn f6_exp(x: &Scalar) -> Scalar {
    -(x * x) + x + 2
}

/// Polynomial `sum coeffs[k] t^k`, used for exactness checks and fixtures
/// with known Taylor data.
#[derive(Debug, Clone)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl Polynomial {
    /// Coefficients in ascending degree.
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64], ctx: PrecisionContext) -> Self {
        Self::new(coeffs.iter().map(|&c| Scalar::from_i64(c, ctx)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as i64)
            .collect();
        Polynomial { coeffs }
    }

    fn horner(&self, x: &Scalar) -> Scalar {
        self.coeffs
            .iter()
            .rev()
            .fold(Scalar::zero(x.ctx()), |acc, c| acc * x + c)
    }
}

impl Function for Polynomial {
    fn value(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(self.horner(x))
    }

    fn first_derivative(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(self.derivative().horner(x))
    }

    fn second_derivative(&self, x: &Scalar) -> Result<Scalar, EvalError> {
        Ok(self.derivative().derivative().horner(x))
    }

    fn label(&self) -> String {
        format!("poly(deg {})", self.degree())
    }
}

fn root_cache() -> &'static Mutex<HashMap<(ProblemId, u32), Scalar>> {
    static CACHE: OnceLock<Mutex<HashMap<(ProblemId, u32), Scalar>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The root each problem converges to from its default start, at `ctx`
/// precision. Results are cached per (problem, digits).
///
/// F4, F5 and F6 have closed forms (0, sqrt 2, 2). The others are refined by
/// Newton's method at twice the working precision.
pub fn reference_root(p: &Problem, ctx: PrecisionContext) -> Result<Scalar, ProblemError> {
    let key = (p.id, ctx.digits());
    if let Some(hit) = root_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let root = match p.id {
        ProblemId::F4 => Scalar::zero(ctx),
        ProblemId::F5 => Scalar::from_i64(2, ctx).sqrt(),
        ProblemId::F6 => Scalar::from_i64(2, ctx),
        _ => refine_root(p, ctx)?,
    };
    let residual = p.value(&root)?.abs();
    if !(residual < ctx.noise_floor(16)) {
        return Err(ProblemError::RootRefinement(p.id));
    }
    root_cache().lock().unwrap().insert(key, root.clone());
    Ok(root)
}

fn refine_root(p: &Problem, ctx: PrecisionContext) -> Result<Scalar, ProblemError> {
    let wide = ctx.scaled(2);
    let tol = Scalar::pow10(-(ctx.digits() as i64) - 10, wide);
    let mut x = p.root_hint(wide);
    for _ in 0..200 {
        let step = p.value(&x)? / p.first_derivative(&x)?;
        if !step.is_finite() {
            break;
        }
        x = &x - &step;
        if step.abs() < tol {
            return Ok(x.with_ctx(ctx));
        }
    }
    Err(ProblemError::RootRefinement(p.id))
}
