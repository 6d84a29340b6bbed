//! Convergence order, asymptotic error constants and Taylor coefficients.

use thiserror::Error;

use crate::mp::Scalar;
use crate::problems::{EvalError, Function};
use crate::solvers::{IterationTrace, MethodId, Status};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no three consecutive iterates with distinct nonzero errors; COC is undefined")]
    UndefinedCoc,
    #[error("leading Taylor coefficient c1 vanishes")]
    ZeroC1,
    #[error("Taylor coefficients above order 4 are not supported (asked for {0})")]
    Unsupported(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Summary of one solve: evaluations, order estimate and step sizes.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub method: MethodId,
    pub problem: String,
    pub x0: Scalar,
    pub total_evals: u64,
    pub iterations: usize,
    /// `None` when fewer than three usable errors exist.
    pub coc: Option<Scalar>,
    pub step_sizes: Vec<Scalar>,
    pub status: Status,
}

impl ConvergenceReport {
    pub fn from_trace(trace: &IterationTrace, gamma: &Scalar) -> Self {
        Self {
            method: trace.method,
            problem: trace.problem.clone(),
            x0: trace.x0.clone(),
            total_evals: trace.evals.total(),
            iterations: trace.iterations(),
            coc: coc(trace, gamma).ok(),
            step_sizes: trace.step_sizes.clone(),
            status: trace.status,
        }
    }
}

/// Computational order of convergence from the known root `gamma`:
///
/// ```text
/// rho = ln(e(n+1) / e(n)) / ln(e(n) / e(n-1)),   e(k) = |x(k) - gamma|
/// ```
///
/// Uses the latest triple whose newest error is still resolved at working
/// precision, i.e. above `10^(-digits+16) * max(|gamma|, |x(n-1)|)`; once the
/// iteration has landed on the root the window slides back.
pub fn coc(trace: &IterationTrace, gamma: &Scalar) -> Result<Scalar, AnalysisError> {
    coc_of_iterates(&trace.iterates, gamma)
}

pub fn coc_of_iterates(iterates: &[Scalar], gamma: &Scalar) -> Result<Scalar, AnalysisError> {
    let (_, [e0, e1, e2]) = coc_window(iterates, gamma).ok_or(AnalysisError::UndefinedCoc)?;
    Ok((&e2 / &e1).ln() / (&e1 / &e0).ln())
}

/// Index `k` of the newest iterate in the window and the errors at
/// `k-2, k-1, k`.
pub fn coc_window(iterates: &[Scalar], gamma: &Scalar) -> Option<(usize, [Scalar; 3])> {
    if iterates.len() < 3 {
        return None;
    }
    let errs: Vec<Scalar> = iterates.iter().map(|x| (x - gamma).abs()).collect();
    let resolved = |k: usize| {
        let scale = gamma.abs().max(&iterates[k - 1].abs());
        let floor = gamma.ctx().noise_floor(16) * scale;
        !errs[k].is_zero() && errs[k] > floor
    };
    (2..iterates.len()).rev().find_map(|k| {
        let (e0, e1, e2) = (&errs[k - 2], &errs[k - 1], &errs[k]);
        let usable = resolved(k) && !e0.is_zero() && !e1.is_zero() && e0 != e1 && e1 != e2;
        usable.then(|| (k, [e0.clone(), e1.clone(), e2.clone()]))
    })
}

/// Fourth-order error constant `-(c3 c1 - c2²) c2 / c1³`.
pub fn error_constant_m4(c1: &Scalar, c2: &Scalar, c3: &Scalar) -> Result<Scalar, AnalysisError> {
    if c1.is_zero() {
        return Err(AnalysisError::ZeroC1);
    }
    Ok(-((c3 * c1 - c2 * c2) * c2) / c1.powi(3))
}

/// Eighth-order error constant
/// `-c2² (c3 c1³ c4 - c4 c1² c2² - c3² c1² c2 + 2 c3 c1 c2³ - c2⁵) / c1⁷`.
pub fn error_constant_m8(
    c1: &Scalar,
    c2: &Scalar,
    c3: &Scalar,
    c4: &Scalar,
) -> Result<Scalar, AnalysisError> {
    if c1.is_zero() {
        return Err(AnalysisError::ZeroC1);
    }
    let inner = c3 * c1.powi(3) * c4 - c4 * c1.powi(2) * c2.powi(2) - c3.powi(2) * c1.powi(2) * c2
        + c3 * c1 * c2.powi(3) * 2
        - c2.powi(5);
    Ok(-(c2.powi(2) * inner) / c1.powi(7))
}

/// `c(m) = f^(m)(gamma) / m!` for `m = 1..=m_max`.
///
/// `c1` and `c2` come from the analytic derivatives; `c3` and `c4` from
/// central differences of `f''` with step `10^(-digits/8)`.
pub fn taylor_coefficients<F: Function + ?Sized>(
    f: &F,
    gamma: &Scalar,
    m_max: usize,
) -> Result<Vec<Scalar>, AnalysisError> {
    if m_max > 4 {
        return Err(AnalysisError::Unsupported(m_max));
    }
    let ctx = gamma.ctx();
    let mut out = Vec::with_capacity(m_max);
    if m_max >= 1 {
        out.push(f.first_derivative(gamma)?);
    }
    if m_max >= 2 {
        out.push(f.second_derivative(gamma)? / 2);
    }
    if m_max >= 3 {
        let h = Scalar::pow10(-(ctx.digits() as i64 / 8), ctx);
        let up = f.second_derivative(&(gamma + &h))?;
        let down = f.second_derivative(&(gamma - &h))?;
        let d3 = (&up - &down) / (&h * 2);
        out.push(d3 / 6);
        if m_max >= 4 {
            let mid = f.second_derivative(gamma)?;
            let d4 = (up + down - mid * 2) / (&h * &h);
            out.push(d4 / 24);
        }
    }
    Ok(out)
}
