//! Iterative methods and the solve driver.

mod steps;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use steps::{
    step_ch, step_cm, step_hm, step_lmm, step_m4, step_m8, step_neta, step_nm, step_rwb, step_wkl,
};

use crate::mp::{PrecisionContext, Scalar};
use crate::problems::{evaluate_check, EvalCounter, EvalError, Function};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("degenerate step: {0}")]
    Degenerate(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("unknown method id {0:?}")]
    UnknownMethod(String),
    #[error("invalid parameters for {method}: {reason}")]
    InvalidParams {
        method: MethodId,
        reason: &'static str,
    },
    #[error("starting point must be finite")]
    NonFiniteStart,
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodId {
    Nm,
    M4,
    M8,
    Lmm,
    Rwb,
    Wkl,
    Neta,
    Ch,
    Hm,
    Cm,
}

impl MethodId {
    pub const ALL: [MethodId; 10] = [
        MethodId::Nm,
        MethodId::M4,
        MethodId::M8,
        MethodId::Lmm,
        MethodId::Rwb,
        MethodId::Wkl,
        MethodId::Neta,
        MethodId::Ch,
        MethodId::Hm,
        MethodId::Cm,
    ];

    /// Column order of the comparison table.
    pub const TABLE_ORDER: [MethodId; 10] = [
        MethodId::Hm,
        MethodId::Cm,
        MethodId::Lmm,
        MethodId::Nm,
        MethodId::Rwb,
        MethodId::Neta,
        MethodId::Ch,
        MethodId::Wkl,
        MethodId::M4,
        MethodId::M8,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodId::Nm => "nm",
            MethodId::M4 => "m4",
            MethodId::M8 => "m8",
            MethodId::Lmm => "lmm",
            MethodId::Rwb => "rwb",
            MethodId::Wkl => "wkl",
            MethodId::Neta => "neta",
            MethodId::Ch => "ch",
            MethodId::Hm => "hm",
            MethodId::Cm => "cm",
        }
    }

    /// Display label used in table headers.
    pub fn label(&self) -> &'static str {
        match self {
            MethodId::Nm => "NM",
            MethodId::M4 => "M-4",
            MethodId::M8 => "M-8",
            MethodId::Lmm => "LMM",
            MethodId::Rwb => "RWB",
            MethodId::Wkl => "WKL",
            MethodId::Neta => "NETA",
            MethodId::Ch => "CH",
            MethodId::Hm => "HM",
            MethodId::Cm => "CM",
        }
    }

    /// Functional evaluations per iteration.
    pub fn cost(&self) -> u64 {
        match self {
            MethodId::Nm => 2,
            MethodId::M4 | MethodId::Hm | MethodId::Cm => 3,
            MethodId::M8 | MethodId::Rwb | MethodId::Wkl | MethodId::Neta | MethodId::Ch => 4,
            MethodId::Lmm => 6,
        }
    }

    /// Theoretical order of convergence at a simple root.
    pub fn order(&self) -> u32 {
        match self {
            MethodId::Nm => 2,
            MethodId::Hm | MethodId::Cm => 3,
            MethodId::M4 => 4,
            MethodId::Rwb | MethodId::Wkl | MethodId::Neta | MethodId::Ch => 6,
            MethodId::M8 => 8,
            MethodId::Lmm => 16,
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "");
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| SolveError::UnknownMethod(s.to_owned()))
    }
}

/// Free parameters of the comparison families.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    /// RWB third-step weights.
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    /// WKL third-step weights.
    pub alpha: Scalar,
    pub beta: Scalar,
    /// NETA second-step parameter.
    pub a_neta: Scalar,
    /// CH weight `H(t) = (1 + (beta+2) t) / (1 + beta t)`.
    pub beta_ch: Scalar,
}

impl MethodParams {
    /// `a = b = c = 1`, `alpha = beta = 1`, NETA `a = 10`, CH `beta = 1`.
    pub fn defaults(ctx: PrecisionContext) -> Self {
        let one = Scalar::one(ctx);
        Self {
            a: one.clone(),
            b: one.clone(),
            c: one.clone(),
            alpha: one.clone(),
            beta: one.clone(),
            a_neta: Scalar::from_i64(10, ctx),
            beta_ch: one,
        }
    }

    pub fn validate(&self, method: MethodId) -> Result<(), SolveError> {
        let bad = |reason| Err(SolveError::InvalidParams { method, reason });
        match method {
            MethodId::Rwb if self.a.is_zero() => bad("a must be nonzero"),
            MethodId::Wkl if (&self.alpha + &self.beta).is_zero() => {
                bad("alpha + beta must be nonzero")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StoppingCriteria {
    pub epsilon: Scalar,
    pub max_iterations: usize,
}

impl StoppingCriteria {
    pub const DEFAULT_EPSILON_EXP: i64 = -320;
    pub const DEFAULT_MAX_ITERATIONS: usize = 100;

    /// `epsilon = 1e-320`, at most 100 iterations.
    pub fn defaults(ctx: PrecisionContext) -> Self {
        Self {
            epsilon: Scalar::pow10(Self::DEFAULT_EPSILON_EXP, ctx),
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIterations,
    Diverged,
    DegenerateStep,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max-iterations",
            Status::Diverged => "diverged",
            Status::DegenerateStep => "degenerate-step",
        })
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "converged" => Ok(Status::Converged),
            "max-iterations" => Ok(Status::MaxIterations),
            "diverged" => Ok(Status::Diverged),
            "degenerate-step" => Ok(Status::DegenerateStep),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

/// Complete record of one solve.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub method: MethodId,
    pub problem: String,
    pub x0: Scalar,
    /// `x0, x1, ..., xN`.
    pub iterates: Vec<Scalar>,
    /// `|x(n+1) - x(n)|`, one per iteration.
    pub step_sizes: Vec<Scalar>,
    /// `|f(x(n+1))|`, one per iteration.
    pub residuals: Vec<Scalar>,
    pub evals: EvalCounter,
    pub status: Status,
    /// Why the run stopped early, for non-converged or degenerate exits.
    pub note: Option<String>,
    pub ctx: PrecisionContext,
}

impl IterationTrace {
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn last(&self) -> &Scalar {
        self.iterates.last().expect("trace holds x0")
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// One iteration of `method`.
pub fn step<F: Function + ?Sized>(
    method: MethodId,
    f: &F,
    x: &Scalar,
    params: &MethodParams,
    counter: &mut EvalCounter,
) -> Result<Scalar, StepError> {
    match method {
        MethodId::Nm => step_nm(f, x, counter),
        MethodId::M4 => step_m4(f, x, counter),
        MethodId::M8 => step_m8(f, x, counter),
        MethodId::Lmm => step_lmm(f, x, counter),
        MethodId::Rwb => step_rwb(f, x, params, counter),
        MethodId::Wkl => step_wkl(f, x, params, counter),
        MethodId::Neta => step_neta(f, x, params, counter),
        MethodId::Ch => step_ch(f, x, params, counter),
        MethodId::Hm => step_hm(f, x, counter),
        MethodId::Cm => step_cm(f, x, counter),
    }
}

/// Iterates `method` from `x0` until both `|x(n+1) - x(n)| < eps` and
/// `|f(x(n+1))| < eps`.
///
/// The residual at each new iterate costs one extra evaluation of `f`,
/// charged to `EvalCounter::n_check` and left out of the per-method total.
/// Numerical failures end the run with a status; only invalid inputs are
/// errors.
pub fn solve<F: Function + ?Sized>(
    method: MethodId,
    f: &F,
    x0: &Scalar,
    params: &MethodParams,
    stop: &StoppingCriteria,
    ctx: PrecisionContext,
) -> Result<IterationTrace, SolveError> {
    params.validate(method)?;
    if !x0.is_finite() {
        return Err(SolveError::NonFiniteStart);
    }
    if !(stop.epsilon > Scalar::zero(ctx)) {
        return Err(SolveError::NonPositiveEpsilon);
    }

    let x0 = x0.with_ctx(ctx);
    let eps = stop.epsilon.with_ctx(ctx);
    let params = MethodParams {
        a: params.a.with_ctx(ctx),
        b: params.b.with_ctx(ctx),
        c: params.c.with_ctx(ctx),
        alpha: params.alpha.with_ctx(ctx),
        beta: params.beta.with_ctx(ctx),
        a_neta: params.a_neta.with_ctx(ctx),
        beta_ch: params.beta_ch.with_ctx(ctx),
    };
    let blowup = Scalar::pow10(100, ctx);
    let mut trace = IterationTrace {
        method,
        problem: f.label(),
        x0: x0.clone(),
        iterates: vec![x0.clone()],
        step_sizes: Vec::new(),
        residuals: Vec::new(),
        evals: EvalCounter::default(),
        status: Status::MaxIterations,
        note: None,
        ctx,
    };

    let mut x = x0;
    let mut residual: Option<Scalar> = None;
    for _ in 0..stop.max_iterations {
        let next = match step(method, f, &x, &params, &mut trace.evals) {
            Ok(next) => next,
            Err(StepError::Degenerate(why)) => {
                // a degenerate step at a point already within eps of a root is
                // a successful finish
                let r = match residual.take() {
                    Some(r) => Ok(r),
                    None => evaluate_check(f, &x, &mut trace.evals).map(|v| v.abs()),
                };
                trace.status = match r {
                    Ok(r) if r < eps => Status::Converged,
                    _ => Status::DegenerateStep,
                };
                trace.note = Some(why.to_owned());
                return Ok(trace);
            }
            Err(StepError::Eval(e)) => {
                trace.status = Status::Diverged;
                trace.note = Some(e.to_string());
                return Ok(trace);
            }
        };
        if !next.is_finite() || next.abs() > blowup {
            trace.status = Status::Diverged;
            trace.note = Some("iterate left the finite range".to_owned());
            return Ok(trace);
        }
        let r = match evaluate_check(f, &next, &mut trace.evals) {
            Ok(v) => v.abs(),
            Err(e) => {
                trace.status = Status::Diverged;
                trace.note = Some(e.to_string());
                return Ok(trace);
            }
        };
        let step_size = (&next - &x).abs();
        let done = step_size < eps && r < eps;
        trace.iterates.push(next.clone());
        trace.step_sizes.push(step_size);
        trace.residuals.push(r.clone());
        if done {
            trace.status = Status::Converged;
            return Ok(trace);
        }
        x = next;
        residual = Some(r);
    }
    trace.note = Some(format!(
        "no convergence in {} iterations",
        stop.max_iterations
    ));
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{Polynomial, Problem, ProblemId};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(400).unwrap()
    }

    fn s(v: &str) -> Scalar {
        Scalar::parse(v, ctx()).unwrap()
    }

    fn stop() -> StoppingCriteria {
        StoppingCriteria {
            epsilon: s("1e-100"),
            max_iterations: 60,
        }
    }

    #[test]
    fn method_ids_parse() {
        for m in MethodId::ALL {
            assert_eq!(m.as_str().parse::<MethodId>().unwrap(), m);
        }
        assert_eq!("M-8".parse::<MethodId>().unwrap(), MethodId::M8);
        assert!("m16".parse::<MethodId>().is_err());
    }

    #[test]
    fn every_step_solves_a_linear_function_at_once() {
        // t - 2 from x = 5
        let f = Polynomial::from_i64(&[-2, 1], ctx());
        let params = MethodParams::defaults(ctx());
        for m in MethodId::ALL {
            let mut c = EvalCounter::default();
            let next = step(m, &f, &s("5"), &params, &mut c).unwrap();
            assert_eq!(next, s("2"), "{m}");
            assert_eq!(c.total(), m.cost(), "{m}");
        }
    }

    #[test]
    fn newton_halves_on_a_double_root() {
        let f = Polynomial::from_i64(&[0, 0, 1], ctx());
        let mut c = EvalCounter::default();
        assert_eq!(step_nm(&f, &s("1"), &mut c).unwrap(), s("0.5"));
        assert_eq!((c.n_f, c.n_df), (1, 1));
    }

    #[test]
    fn step_costs_match_the_method_table() {
        let p = Problem::new(ProblemId::F1);
        let params = MethodParams::defaults(ctx());
        for m in MethodId::ALL {
            let mut c = EvalCounter::default();
            step(m, &p, &s("1.2"), &params, &mut c).unwrap();
            assert_eq!(c.total(), m.cost(), "{m}");
            assert_eq!(c.n_check, 0);
            let uses_second = matches!(m, MethodId::Hm | MethodId::Cm);
            assert_eq!(c.n_d2f > 0, uses_second, "{m}");
        }
    }

    #[test]
    fn zero_derivative_is_degenerate() {
        // t^2 - 1 has f'(0) = 0
        let f = Polynomial::from_i64(&[-1, 0, 1], ctx());
        let mut c = EvalCounter::default();
        assert!(matches!(
            step_nm(&f, &s("0"), &mut c),
            Err(StepError::Degenerate(_))
        ));
        let trace = solve(
            MethodId::Nm,
            &f,
            &s("0"),
            &MethodParams::defaults(ctx()),
            &stop(),
            ctx(),
        )
        .unwrap();
        assert_eq!(trace.status, Status::DegenerateStep);
        assert_eq!(trace.iterations(), 0);
    }

    #[test]
    fn starting_on_the_root_converges_in_one_step() {
        let f = Polynomial::from_i64(&[-2, 1], ctx());
        let params = MethodParams::defaults(ctx());
        for m in MethodId::ALL {
            let t = solve(m, &f, &s("2"), &params, &stop(), ctx()).unwrap();
            assert!(t.converged(), "{m}");
            assert_eq!(t.iterations(), 1, "{m}");
        }
    }

    #[test]
    fn affine_function_is_solved_by_the_first_iteration() {
        // 7 - 3t; the second iteration only confirms the step test
        let f = Polynomial::from_i64(&[7, -3], ctx());
        let root = Scalar::ratio(7, 3, ctx());
        for m in MethodId::ALL {
            let t = solve(
                m,
                &f,
                &s("-40.25"),
                &MethodParams::defaults(ctx()),
                &stop(),
                ctx(),
            )
            .unwrap();
            assert!(t.converged(), "{m}");
            assert!((&t.iterates[1] - &root).abs() < ctx().noise_floor(4), "{m}");
            assert_eq!(t.iterations(), 2, "{m}");
            assert!(t.step_sizes[1].abs() < ctx().noise_floor(4), "{m}");
        }
    }

    #[test]
    fn trace_lengths_and_accounting() {
        let p = Problem::new(ProblemId::F1);
        let params = MethodParams::defaults(ctx());
        for m in MethodId::ALL {
            let t = solve(m, &p, &s("1.2"), &params, &stop(), ctx()).unwrap();
            assert!(t.converged(), "{m}");
            assert_eq!(t.step_sizes.len(), t.iterations());
            assert_eq!(t.residuals.len(), t.iterations());
            assert_eq!(t.evals.total(), m.cost() * t.iterations() as u64, "{m}");
            assert_eq!(t.evals.n_check, t.iterations() as u64);
        }
    }

    #[test]
    fn max_iterations_is_reported() {
        let p = Problem::new(ProblemId::F1);
        let stop = StoppingCriteria {
            epsilon: s("1e-100"),
            max_iterations: 2,
        };
        let t = solve(
            MethodId::Nm,
            &p,
            &s("1.2"),
            &MethodParams::defaults(ctx()),
            &stop,
            ctx(),
        )
        .unwrap();
        assert_eq!(t.status, Status::MaxIterations);
        assert_eq!(t.iterations(), 2);
    }

    #[test]
    fn runaway_iterates_are_diverged() {
        // Newton on arctan overshoots ever further once |x0| > 1.39
        let p = Problem::new(ProblemId::F4);
        let t = solve(
            MethodId::Nm,
            &p,
            &s("3"),
            &MethodParams::defaults(ctx()),
            &stop(),
            ctx(),
        )
        .unwrap();
        assert_eq!(t.status, Status::Diverged, "{:?}", t.note);
    }

    #[test]
    fn invalid_inputs_are_errors() {
        let p = Problem::new(ProblemId::F1);
        let mut params = MethodParams::defaults(ctx());
        params.a = Scalar::zero(ctx());
        let err = solve(MethodId::Rwb, &p, &s("1.2"), &params, &stop(), ctx()).unwrap_err();
        assert!(matches!(err, SolveError::InvalidParams { .. }));
        // a is only constrained for RWB
        assert!(solve(MethodId::Nm, &p, &s("1.2"), &params, &stop(), ctx()).is_ok());

        let mut params = MethodParams::defaults(ctx());
        params.beta = s("-1");
        assert!(solve(MethodId::Wkl, &p, &s("1.2"), &params, &stop(), ctx()).is_err());

        let nan = Scalar::zero(ctx()) / Scalar::zero(ctx());
        assert_eq!(
            solve(
                MethodId::Nm,
                &p,
                &nan,
                &MethodParams::defaults(ctx()),
                &stop(),
                ctx()
            )
            .unwrap_err(),
            SolveError::NonFiniteStart
        );
    }

    #[test]
    fn f5_domain_error_ends_the_run() {
        let p = Problem::new(ProblemId::F5);
        let t = solve(
            MethodId::Nm,
            &p,
            &s("0"),
            &MethodParams::defaults(ctx()),
            &stop(),
            ctx(),
        )
        .unwrap();
        assert_eq!(t.status, Status::Diverged);
        assert!(t.note.unwrap().contains("undefined"));
    }
}
