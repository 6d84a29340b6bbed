use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BenchmarkConfig, ConfigError};
use crate::analysis::ConvergenceReport;
use crate::mp::{format_scientific, Scalar};
use crate::problems::{reference_root, EvalCounter, Problem, ProblemId};
use crate::solvers::{solve, MethodId, Status, StoppingCriteria};

/// Significant digits kept for values stored in a report.
pub const REPORT_DIGITS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub digits: u32,
    pub epsilon: String,
    pub max_iterations: usize,
    pub params: BTreeMap<String, String>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// One (method, problem) cell. Multiple-precision values are stored as
/// decimal strings with [`REPORT_DIGITS`] significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub method: MethodId,
    pub problem: ProblemId,
    pub x0: String,
    pub evals: u64,
    pub counter: EvalCounter,
    pub iterations: usize,
    pub coc: Option<String>,
    pub status: Status,
    pub step_sizes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CellReport {
    pub fn coc_f64(&self) -> Option<f64> {
        self.coc.as_deref().and_then(|c| c.parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: Metadata,
    pub cells: Vec<CellReport>,
}

impl BenchmarkReport {
    pub fn cell(&self, method: MethodId, problem: ProblemId) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.problem == problem)
    }

    pub fn all_converged(&self) -> bool {
        self.cells.iter().all(|c| c.status == Status::Converged)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn text(v: &Scalar) -> String {
    format_scientific(v, REPORT_DIGITS).unwrap_or_else(|_| v.to_string())
}

/// Runs every requested cell. Cells are solved in parallel; the report lists
/// them problem-major in the configured order.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport, ConfigError> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let stop = StoppingCriteria {
        epsilon: cfg.epsilon_at(ctx)?,
        max_iterations: cfg.max_iterations,
    };
    let params = cfg.method_params(ctx)?;

    let mut jobs = Vec::new();
    for &pid in &cfg.problems {
        let problem = Problem::new(pid);
        let x0_text = cfg
            .x0
            .get(&pid)
            .cloned()
            .unwrap_or_else(|| problem.default_x0.to_owned());
        let x0 = Scalar::parse(&x0_text, ctx).map_err(|e| ConfigError::Value {
            key: format!("x0.{pid}"),
            value: x0_text.clone(),
            reason: e.to_string(),
        })?;
        for &m in &cfg.methods {
            jobs.push((m, problem, x0_text.clone(), x0.clone()));
        }
    }

    // roots are cached, so resolve them once before fanning out
    for &pid in &cfg.problems {
        let _ = reference_root(&Problem::new(pid), ctx);
    }

    let cells = jobs
        .into_par_iter()
        .map(|(method, problem, x0_text, x0)| {
            let trace = solve(method, &problem, &x0, &params, &stop, ctx)
                .map_err(|e| ConfigError::Params(e.to_string()))?;
            let (coc, root_note) = match reference_root(&problem, ctx) {
                Ok(gamma) => (ConvergenceReport::from_trace(&trace, &gamma).coc, None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(CellReport {
                method,
                problem: problem.id,
                x0: x0_text,
                evals: trace.evals.total(),
                counter: trace.evals,
                iterations: trace.iterations(),
                coc: coc.as_ref().map(text),
                status: trace.status,
                step_sizes: trace.step_sizes.iter().map(text).collect(),
                note: trace.note.or(root_note),
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;

    Ok(BenchmarkReport {
        metadata: Metadata {
            digits: cfg.digits,
            epsilon: cfg.epsilon.clone(),
            max_iterations: cfg.max_iterations,
            params: cfg.param_text(),
            notes: vec![
                "evals counts f, f' and f'' evaluations inside the steps; the stopping test's f(x) is tracked separately as counter.n_check".to_owned(),
                "coc uses the latest three iterates whose newest error is above 10^(16-digits) relative to the iterate; later iterates sitting on the root are skipped".to_owned(),
                "f3 is solved for its positive root near 1.404".to_owned(),
            ],
            timestamp: None,
        },
        cells,
    })
}
