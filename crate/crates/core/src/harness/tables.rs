use std::fmt::Write;

use serde_json::{Map, Value};

use super::config::OutputFormat;
use super::report::{BenchmarkReport, CellReport, REPORT_DIGITS};
use crate::mp::{format_scientific_with, DigitRounding, PrecisionContext, Scalar};
use crate::problems::ProblemId;
use crate::solvers::{MethodId, Status};

/// Marks a Table 2 row past the end of a column's iteration.
pub const TABLE2_PLACEHOLDER: &str = "***********";

/// Nearest integer when within 0.1 of one, otherwise one decimal.
pub fn format_coc(rho: f64) -> String {
    let r = rho.round();
    if (rho - r).abs() < 0.1 {
        format!("{r:.0}")
    } else {
        format!("{rho:.1}")
    }
}

fn problems_in(report: &BenchmarkReport) -> Vec<ProblemId> {
    let mut out: Vec<ProblemId> = Vec::new();
    for c in &report.cells {
        if !out.contains(&c.problem) {
            out.push(c.problem);
        }
    }
    out
}

fn methods_in(report: &BenchmarkReport) -> Vec<MethodId> {
    MethodId::TABLE_ORDER
        .into_iter()
        .filter(|m| report.cells.iter().any(|c| c.method == *m))
        .collect()
}

fn table1_cell(c: &CellReport) -> String {
    let rho = c
        .coc_f64()
        .map(format_coc)
        .unwrap_or_else(|| "-".to_owned());
    let mut s = format!("({}, {})", c.evals, rho);
    if c.status != Status::Converged {
        write!(s, " {}", c.status).unwrap();
    }
    s
}

/// Evaluation counts and COC, problems by methods.
///
/// Markdown cells read `(N, rho)`; csv has one line per cell with the
/// full-precision COC; json is the report itself.
pub fn emit_table1(report: &BenchmarkReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => {
            let mut out = String::from("method,problem,x0,evals,coc,iterations,status\n");
            for c in &report.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    c.method,
                    c.problem,
                    c.x0,
                    c.evals,
                    c.coc.as_deref().unwrap_or(""),
                    c.iterations,
                    c.status
                )
                .unwrap();
            }
            out
        }
        OutputFormat::Markdown => {
            let methods = methods_in(report);
            let mut out = String::from("| f(x) | x0 |");
            for m in &methods {
                write!(out, " {} |", m.label()).unwrap();
            }
            out.push_str("\n|---|---|");
            for _ in &methods {
                out.push_str("---|");
            }
            out.push('\n');
            for p in problems_in(report) {
                let x0 = report
                    .cells
                    .iter()
                    .find(|c| c.problem == p)
                    .map(|c| c.x0.as_str())
                    .unwrap_or("");
                write!(out, "| {p} | {x0} |").unwrap();
                for m in &methods {
                    let cell = report.cell(*m, p).map(table1_cell);
                    write!(out, " {} |", cell.as_deref().unwrap_or("")).unwrap();
                }
                out.push('\n');
            }
            out
        }
    }
}

/// M-8 step sizes truncated to `sig_digits` significant digits, one column
/// per problem. The first row is `|x1 - x0|`.
pub fn table2_columns(
    report: &BenchmarkReport,
    sig_digits: usize,
) -> Vec<(ProblemId, Vec<String>)> {
    let ctx = PrecisionContext::new(REPORT_DIGITS as u32 + 64).expect("above minimum");
    problems_in(report)
        .into_iter()
        .filter_map(|p| {
            let cell = report.cell(MethodId::M8, p)?;
            let col = cell
                .step_sizes
                .iter()
                .map(|s| match Scalar::parse(s, ctx) {
                    Ok(v) => format_scientific_with(&v, sig_digits, DigitRounding::TowardZero)
                        .unwrap_or_else(|_| s.clone()),
                    Err(_) => s.clone(),
                })
                .collect();
            Some((p, col))
        })
        .collect()
}

pub fn emit_table2(report: &BenchmarkReport, format: OutputFormat, sig_digits: usize) -> String {
    let cols = table2_columns(report, sig_digits);
    let depth = cols.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let row = |i: usize| -> Vec<&str> {
        cols.iter()
            .map(|(_, c)| c.get(i).map(String::as_str).unwrap_or(TABLE2_PLACEHOLDER))
            .collect()
    };
    match format {
        OutputFormat::Json => {
            let map: Map<String, Value> = cols
                .iter()
                .map(|(p, c)| (p.to_string(), Value::from(c.clone())))
                .collect();
            let mut out = serde_json::to_string_pretty(&Value::Object(map)).expect("serializes");
            out.push('\n');
            out
        }
        OutputFormat::Csv => {
            let header: Vec<String> = cols.iter().map(|(p, _)| p.to_string()).collect();
            let mut out = format!("{}\n", header.join(","));
            for i in 0..depth {
                writeln!(out, "{}", row(i).join(",")).unwrap();
            }
            out
        }
        OutputFormat::Markdown => {
            let mut out = String::from("|");
            for (p, _) in &cols {
                write!(out, " {p} |").unwrap();
            }
            out.push_str("\n|");
            for _ in &cols {
                out.push_str("---|");
            }
            out.push('\n');
            for i in 0..depth {
                writeln!(out, "| {} |", row(i).join(" | ")).unwrap();
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::report::Metadata;
    use crate::problems::EvalCounter;

    fn cell(
        method: MethodId,
        problem: ProblemId,
        evals: u64,
        coc: &str,
        steps: &[&str],
    ) -> CellReport {
        CellReport {
            method,
            problem,
            x0: "1.2".to_owned(),
            evals,
            counter: EvalCounter::default(),
            iterations: steps.len(),
            coc: Some(coc.to_owned()),
            status: Status::Converged,
            step_sizes: steps.iter().map(|s| s.to_string()).collect(),
            note: None,
        }
    }

    fn report(cells: Vec<CellReport>) -> BenchmarkReport {
        BenchmarkReport {
            metadata: Metadata {
                digits: 2048,
                epsilon: "1e-320".to_owned(),
                max_iterations: 100,
                params: Default::default(),
                notes: vec![],
                timestamp: None,
            },
            cells,
        }
    }

    #[test]
    fn coc_display_rule() {
        assert_eq!(format_coc(8.02), "8");
        assert_eq!(format_coc(7.93), "8");
        assert_eq!(format_coc(15.52), "15.5");
        assert_eq!(format_coc(15.84), "15.8");
        assert_eq!(format_coc(2.9), "2.9");
    }

    #[test]
    fn markdown_table1() {
        let r = report(vec![
            cell(MethodId::M8, ProblemId::F1, 16, "8.0001", &[]),
            cell(MethodId::Lmm, ProblemId::F1, 24, "15.52", &[]),
        ]);
        let md = emit_table1(&r, OutputFormat::Markdown);
        assert_eq!(
            md,
            "| f(x) | x0 | LMM | M-8 |\n|---|---|---|---|\n| f1 | 1.2 | (24, 15.5) | (16, 8) |\n"
        );
    }

    #[test]
    fn empty_report_gives_header_only() {
        let r = report(vec![]);
        assert_eq!(
            emit_table1(&r, OutputFormat::Markdown),
            "| f(x) | x0 |\n|---|---|\n"
        );
        assert_eq!(
            emit_table1(&r, OutputFormat::Csv),
            "method,problem,x0,evals,coc,iterations,status\n"
        );
    }

    #[test]
    fn csv_table1_keeps_full_coc() {
        let r = report(vec![cell(
            MethodId::Nm,
            ProblemId::F4,
            18,
            "2.000000000001",
            &[],
        )]);
        assert_eq!(
            emit_table1(&r, OutputFormat::Csv).lines().nth(1).unwrap(),
            "nm,f4,1.2,18,2.000000000001,0,converged"
        );
    }

    #[test]
    fn table2_truncates_and_pads() {
        let r = report(vec![
            cell(
                MethodId::M8,
                ProblemId::F1,
                16,
                "8",
                &["1.659e-1", "3.38e-9", "6.48e-71", "1.18e-564"],
            ),
            cell(
                MethodId::M8,
                ProblemId::F6,
                20,
                "8",
                &["7.99e-1", "8.68e-4", "2.98e-25", "5.88e-197", "1.34e-1570"],
            ),
            cell(MethodId::Nm, ProblemId::F6, 20, "2", &["9e-1"]),
        ]);
        let md = emit_table2(&r, OutputFormat::Markdown, 2);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "| f1 | f6 |");
        assert_eq!(lines[2], "| 1.6e-1 | 7.9e-1 |");
        assert_eq!(lines[6], "| *********** | 1.3e-1570 |");
        let csv = emit_table2(&r, OutputFormat::Csv, 2);
        assert_eq!(csv.lines().count(), 6);
    }
}
