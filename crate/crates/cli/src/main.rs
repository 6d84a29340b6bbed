//! `bench`: run the method × problem grid and render its tables.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quadroot::analysis::coc;
use quadroot::harness::{
    emit_table1, emit_table2, run_benchmark, BenchmarkConfig, BenchmarkReport, ConfigError,
    OutputFormat,
};
use quadroot::problems::reference_root;
use quadroot::{format_scientific, solve, MethodId, Problem, ProblemId, Scalar, StoppingCriteria};

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "High-precision root-finder benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every (method, problem) cell and print the tables.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated method ids, e.g. `m8,nm`.
        #[arg(long)]
        methods: Option<String>,
        /// Comma-separated problem ids, e.g. `f1,f4`.
        #[arg(long)]
        problems: Option<String>,
        #[arg(long)]
        digits: Option<u32>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long = "max-iters")]
        max_iters: Option<usize>,
        /// markdown, csv or json.
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record the wall-clock time in the report metadata.
        #[arg(long)]
        timestamp: bool,
    },
    /// Render the evaluation/COC table from a stored json report.
    Table1 {
        report: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: String,
    },
    /// Render the M-8 step-size table from a stored json report.
    Table2 {
        report: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long, default_value_t = 2)]
        sig_digits: usize,
    },
    /// Solve one problem with one method and print the trace.
    Solve {
        method: String,
        problem: String,
        #[arg(long)]
        x0: Option<String>,
        #[arg(long, default_value_t = quadroot::mp::DEFAULT_DIGITS)]
        digits: u32,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) | Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_format(s: &str) -> Result<OutputFormat, Failure> {
    s.parse().map_err(Failure::Usage)
}

fn load_report(path: &PathBuf) -> Result<BenchmarkReport, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    BenchmarkReport::from_json(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns whether every solve converged.
fn dispatch(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Run {
            config,
            methods,
            problems,
            digits,
            epsilon,
            max_iters,
            format,
            out,
            timestamp,
        } => {
            let mut cfg = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                    BenchmarkConfig::parse(&text)?
                }
                None => BenchmarkConfig::default(),
            };
            let overrides = [
                ("methods", methods),
                ("problems", problems),
                ("digits", digits.map(|d| d.to_string())),
                ("epsilon", epsilon),
                ("max_iterations", max_iters.map(|n| n.to_string())),
                ("format", format),
            ];
            for (key, value) in overrides {
                if let Some(v) = value {
                    cfg.set(key, &v)?;
                }
            }
            for w in cfg.validate()? {
                eprintln!("warning: {w}");
            }
            let mut report = run_benchmark(&cfg)?;
            if timestamp {
                let secs = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                report.metadata.timestamp = Some(format!("{secs}"));
            }
            let text = match cfg.format {
                OutputFormat::Markdown => format!(
                    "{}\n{}",
                    emit_table1(&report, OutputFormat::Markdown),
                    emit_table2(&report, OutputFormat::Markdown, cfg.sig_digits)
                ),
                f => emit_table1(&report, f),
            };
            write_out(out.as_ref(), &text)?;
            Ok(report.all_converged())
        }
        Command::Table1 { report, format } => {
            let report = load_report(&report)?;
            print!("{}", emit_table1(&report, parse_format(&format)?));
            Ok(true)
        }
        Command::Table2 {
            report,
            format,
            sig_digits,
        } => {
            if sig_digits == 0 {
                return Err(Failure::Usage("sig-digits must be at least 1".to_owned()));
            }
            let report = load_report(&report)?;
            print!(
                "{}",
                emit_table2(&report, parse_format(&format)?, sig_digits)
            );
            Ok(true)
        }
        Command::Solve {
            method,
            problem,
            x0,
            digits,
        } => {
            let method: MethodId = method
                .parse()
                .map_err(|e: quadroot::solvers::SolveError| Failure::Usage(e.to_string()))?;
            let pid: ProblemId = problem
                .parse()
                .map_err(|e: quadroot::problems::ProblemError| Failure::Usage(e.to_string()))?;
            let mut cfg = BenchmarkConfig {
                methods: vec![method],
                problems: vec![pid],
                digits,
                ..BenchmarkConfig::default()
            };
            if let Some(x) = &x0 {
                cfg.set(&format!("x0.{pid}"), x)?;
            }
            for w in cfg.validate()? {
                eprintln!("warning: {w}");
            }
            let ctx = cfg.context()?;
            let p = Problem::new(pid);
            let start = match &x0 {
                Some(x) => Scalar::parse(x, ctx).map_err(|e| Failure::Usage(e.to_string()))?,
                None => p.default_x0(ctx),
            };
            let stop = StoppingCriteria {
                epsilon: cfg.epsilon_at(ctx)?,
                max_iterations: cfg.max_iterations,
            };
            let trace = solve(method, &p, &start, &cfg.method_params(ctx)?, &stop, ctx)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            println!(
                "method {}  problem {} ({})",
                method.label(),
                pid,
                p.description
            );
            for (n, (step, res)) in trace.step_sizes.iter().zip(&trace.residuals).enumerate() {
                println!(
                    "n={:<3} |x(n+1)-x(n)| = {:<12} |f(x(n+1))| = {}",
                    n,
                    format_scientific(step, 3).unwrap_or_default(),
                    format_scientific(res, 3).unwrap_or_default()
                );
            }
            println!("x = {:.60}", trace.last());
            let rho = reference_root(&p, ctx)
                .ok()
                .and_then(|g| coc(&trace, &g).ok())
                .map(|r| format!("{:.6}", r))
                .unwrap_or_else(|| "undefined".to_owned());
            println!(
                "status {}  iterations {}  evals {} (+{} stopping checks)  coc {}",
                trace.status,
                trace.iterations(),
                trace.evals.total(),
                trace.evals.n_check,
                rho
            );
            if let Some(note) = &trace.note {
                println!("note: {note}");
            }
            Ok(trace.converged())
        }
    }
}
