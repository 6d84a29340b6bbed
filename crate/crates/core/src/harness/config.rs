use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mp::{is_decimal_literal, PrecisionContext, Scalar, MIN_DIGITS};
use crate::problems::ProblemId;
use crate::solvers::{MethodId, MethodParams, StoppingCriteria};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0} list is empty")]
    Empty(&'static str),
    #[error("digits must be at least {MIN_DIGITS}")]
    Digits,
    #[error("epsilon must be positive")]
    Epsilon,
    #[error("max_iterations must be at least 1")]
    Iterations,
    #[error("sig_digits must be at least 1")]
    SigDigits,
    #[error("{0}")]
    Params(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?} (markdown, csv, json)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Markdown => "markdown",
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Grid definition for a benchmark run.
///
/// Numeric values are kept as decimal text until the precision is known.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub methods: Vec<MethodId>,
    pub problems: Vec<ProblemId>,
    /// Starting points overriding the per-problem defaults.
    pub x0: BTreeMap<ProblemId, String>,
    pub digits: u32,
    pub epsilon: String,
    pub max_iterations: usize,
    /// `rwb.a`, `wkl.beta`, ... ; unset keys use the method defaults.
    pub params: BTreeMap<String, String>,
    pub format: OutputFormat,
    pub sig_digits: usize,
}

pub const PARAM_KEYS: [&str; 7] = [
    "rwb.a",
    "rwb.b",
    "rwb.c",
    "wkl.alpha",
    "wkl.beta",
    "neta.a",
    "ch.beta",
];

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            methods: MethodId::TABLE_ORDER.to_vec(),
            problems: ProblemId::ALL.to_vec(),
            x0: BTreeMap::new(),
            digits: crate::mp::DEFAULT_DIGITS,
            epsilon: "1e-320".to_owned(),
            max_iterations: StoppingCriteria::DEFAULT_MAX_ITERATIONS,
            params: BTreeMap::new(),
            format: OutputFormat::Markdown,
            sig_digits: 2,
        }
    }
}

fn value_err(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_owned(),
        value: value.to_owned(),
        reason: reason.to_string(),
    }
}

fn decimal(key: &str, value: &str) -> Result<String, ConfigError> {
    if is_decimal_literal(value) {
        Ok(value.to_owned())
    } else {
        Err(value_err(key, value, "not a decimal number"))
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| value_err(key, s, e)))
        .collect()
}

impl BenchmarkConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one setting; used by the file parser and by CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "methods" => self.methods = list(key, value)?,
            "problems" => self.problems = list(key, value)?,
            "digits" => {
                self.digits = value.parse().map_err(|e| value_err(key, value, e))?;
            }
            "epsilon" => self.epsilon = decimal(key, value)?,
            "max_iterations" | "max_iters" => {
                self.max_iterations = value.parse().map_err(|e| value_err(key, value, e))?;
            }
            "format" => self.format = value.parse().map_err(|e| value_err(key, value, e))?,
            "sig_digits" => {
                self.sig_digits = value.parse().map_err(|e| value_err(key, value, e))?;
            }
            k if k.starts_with("x0.") => {
                let id: ProblemId = k[3..].parse().map_err(|e| value_err(key, value, e))?;
                self.x0.insert(id, decimal(key, value)?);
            }
            k if PARAM_KEYS.contains(&k) => {
                self.params.insert(k.to_owned(), decimal(key, value)?);
            }
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    /// Checks the config; returns warnings that do not stop a run.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        if self.methods.is_empty() {
            return Err(ConfigError::Empty("methods"));
        }
        if self.problems.is_empty() {
            return Err(ConfigError::Empty("problems"));
        }
        let ctx = self.context()?;
        let eps = self.epsilon_at(ctx)?;
        if self.max_iterations == 0 {
            return Err(ConfigError::Iterations);
        }
        if self.sig_digits == 0 {
            return Err(ConfigError::SigDigits);
        }
        let params = self.method_params(ctx)?;
        for m in &self.methods {
            params
                .validate(*m)
                .map_err(|e| ConfigError::Params(e.to_string()))?;
        }
        let mut warnings = Vec::new();
        if self.digits < 700 && eps <= Scalar::pow10(-320, ctx) {
            warnings.push(format!(
                "{} digits cannot resolve epsilon {}; use at least 700",
                self.digits, self.epsilon
            ));
        }
        Ok(warnings)
    }

    pub fn context(&self) -> Result<PrecisionContext, ConfigError> {
        PrecisionContext::new(self.digits).map_err(|_| ConfigError::Digits)
    }

    pub fn epsilon_at(&self, ctx: PrecisionContext) -> Result<Scalar, ConfigError> {
        let eps = Scalar::parse(&self.epsilon, ctx)
            .map_err(|e| value_err("epsilon", &self.epsilon, e))?;
        if eps > Scalar::zero(ctx) {
            Ok(eps)
        } else {
            Err(ConfigError::Epsilon)
        }
    }

    pub fn method_params(&self, ctx: PrecisionContext) -> Result<MethodParams, ConfigError> {
        let mut p = MethodParams::defaults(ctx);
        for (key, value) in &self.params {
            let v = Scalar::parse(value, ctx).map_err(|e| value_err(key, value, e))?;
            let slot = match key.as_str() {
                "rwb.a" => &mut p.a,
                "rwb.b" => &mut p.b,
                "rwb.c" => &mut p.c,
                "wkl.alpha" => &mut p.alpha,
                "wkl.beta" => &mut p.beta,
                "neta.a" => &mut p.a_neta,
                "ch.beta" => &mut p.beta_ch,
                other => return Err(ConfigError::UnknownKey(other.to_owned())),
            };
            *slot = v;
        }
        Ok(p)
    }

    /// Effective parameter values, defaults included, as decimal text.
    pub fn param_text(&self) -> BTreeMap<String, String> {
        let defaults = [
            ("rwb.a", "1"),
            ("rwb.b", "1"),
            ("rwb.c", "1"),
            ("wkl.alpha", "1"),
            ("wkl.beta", "1"),
            ("neta.a", "10"),
            ("ch.beta", "1"),
        ];
        defaults
            .into_iter()
            .map(|(k, v)| {
                let v = self.params.get(k).map(String::as_str).unwrap_or(v);
                (k.to_owned(), v.to_owned())
            })
            .collect()
    }
}
