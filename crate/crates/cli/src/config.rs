//! Problem configuration files.
//!
//! ```toml
//! seed = 7
//!
//! [problem]
//! builtin = "example2"        # example1 | example2 | flat
//! obs_seed = 0                # example2 only
//! # command = ["./my-model", "--fast"]   # external model instead of builtin
//! # timeout_s = 600
//!
//! [[priors]]
//! kind = "gaussian"
//! mean = 2.0
//! std = 0.3
//!
//! [algorithm]                 # every key optional
//! n0 = 4
//! eps_re = 0.1
//!
//! [outputs]                   # every key optional
//! report = "report.json"
//! history = "history.csv"
//! samples = "samples.csv"
//! observations = "observations.csv"
//! ```
//!
//! Relative output paths resolve against `--out-dir` when given, otherwise
//! against the working directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sbalc_core::{AlcConfig, MarginalPrior, PriorSpec};

use crate::error::CliError;

pub const DEFAULT_TIMEOUT_S: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Example1,
    Example2,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs_seed: Option<u64>,
    /// Program and arguments of an external model speaking the line protocol.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsSection {
    pub report: PathBuf,
    pub history: PathBuf,
    pub samples: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observations: Option<PathBuf>,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            report: "report.json".into(),
            history: "history.csv".into(),
            samples: "samples.csv".into(),
            observations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSection,
    pub priors: Vec<MarginalPrior>,
    #[serde(default)]
    pub algorithm: AlcConfig,
    #[serde(default)]
    pub outputs: OutputsSection,
}

/// What the problem section resolves to.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemKind {
    Builtin { name: Builtin, obs_seed: u64 },
    External { command: Vec<String>, timeout_s: f64 },
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn emit(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Field-level checks beyond what the grammar enforces.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if self.seed > i64::MAX as u64 {
            return bad("seed", format!("must be <= {}", i64::MAX));
        }
        let p = &self.problem;
        match (&p.builtin, &p.command) {
            (Some(_), Some(_)) => return bad("problem", "set either `builtin` or `command`, not both".into()),
            (None, None) => return bad("problem", "one of `builtin` or `command` is required".into()),
            (Some(b), None) => {
                if p.timeout_s.is_some() {
                    return bad("problem.timeout_s", "only applies to external models".into());
                }
                if p.obs_seed.is_some() && *b != Builtin::Example2 {
                    return bad("problem.obs_seed", "only applies to example2".into());
                }
            }
            (None, Some(cmd)) => {
                if cmd.is_empty() || cmd[0].is_empty() {
                    return bad("problem.command", "must name a program".into());
                }
                if p.obs_seed.is_some() {
                    return bad("problem.obs_seed", "only applies to example2".into());
                }
                if let Some(t) = p.timeout_s {
                    if !(t.is_finite() && t > 0.0) {
                        return bad("problem.timeout_s", format!("must be > 0, got {t}"));
                    }
                }
            }
        }

        if self.priors.is_empty() {
            return bad("priors", "at least one marginal is required".into());
        }
        for (i, m) in self.priors.iter().enumerate() {
            match *m {
                MarginalPrior::Gaussian { mean, std } => {
                    if !mean.is_finite() {
                        return bad(&format!("priors[{i}].mean"), format!("must be finite, got {mean}"));
                    }
                    if !(std.is_finite() && std > 0.0) {
                        return bad(&format!("priors[{i}].std"), format!("must be > 0, got {std}"));
                    }
                }
                MarginalPrior::Uniform { lower, upper } => {
                    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                        return bad(
                            &format!("priors[{i}].upper"),
                            format!("need finite lower < upper, got [{lower}, {upper}]"),
                        );
                    }
                }
            }
        }
        if let Some(want) = self.builtin_dim() {
            if self.priors.len() != want {
                return bad("priors", format!("{:?} needs {want} marginals, got {}", p.builtin.unwrap(), self.priors.len()));
            }
        }
        self.algorithm.validate().map_err(|e| {
            let msg = e.to_string();
            CliError::Config(format!("algorithm: {}", msg.strip_prefix("invalid argument: ").unwrap_or(&msg)))
        })
    }

    fn builtin_dim(&self) -> Option<usize> {
        match self.problem.builtin? {
            Builtin::Example1 => Some(1),
            Builtin::Example2 => Some(3),
            Builtin::Flat => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.priors.len()
    }

    pub fn kind(&self) -> ProblemKind {
        match (&self.problem.builtin, &self.problem.command) {
            (Some(name), _) => ProblemKind::Builtin { name: *name, obs_seed: self.problem.obs_seed.unwrap_or(0) },
            (None, Some(command)) => ProblemKind::External {
                command: command.clone(),
                timeout_s: self.problem.timeout_s.unwrap_or(DEFAULT_TIMEOUT_S),
            },
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn prior(&self) -> PriorSpec {
        PriorSpec::new(self.priors.clone()).expect("validated")
    }

    /// Algorithm settings with the root seed applied.
    pub fn alc_config(&self) -> AlcConfig {
        AlcConfig { seed: self.seed, ..self.algorithm.clone() }
    }
}

pub fn resolve(path: &Path, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}
