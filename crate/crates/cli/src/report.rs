//! Run artifacts: the JSON report and the CSV tables.
//!
//! JSON numbers use shortest round-trip formatting, with non-finite values
//! written as the strings `"inf"`, `"-inf"` and `"nan"`; CSV numbers use 17
//! significant digits. Both re-parse to the identical `f64`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sbalc_core::{RunReport, TerminationReason};

use crate::config::ProblemConfig;
use crate::error::CliError;

mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match *v {
            v if v.is_finite() => s.serialize_f64(v),
            v if v.is_nan() => s.serialize_str("nan"),
            v if v > 0.0 => s.serialize_str("inf"),
            _ => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceDoc {
    pub log_c: f64,
    pub c: f64,
    pub log_c_upper: f64,
    pub c_upper: f64,
    #[serde(with = "nonfinite")]
    pub log_c_lower: f64,
    pub c_lower: f64,
    pub cov: f64,
    #[serde(with = "nonfinite")]
    pub stopping_metric: f64,
    #[serde(with = "nonfinite")]
    pub log_expected_error_bound: f64,
    #[serde(with = "nonfinite")]
    pub expected_error_bound: f64,
    pub pool_size: usize,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDoc {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub effective_sample_size: f64,
    pub kde_bandwidths: Vec<f64>,
    pub sir_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingDoc {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<f64>,
}

/// Machine-readable run report. Contains no timing data, so identical runs
/// produce identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub version: String,
    pub termination_reason: TerminationReason,
    pub n_model_calls: usize,
    pub pool_enrichments: usize,
    pub iterations: usize,
    pub evidence: EvidenceDoc,
    pub posterior: PosteriorDoc,
    pub training: TrainingDoc,
    pub warnings: Vec<String>,
    pub config: ProblemConfig,
}

impl ReportDoc {
    pub fn new(run: &RunReport, config: &ProblemConfig) -> Self {
        let e = &run.evidence;
        let last = run.history.last().map_or(f64::NAN, |h| h.stopping_metric);
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            termination_reason: run.termination_reason,
            n_model_calls: run.n_model_calls,
            pool_enrichments: run.pool_enrichments,
            iterations: run.history.len(),
            evidence: EvidenceDoc {
                log_c: e.log_c_plugin,
                c: e.log_c_plugin.exp(),
                log_c_upper: e.log_c_upper,
                c_upper: e.log_c_upper.exp(),
                log_c_lower: e.log_c_lower,
                c_lower: e.log_c_lower.exp(),
                cov: e.cov_plugin,
                stopping_metric: last,
                log_expected_error_bound: run.log_expected_error_bound,
                expected_error_bound: run.log_expected_error_bound.exp(),
                pool_size: e.pool_size,
                b: e.b,
            },
            posterior: PosteriorDoc {
                mean: run.posterior_mean.clone(),
                std: run.posterior_std.clone(),
                effective_sample_size: run.effective_sample_size,
                kde_bandwidths: run.kde_bandwidths.clone(),
                sir_size: run.sir_samples.len(),
            },
            training: TrainingDoc { inputs: run.training_inputs.to_rows(), outputs: run.training_outputs.clone() },
            warnings: run.warnings.clone(),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("not a report: {e}")))
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let e = &self.evidence;
        let mut s = String::new();
        let _ = writeln!(s, "termination      {}", reason_name(self.termination_reason));
        let _ = writeln!(s, "model calls      {}", self.n_model_calls);
        let _ = writeln!(s, "evidence         {:.6e}  (ln = {:.6})", e.c, e.log_c);
        let _ = writeln!(s, "bounds           [{:.6e}, {:.6e}]", e.c_lower, e.c_upper);
        let _ = writeln!(s, "stopping metric  {:.4e}", e.stopping_metric);
        let _ = writeln!(s, "error bound      ln = {:.4}", e.log_expected_error_bound);
        let _ = writeln!(s, "estimator CoV    {:.4}  (pool {}, {} enrichments)", e.cov, e.pool_size, self.pool_enrichments);
        let _ = writeln!(s, "posterior        mean                std");
        for (i, (m, sd)) in self.posterior.mean.iter().zip(&self.posterior.std).enumerate() {
            let _ = writeln!(s, "  x{:<14} {m:<19.10} {sd:.10}", i + 1);
        }
        let _ = writeln!(s, "ESS              {:.1}", self.posterior.effective_sample_size);
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

pub fn reason_name(r: TerminationReason) -> &'static str {
    match r {
        TerminationReason::Converged => "converged",
        TerminationReason::CallBudget => "call_budget",
        TerminationReason::EnrichmentBudget => "enrichment_budget",
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per iteration record. Selected-point columns are empty when no
/// point was acquired after that check.
pub fn history_csv(run: &RunReport) -> String {
    let d = run.training_inputs.dim();
    let mut s = String::from("n,log_c_plugin,log_c_upper,log_c_lower,stopping_metric,cov_plugin,pool_size");
    for j in 1..=d {
        let _ = write!(s, ",selected_x{j}");
    }
    s.push_str(",wall_time_s\n");
    for h in &run.history {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{}",
            h.n,
            num(h.log_c_plugin),
            num(h.log_c_upper),
            num(h.log_c_lower),
            num(h.stopping_metric),
            num(h.cov_plugin),
            h.pool_size
        );
        match &h.selected_point {
            Some(x) => x.iter().for_each(|v| {
                let _ = write!(s, ",{}", num(*v));
            }),
            None => s.push_str(&",".repeat(d)),
        }
        let _ = writeln!(s, ",{:.6}", h.wall_time);
    }
    s
}

pub fn samples_csv(run: &RunReport) -> String {
    let d = run.sir_samples.dim();
    let mut s = (1..=d).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for row in run.sir_samples.rows() {
        s.push_str(&row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn observations_csv(rows: &[Vec<f64>]) -> String {
    let d = rows.first().map_or(0, Vec::len);
    let mut s = (1..=d).map(|j| format!("y{j}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
