use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sbalc_core::benchmarks::{
    reference_evidence_mcs, reference_evidence_quadrature, Example1, Example2, Flat, LogLikelihood,
};
use sbalc_core::{driver, RunReport, TerminationReason};

use crate::config::{resolve, Builtin, ProblemConfig, ProblemKind};
use crate::error::{exit, CliError};
use crate::protocol::ExternalModel;
use crate::report::{history_csv, observations_csv, samples_csv, write_file, ReportDoc};

/// Stream id of the brute-force reference draws; distinct from the run's.
const STREAM_REFERENCE: u64 = 5;

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_calls: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ProblemConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.max_calls {
            cfg.algorithm.max_model_calls = m;
        }
        cfg.validate()
    }
}

/// Builds the log-likelihood the config describes.
pub fn build_problem(cfg: &ProblemConfig) -> Result<Box<dyn LogLikelihood>, CliError> {
    Ok(match cfg.kind() {
        ProblemKind::Builtin { name: Builtin::Example1, .. } => Box::new(Example1),
        ProblemKind::Builtin { name: Builtin::Example2, obs_seed } => Box::new(Example2::from_seed(obs_seed)),
        ProblemKind::Builtin { name: Builtin::Flat, .. } => Box::new(Flat { dim: cfg.dim() }),
        ProblemKind::External { command, timeout_s } => Box::new(ExternalModel::spawn(&command, cfg.dim(), timeout_s)?),
    })
}

pub fn exit_code(reason: TerminationReason) -> u8 {
    match reason {
        TerminationReason::Converged => exit::CONVERGED,
        TerminationReason::CallBudget => exit::CALL_BUDGET,
        TerminationReason::EnrichmentBudget => exit::ENRICHMENT_BUDGET,
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub doc: ReportDoc,
    pub written: Vec<PathBuf>,
}

/// Runs the configured problem and writes the report, history and samples.
pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<RunOutcome, CliError> {
    let mut cfg = ProblemConfig::load(config_path)?;
    overrides.apply(&mut cfg)?;
    let mut problem = build_problem(&cfg)?;
    let report = driver::run(&mut *problem, &cfg.prior(), &cfg.alc_config())?;
    let metadata = problem.metadata();
    drop(problem);

    let doc = ReportDoc::new(&report, &cfg);
    let out = overrides.out_dir.as_deref();
    let mut written = Vec::new();
    let mut put = |path: &Path, contents: String| -> Result<(), CliError> {
        let p = resolve(path, out);
        write_file(&p, &contents)?;
        written.push(p);
        Ok(())
    };
    put(&cfg.outputs.report, doc.to_json())?;
    put(&cfg.outputs.history, history_csv(&report))?;
    put(&cfg.outputs.samples, samples_csv(&report))?;
    if let (Some(path), Some(obs)) = (&cfg.outputs.observations, &metadata.observations) {
        put(path, observations_csv(obs))?;
    }
    Ok(RunOutcome { report, doc, written })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDoc {
    pub version: String,
    pub method: ReferenceMethod,
    pub log_c: f64,
    pub c: f64,
    /// Monte Carlo CoV; absent for quadrature.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cov: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior_mean: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior_std: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_sample_size: Option<f64>,
    pub config: ProblemConfig,
}

impl ReferenceDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reference serializes");
        s.push('\n');
        s
    }
}

/// Oracle evidence on the true log-likelihood: adaptive quadrature for 1-D
/// problems, `n` brute-force prior draws otherwise (or when `force_mcs`).
pub fn cmd_reference(config_path: &Path, n: usize, force_mcs: bool, overrides: &Overrides) -> Result<ReferenceDoc, CliError> {
    let mut cfg = ProblemConfig::load(config_path)?;
    overrides.apply(&mut cfg)?;
    let mut problem = build_problem(&cfg)?;
    let prior = cfg.prior();
    let base = ReferenceDoc {
        version: env!("CARGO_PKG_VERSION").to_string(),
        method: ReferenceMethod::Quadrature,
        log_c: f64::NAN,
        c: f64::NAN,
        cov: None,
        n: None,
        posterior_mean: None,
        posterior_std: None,
        effective_sample_size: None,
        config: cfg.clone(),
    };
    if cfg.dim() == 1 && !force_mcs {
        let log_c = reference_evidence_quadrature(&mut *problem, &prior)?;
        return Ok(ReferenceDoc { log_c, c: log_c.exp(), ..base });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(STREAM_REFERENCE);
    let r = reference_evidence_mcs(&mut *problem, &prior, n, &mut rng)?;
    Ok(ReferenceDoc {
        method: ReferenceMethod::MonteCarlo,
        log_c: r.log_c,
        c: r.log_c.exp(),
        cov: Some(r.cov),
        n: Some(r.n),
        posterior_mean: Some(r.posterior_mean),
        posterior_std: Some(r.posterior_std),
        effective_sample_size: Some(r.ess),
        ..base
    })
}

pub fn cmd_report(report_path: &Path) -> Result<ReportDoc, CliError> {
    let text = std::fs::read_to_string(report_path).map_err(|e| CliError::Io(format!("{}: {e}", report_path.display())))?;
    ReportDoc::from_json(&text)
}
