//! The active-learning loop: initial design, fit, estimate, two-stage
//! stopping, acquisition, pool enrichment and posterior extraction.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acquisition::{select_next, AcquisitionConfig};
use crate::benchmarks::LogLikelihood;
use crate::cubature::{estimate_evidence, log_expected_error_bound, stopping_metric, EvidenceEstimate, Variant};
use crate::error::{Error, Result};
use crate::gp::{fit, FitConfig, GpModel, TrainingSet};
use crate::lowdisc::hammersley;
use crate::points::PointSet;
use crate::posterior::{effective_sample_size, posterior_moments, silverman_bandwidth, sir_resample, weights_from_model};
use crate::prior::PriorSpec;

const STREAM_POOL: u64 = 1;
const STREAM_ENRICHMENT: u64 = 2;
const STREAM_ACQUISITION: u64 = 3;
const STREAM_SIR: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlcConfig {
    /// Initial design size.
    pub n0: usize,
    /// Initial Monte Carlo pool size `N_M`.
    pub pool_size: usize,
    /// Samples added per enrichment `N`.
    pub pool_increment: usize,
    pub b: f64,
    /// Threshold on the relative bound width.
    pub eps_re: f64,
    /// Threshold on the plug-in estimator CoV.
    pub eta: f64,
    /// Truncation of the initial-design box.
    pub delta0: f64,
    /// Truncation of the acquisition box.
    pub delta1: f64,
    pub variant: Variant,
    pub max_model_calls: usize,
    pub max_pool_enrichments: usize,
    /// Root seed; recorded on [`RunReport::seed`] rather than serialized here.
    #[serde(skip)]
    pub seed: u64,
    /// Posterior samples drawn by SIR.
    pub sir_size: usize,
    pub acquisition_starts: usize,
    pub acquisition_candidates: usize,
    pub acquisition_local_iters: usize,
    #[serde(skip)]
    pub fit: FitConfig,
}

impl Default for AlcConfig {
    fn default() -> Self {
        let acq = AcquisitionConfig::default();
        Self {
            n0: 4,
            pool_size: 20_000,
            pool_increment: 20_000,
            b: 1.0,
            eps_re: 0.1,
            eta: 0.02,
            delta0: 1e-2,
            delta1: 1e-5,
            variant: Variant::TwoSided,
            max_model_calls: 200,
            max_pool_enrichments: 10,
            seed: 0,
            sir_size: 10_000,
            acquisition_starts: acq.n_starts,
            acquisition_candidates: acq.candidate_pool_size,
            acquisition_local_iters: acq.max_local_iters,
            fit: FitConfig::default(),
        }
    }
}

impl AlcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n0 < 2 {
            return bad(format!("n0 must be >= 2, got {}", self.n0));
        }
        if self.pool_size < 2 {
            return bad(format!("pool_size must be >= 2, got {}", self.pool_size));
        }
        if self.pool_increment == 0 {
            return bad("pool_increment must be >= 1".into());
        }
        if !(self.eps_re.is_finite() && self.eps_re > 0.0) {
            return bad(format!("eps_re must be > 0, got {}", self.eps_re));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be > 0, got {}", self.eta));
        }
        if !(self.delta1 > 0.0 && self.delta1 <= self.delta0 && self.delta0 < 0.5) {
            return bad(format!(
                "need 0 < delta1 <= delta0 < 0.5, got delta0 = {}, delta1 = {}",
                self.delta0, self.delta1
            ));
        }
        if self.max_model_calls < self.n0 {
            return bad(format!("max_model_calls ({}) must be >= n0 ({})", self.max_model_calls, self.n0));
        }
        if self.sir_size == 0 {
            return bad("sir_size must be >= 1".into());
        }
        self.acquisition().validate()
    }

    pub fn acquisition(&self) -> AcquisitionConfig {
        AcquisitionConfig {
            variant: self.variant,
            b: self.b,
            n_starts: self.acquisition_starts,
            max_local_iters: self.acquisition_local_iters,
            candidate_pool_size: self.acquisition_candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Training-set size.
    pub n: usize,
    pub log_c_plugin: f64,
    pub log_c_upper: f64,
    pub log_c_lower: f64,
    pub stopping_metric: f64,
    pub cov_plugin: f64,
    pub pool_size: usize,
    /// Point acquired after this check, if any.
    pub selected_point: Option<Vec<f64>>,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    CallBudget,
    EnrichmentBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub evidence: EvidenceEstimate,
    /// `ln(M_b · ĉ · metric)`, the log of a bound on the expected absolute
    /// error of `ĉ`. `M_b` grows like `exp(σ0²/2)`, so the linear value
    /// routinely overflows.
    pub log_expected_error_bound: f64,
    pub history: Vec<IterationRecord>,
    pub n_model_calls: usize,
    pub pool_enrichments: usize,
    pub posterior_mean: Vec<f64>,
    pub posterior_std: Vec<f64>,
    pub effective_sample_size: f64,
    pub sir_samples: PointSet,
    /// Silverman bandwidth of each SIR marginal.
    pub kde_bandwidths: Vec<f64>,
    pub training_inputs: PointSet,
    pub training_outputs: Vec<f64>,
    pub warnings: Vec<String>,
    pub config: AlcConfig,
    pub seed: u64,
    pub termination_reason: TerminationReason,
}

impl RunReport {
    /// Copy with every timing field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for h in &mut r.history {
            h.wall_time = 0.0;
        }
        r
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Hammersley points mapped into the `delta0`-truncated prior box.
pub fn initial_design(prior: &PriorSpec, n0: usize, delta0: f64) -> Result<PointSet> {
    if n0 == 0 {
        return Err(Error::InvalidArgument("n0 must be >= 1".into()));
    }
    prior.map_unit_to_box(&hammersley(n0, prior.dim()), delta0)
}

/// The Monte Carlo pool after `enrichments` enrichments, exactly as [`run`]
/// builds it for `cfg`.
pub fn monte_carlo_pool(prior: &PriorSpec, cfg: &AlcConfig, enrichments: usize) -> PointSet {
    let mut pool = prior.sample(cfg.pool_size, &mut stream(cfg.seed, STREAM_POOL));
    let mut rng = stream(cfg.seed, STREAM_ENRICHMENT);
    for _ in 0..enrichments {
        pool.extend(&prior.sample(cfg.pool_increment, &mut rng)).expect("same dimension");
    }
    pool
}

fn evaluate(problem: &mut dyn LogLikelihood, x: &[f64]) -> Result<f64> {
    match problem.log_likelihood(x) {
        Ok(y) if y.is_finite() => Ok(y),
        Ok(y) => Err(Error::ModelEvaluation { x: x.to_vec(), message: format!("non-finite log-likelihood {y}") }),
        Err(e @ Error::ModelEvaluation { .. }) => Err(e),
        Err(e) => Err(Error::ModelEvaluation { x: x.to_vec(), message: e.to_string() }),
    }
}

/// Runs the loop to termination. Budget exhaustion is reported through
/// [`RunReport::termination_reason`]; model failures are errors.
pub fn run(problem: &mut dyn LogLikelihood, prior: &PriorSpec, cfg: &AlcConfig) -> Result<RunReport> {
    cfg.validate()?;
    prior.check_dim(problem.dim())?;
    let start = Instant::now();
    let acq = cfg.acquisition();
    let acq_box = prior.truncated_box(cfg.delta1)?;

    let mut pool = prior.sample(cfg.pool_size, &mut stream(cfg.seed, STREAM_POOL));
    let mut enrich_rng = stream(cfg.seed, STREAM_ENRICHMENT);
    let mut acq_rng = stream(cfg.seed, STREAM_ACQUISITION);

    let design = initial_design(prior, cfg.n0, cfg.delta0)?;
    let mut outputs = Vec::with_capacity(cfg.n0);
    for x in design.rows() {
        outputs.push(evaluate(problem, x)?);
    }
    let mut train = TrainingSet::new(design, outputs)?;
    let mut model = fit(&train, &cfg.fit)?;

    let mut history: Vec<IterationRecord> = Vec::new();
    let mut successive = 0usize;
    let mut enrichments = 0usize;
    let (est, reason) = loop {
        let est = estimate_evidence(&model, &pool, cfg.b)?;
        let metric = stopping_metric(&est, cfg.variant);
        history.push(IterationRecord {
            n: train.len(),
            log_c_plugin: est.log_c_plugin,
            log_c_upper: est.log_c_upper,
            log_c_lower: est.log_c_lower,
            stopping_metric: metric,
            cov_plugin: est.cov_plugin,
            pool_size: pool.len(),
            selected_point: None,
            wall_time: start.elapsed().as_secs_f64(),
        });
        successive = if metric < cfg.eps_re { successive + 1 } else { 0 };

        if successive >= 2 {
            if est.cov_plugin <= cfg.eta {
                break (est, TerminationReason::Converged);
            }
            if enrichments >= cfg.max_pool_enrichments {
                break (est, TerminationReason::EnrichmentBudget);
            }
            pool.extend(&prior.sample(cfg.pool_increment, &mut enrich_rng))?;
            enrichments += 1;
            continue;
        }
        if train.len() >= cfg.max_model_calls {
            break (est, TerminationReason::CallBudget);
        }

        let x = select_next(&model, prior, &acq_box, &acq, &mut acq_rng)?;
        let y = evaluate(problem, &x)?;
        train.push(&x, y)?;
        history.last_mut().expect("just pushed").selected_point = Some(x);
        model = fit(&train, &cfg.fit)?;
    };

    let mut warnings = Vec::new();
    let wp = weights_from_model(&model, &pool)?;
    let (posterior_mean, posterior_std) = posterior_moments(&wp)?;
    let ess = effective_sample_size(&wp)?;
    if ess < 2.0 {
        warnings.push(format!("effective sample size {ess:.3} is below 2; posterior moments are unreliable"));
    }
    let sir_samples = sir_resample(&wp, cfg.sir_size, &mut stream(cfg.seed, STREAM_SIR))?;
    let kde_bandwidths = (0..sir_samples.dim()).map(|j| silverman_bandwidth(&sir_samples.column(j))).collect();

    Ok(RunReport {
        log_expected_error_bound: log_expected_error_bound(&est, model.hyperparams().sigma0),
        evidence: est,
        history,
        n_model_calls: train.len(),
        pool_enrichments: enrichments,
        posterior_mean,
        posterior_std,
        effective_sample_size: ess,
        sir_samples,
        kde_bandwidths,
        training_inputs: train.inputs().clone(),
        training_outputs: train.outputs().to_vec(),
        warnings,
        config: cfg.clone(),
        seed: cfg.seed,
        termination_reason: reason,
    })
}

/// Fitted surrogate for a finished run's training data.
pub fn refit(report: &RunReport) -> Result<GpModel> {
    let train = TrainingSet::new(report.training_inputs.clone(), report.training_outputs.clone())?;
    fit(&train, &report.config.fit)
}
