use rand::Rng;

use super::quadrature::integrate;
use super::LogLikelihood;
use crate::cubature::{cov_from_means, log_mean_exp};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::posterior::{effective_sample_size, posterior_moments, WeightedPool};
use crate::prior::PriorSpec;

const QUAD_TRUNCATION: f64 = 1e-10;
const QUAD_REL_TOL: f64 = 1e-8;

/// `ln ∫ e^{𝓛(x)} f(x) dx` by adaptive Gauss–Kronrod over the prior's
/// `1e-10`-quantile interval, relative tolerance `1e-8`. One-dimensional
/// problems only.
pub fn reference_evidence_quadrature(model: &mut dyn LogLikelihood, prior: &PriorSpec) -> Result<f64> {
    if model.dim() != 1 || prior.dim() != 1 {
        return Err(Error::InvalidArgument(format!(
            "quadrature reference needs a 1-D problem, got dimension {}",
            model.dim()
        )));
    }
    let bounds = prior.truncated_box(QUAD_TRUNCATION)?;
    let (a, b) = (bounds.lo()[0], bounds.hi()[0]);
    let marginal = prior.marginals()[0];
    let mut log_integrand = |x: f64| -> Result<f64> { Ok(model.log_likelihood(&[x])? + marginal.ln_pdf(x)) };

    // Shift by the largest log-integrand seen on a coarse grid so tiny
    // evidences stay representable.
    let mut shift = f64::NEG_INFINITY;
    for i in 0..=512 {
        shift = shift.max(log_integrand(a + (b - a) * i as f64 / 512.0)?);
    }
    if !shift.is_finite() {
        return Err(Error::InvalidArgument("log-integrand is not finite on the quadrature grid".into()));
    }
    let r = integrate(|x| Ok((log_integrand(x)? - shift).exp()), a, b, QUAD_REL_TOL, 64, 200_000)?;
    Ok(r.value.ln() + shift)
}

/// Brute-force Monte Carlo reference on the true log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct McsReference {
    pub log_c: f64,
    pub cov: f64,
    pub posterior_mean: Vec<f64>,
    pub posterior_std: Vec<f64>,
    pub ess: f64,
    pub n: usize,
}

/// `n ≥ 1000` prior draws, true log-likelihood at each, log-mean-exp and its
/// CoV, plus self-normalized posterior moments.
pub fn reference_evidence_mcs<R: Rng + ?Sized>(
    model: &mut dyn LogLikelihood,
    prior: &PriorSpec,
    n: usize,
    rng: &mut R,
) -> Result<McsReference> {
    if n < 1000 {
        return Err(Error::InvalidArgument(format!("brute-force reference needs n >= 1000, got {n}")));
    }
    prior.check_dim(model.dim())?;
    let pool = prior.sample(n, rng);
    reference_evidence_on_pool(model, &pool)
}

/// Same estimate over a given pool of prior draws.
pub fn reference_evidence_on_pool(model: &mut dyn LogLikelihood, pool: &PointSet) -> Result<McsReference> {
    if pool.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: pool.dim() });
    }
    if pool.len() < 2 {
        return Err(Error::InvalidArgument("pool needs at least 2 points".into()));
    }
    let values: Vec<f64> = pool.rows().map(|x| model.log_likelihood(x)).collect::<Result<_>>()?;
    let log_c = log_mean_exp(&values);
    let cov = cov_from_means(&values, log_c);
    let wp = WeightedPool::new(pool.clone(), values)?.normalize()?;
    let (posterior_mean, posterior_std) = posterior_moments(&wp)?;
    Ok(McsReference { log_c, cov, posterior_mean, posterior_std, ess: effective_sample_size(&wp)?, n: pool.len() })
}
