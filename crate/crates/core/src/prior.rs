//! Independent marginal priors, truncated design boxes and prior sampling.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::points::PointSet;

/// Prior distribution of a single model parameter.
///
/// Only the Gaussian and uniform families are supported. New families need a
/// log-density, CDF, inverse CDF and a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MarginalPrior {
    Gaussian { mean: f64, std: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl MarginalPrior {
    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        let m = Self::Gaussian { mean, std };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        let m = Self::Uniform { lower, upper };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Gaussian { mean, std } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidPrior(format!("gaussian mean must be finite, got {mean}")));
                }
                if !(std.is_finite() && std > 0.0) {
                    return Err(Error::InvalidPrior(format!("gaussian std must be > 0, got {std}")));
                }
            }
            Self::Uniform { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(Error::InvalidPrior(format!(
                        "uniform bounds must satisfy lower < upper, got [{lower}, {upper}]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => normal::ln_pdf((x - mean) / std) - std.ln(),
            Self::Uniform { lower, upper } => {
                if (lower..=upper).contains(&x) {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => normal::cdf((x - mean) / std),
            Self::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
        }
    }

    /// `F^{-1}(p)` for `0 < p < 1`.
    pub fn inverse_cdf(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(self.quantile_unchecked(p))
    }

    fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => mean + std * normal::quantile(p),
            Self::Uniform { lower, upper } => lower + p * (upper - lower),
        }
    }

    pub fn median(&self) -> f64 {
        self.quantile_unchecked(0.5)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Gaussian { mean, .. } => mean,
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }

    pub fn std(&self) -> f64 {
        match *self {
            Self::Gaussian { std, .. } => std,
            Self::Uniform { lower, upper } => (upper - lower) / 12f64.sqrt(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { mean, std } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + std * z
            }
            Self::Uniform { lower, upper } => lower + (upper - lower) * rng.random::<f64>(),
        }
    }
}

/// Joint prior with independent marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorSpec {
    marginals: Vec<MarginalPrior>,
}

impl PriorSpec {
    pub fn new(marginals: Vec<MarginalPrior>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidPrior("at least one marginal is required".into()));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(Self { marginals })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[MarginalPrior] {
        &self.marginals
    }

    pub fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }

    /// Log of the joint prior density; `-inf` outside a uniform support.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.log_pdf_unchecked(x))
    }

    pub(crate) fn log_pdf_unchecked(&self, x: &[f64]) -> f64 {
        self.marginals.iter().zip(x).map(|(m, &v)| m.ln_pdf(v)).sum()
    }

    /// `n` i.i.d. draws from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PointSet {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            for m in &self.marginals {
                data.push(m.sample(rng));
            }
        }
        PointSet::from_flat(d, data).expect("buffer is a multiple of d")
    }

    /// Per-dimension quantile box `[F_j^{-1}(delta), F_j^{-1}(1-delta)]`.
    pub fn truncated_box(&self, delta: f64) -> Result<Bounds> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidProbability(delta));
        }
        let (lo, hi) = self
            .marginals
            .iter()
            .map(|m| (m.quantile_unchecked(delta), m.quantile_unchecked(1.0 - delta)))
            .unzip();
        Bounds::new(lo, hi)
    }

    /// Maps unit-cube coordinates into the `delta`-truncated box through the
    /// marginal inverse CDFs: `u -> F_j^{-1}(delta + u (1 - 2 delta))`.
    pub fn map_unit_to_box(&self, u: &PointSet, delta: f64) -> Result<PointSet> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidProbability(delta));
        }
        self.check_dim(u.dim())?;
        let width = 1.0 - 2.0 * delta;
        let mut out = PointSet::with_capacity(u.dim(), u.len());
        let mut buf = vec![0.0; u.dim()];
        for row in u.rows() {
            for ((slot, m), &uj) in buf.iter_mut().zip(&self.marginals).zip(row) {
                let p = (delta + uj * width).clamp(delta, 1.0 - delta);
                *slot = m.quantile_unchecked(p);
            }
            out.push(&buf)?;
        }
        Ok(out)
    }
}

/// Axis-aligned box `∏ [lo_j, hi_j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() {
            return Err(Error::InvalidArgument("box must have at least one dimension".into()));
        }
        if let Some(j) = (0..lo.len()).find(|&j| !(lo[j] < hi[j])) {
            return Err(Error::InvalidArgument(format!(
                "box dimension {j} is empty: [{}, {}]",
                lo[j], hi[j]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn width(&self, j: usize) -> f64 {
        self.hi[j] - self.lo[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&v, (&l, &h))| l <= v && v <= h)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, &l), &h) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(l, h);
        }
    }

    /// Affine image of a unit-cube point.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().enumerate().map(|(j, &t)| self.lo[j] + t * self.width(j)).collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(j, &v)| (v - self.lo[j]) / self.width(j)).collect()
    }
}
