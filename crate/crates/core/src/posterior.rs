//! Surrogate posterior: density, self-normalized moments over the prior
//! pool, and sampling-importance-resampling.

use rand::Rng;

use crate::cubature::log_sum_exp;
use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::points::PointSet;
use crate::prior::PriorSpec;

/// `ln f̂(x|Y) = m(x) + ln f(x) - ln ĉ`.
pub fn posterior_log_pdf(model: &GpModel, prior: &PriorSpec, log_c: f64, x: &[f64]) -> Result<f64> {
    if !log_c.is_finite() {
        return Err(Error::InvalidArgument(format!("log evidence must be finite, got {log_c}")));
    }
    let log_f = prior.log_pdf(x)?;
    if log_f == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let (m, _) = model.predict(x)?;
    Ok(m + log_f - log_c)
}

/// Prior pool with log importance weights `ln w_j ∝ m(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPool {
    points: PointSet,
    log_weights: Vec<f64>,
    normalized: bool,
}

impl WeightedPool {
    /// Wraps raw log weights; call [`normalize`](Self::normalize) before use.
    pub fn new(points: PointSet, log_weights: Vec<f64>) -> Result<Self> {
        if points.len() != log_weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: log_weights.len() });
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("weighted pool is empty".into()));
        }
        Ok(Self { points, log_weights, normalized: false })
    }

    pub fn normalize(mut self) -> Result<Self> {
        let total = log_sum_exp(&self.log_weights);
        if !total.is_finite() {
            return Err(Error::DegenerateWeights);
        }
        for w in &mut self.log_weights {
            *w -= total;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            Ok(())
        } else {
            Err(Error::InvalidArgument("weighted pool is not normalized".into()))
        }
    }
}

/// Self-normalized weights `exp(m(x_j)) / Σ exp(m(x_k))` over the pool.
pub fn weights_from_model(model: &GpModel, pool: &PointSet) -> Result<WeightedPool> {
    let (means, _) = model.predict_batch(pool)?;
    WeightedPool::new(pool.clone(), means)?.normalize()
}

/// Weighted mean and (population) standard deviation per dimension.
pub fn posterior_moments(wp: &WeightedPool) -> Result<(Vec<f64>, Vec<f64>)> {
    wp.require_normalized()?;
    let d = wp.points.dim();
    let w = wp.weights();
    let mut mean = vec![0.0; d];
    for (x, &wj) in wp.points.rows().zip(&w) {
        for (m, &v) in mean.iter_mut().zip(x) {
            *m += wj * v;
        }
    }
    let mut var = vec![0.0; d];
    for (x, &wj) in wp.points.rows().zip(&w) {
        for ((s, &v), &m) in var.iter_mut().zip(x).zip(&mean) {
            *s += wj * (v - m) * (v - m);
        }
    }
    Ok((mean, var.into_iter().map(f64::sqrt).collect()))
}

/// Kish effective sample size `1 / Σ w_j²`.
pub fn effective_sample_size(wp: &WeightedPool) -> Result<f64> {
    wp.require_normalized()?;
    let s: f64 = wp.log_weights.iter().map(|w| (2.0 * w).exp()).sum();
    Ok((1.0 / s).clamp(1.0, wp.points.len() as f64))
}

/// Multinomial resampling: `m` indices drawn with replacement with
/// probability equal to the weights.
pub fn sir_indices<R: Rng + ?Sized>(wp: &WeightedPool, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    wp.require_normalized()?;
    if m == 0 {
        return Err(Error::InvalidArgument("resample size must be >= 1".into()));
    }
    let mut cumulative = Vec::with_capacity(wp.log_weights.len());
    let mut acc = 0.0;
    for w in &wp.log_weights {
        acc += w.exp();
        cumulative.push(acc);
    }
    let total = acc;
    let last_positive = wp.log_weights.iter().rposition(|w| *w > f64::NEG_INFINITY).expect("normalized pool");
    Ok((0..m)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cumulative.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect())
}

pub fn sir_resample<R: Rng + ?Sized>(wp: &WeightedPool, m: usize, rng: &mut R) -> Result<PointSet> {
    let idx = sir_indices(wp, m, rng)?;
    Ok(wp.points.select(&idx))
}

/// Silverman's rule-of-thumb Gaussian KDE bandwidth
/// `0.9 min(s, IQR/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (n - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (n as f64).powf(-0.2)
}
