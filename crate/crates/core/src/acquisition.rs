//! Learning function and next-point selection.
//!
//! Scores are handled as logs:
//! `ln LF = 2 ln σ + m + ln(2 sinh(bσ)) + ln f` for the two-sided variant,
//! using `e^{m+bσ} - e^{m-bσ} = 2 e^m sinh(bσ)`. The one-sided variants
//! replace the sinh term by `ln(e^{bσ} - 1)` and `ln(1 - e^{-bσ})`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cubature::Variant;
use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::lowdisc::hammersley;
use crate::optim::NelderMead;
use crate::points::PointSet;
use crate::prior::{Bounds, PriorSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    pub variant: Variant,
    pub b: f64,
    pub n_starts: usize,
    pub max_local_iters: usize,
    pub candidate_pool_size: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self { variant: Variant::TwoSided, b: 1.0, n_starts: 8, max_local_iters: 200, candidate_pool_size: 4096 }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::InvalidArgument(format!("b must be > 0, got {}", self.b)));
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidArgument("n_starts must be >= 1".into()));
        }
        if self.candidate_pool_size < self.n_starts {
            return Err(Error::InvalidArgument(format!(
                "candidate_pool_size ({}) must be >= n_starts ({})",
                self.candidate_pool_size, self.n_starts
            )));
        }
        Ok(())
    }
}

/// `ln(e^y - 1)` for `y > 0`.
#[inline]
fn ln_expm1(y: f64) -> f64 {
    y + (-(-y).exp_m1()).ln()
}

/// Log learning-function score from a prediction and the prior log-density.
/// Returns `-inf` wherever the score is zero.
pub fn log_score(mean: f64, std: f64, log_prior: f64, variant: Variant, b: f64) -> f64 {
    if !(std > 0.0) || log_prior == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let y = b * std;
    let gap = match variant {
        Variant::TwoSided => 2f64.ln() + ln_sinh(y),
        Variant::UpperOnly => ln_expm1(y),
        Variant::LowerOnly => (-(-y).exp_m1()).ln(),
    };
    2.0 * std.ln() + mean + gap + log_prior
}

/// `ln sinh(y)` for `y > 0`.
#[inline]
fn ln_sinh(y: f64) -> f64 {
    y + (-(-2.0 * y).exp_m1()).ln() - 2f64.ln()
}

pub fn log_learning_function(model: &GpModel, prior: &PriorSpec, x: &[f64], cfg: &AcquisitionConfig) -> Result<f64> {
    let log_f = prior.log_pdf(x)?;
    let (m, s) = model.predict(x)?;
    Ok(log_score(m, s, log_f, cfg.variant, cfg.b))
}

/// `LF(x) = σ²(x) (e^{m+bσ} - e^{m-bσ}) f(x)` (or a one-sided variant).
/// Underflows to zero for very negative means; compare candidates with
/// [`log_learning_function`].
pub fn learning_function(model: &GpModel, prior: &PriorSpec, x: &[f64], cfg: &AcquisitionConfig) -> Result<f64> {
    Ok(log_learning_function(model, prior, x, cfg)?.exp())
}

fn is_duplicate(x: &[f64], train: &PointSet, bounds: &Bounds) -> bool {
    train.rows().any(|t| {
        t.iter()
            .zip(x)
            .enumerate()
            .all(|(j, (&a, &b))| (a - b).abs() <= 1e-9 * bounds.width(j).max(a.abs().max(b.abs())))
    })
}

/// Maximizes the learning function over `bounds`: a randomly shifted
/// Hammersley screen of `candidate_pool_size` points, then Nelder–Mead from
/// the `n_starts` best candidates. Ties go to the earliest candidate. A
/// winner that repeats a training input is replaced by the best
/// non-duplicate point found.
pub fn select_next<R: Rng + ?Sized>(
    model: &GpModel,
    prior: &PriorSpec,
    bounds: &Bounds,
    cfg: &AcquisitionConfig,
    rng: &mut R,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let d = model.dim();
    prior.check_dim(d)?;
    if bounds.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: bounds.dim() });
    }

    let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let unit = hammersley(cfg.candidate_pool_size, d);
    let mut candidates = PointSet::with_capacity(d, unit.len());
    let mut u = vec![0.0; d];
    for row in unit.rows() {
        for ((slot, &t), &s) in u.iter_mut().zip(row).zip(&shift) {
            *slot = (t + s).fract();
        }
        candidates.push(&bounds.from_unit(&u))?;
    }
    let (means, stds) = model.predict_batch(&candidates)?;
    let scores: Vec<f64> = candidates
        .rows()
        .zip(means.iter().zip(&stds))
        .map(|(x, (&m, &s))| log_score(m, s, prior.log_pdf_unchecked(x), cfg.variant, cfg.b))
        .collect();

    let mut order: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > f64::NEG_INFINITY).collect();
    if order.is_empty() {
        return Err(Error::DegenerateAcquisition);
    }
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let step = (0.5 / (cfg.candidate_pool_size as f64).powf(1.0 / d as f64)).max(1e-3);
    let nm = NelderMead { max_iters: cfg.max_local_iters, f_tol: 1e-12, x_tol: 1e-9, initial_step: step };
    let objective = |x: &[f64]| -> f64 {
        let (m, s) = model.predict(x).expect("dimension checked");
        -log_score(m, s, prior.log_pdf_unchecked(x), cfg.variant, cfg.b)
    };

    let mut refined: Vec<(Vec<f64>, f64)> = order
        .iter()
        .take(cfg.n_starts)
        .map(|&i| {
            let r = nm.minimize(objective, candidates.row(i), bounds.lo(), bounds.hi());
            (r.x, -r.value)
        })
        .collect();
    refined.sort_by(|a, b| b.1.total_cmp(&a.1));

    let train = model.train().inputs();
    refined
        .iter()
        .map(|(x, _)| x.as_slice())
        .chain(order.iter().map(|&i| candidates.row(i)))
        .find(|x| !is_duplicate(x, train, bounds))
        .map(<[f64]>::to_vec)
        .ok_or(Error::DegenerateAcquisition)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_score_limits() {
        assert_eq!(log_score(0.0, 0.0, 0.0, Variant::TwoSided, 1.0), f64::NEG_INFINITY);
        assert_eq!(log_score(0.0, 1.0, f64::NEG_INFINITY, Variant::TwoSided, 1.0), f64::NEG_INFINITY);
        // σ² · 2 sinh(bσ) at σ = 1 and σ = 0.5.
        let r = (log_score(0.0, 1.0, 0.0, Variant::TwoSided, 1.0) - log_score(0.0, 0.5, 0.0, Variant::TwoSided, 1.0)).exp();
        let want = (2.0 * 1f64.sinh()) / (0.25 * 2.0 * 0.5f64.sinh());
        assert!((r - want).abs() < 1e-12);
        assert!((r - 9.02).abs() < 0.01);
    }

    #[test]
    fn log_score_matches_direct_formula() {
        for &(m, s, lf, b) in &[(0.3f64, 0.7f64, -1.2f64, 1.0f64), (-4.0, 2.5, 0.1, 0.5), (1.0, 1e-6, -0.5, 2.0)] {
            let f = f64::exp(lf);
            let direct = [
                s * s * ((m + b * s).exp() - (m - b * s).exp()) * f,
                s * s * ((m + b * s).exp() - m.exp()) * f,
                s * s * (m.exp() - (m - b * s).exp()) * f,
            ];
            for (v, want) in [Variant::TwoSided, Variant::UpperOnly, Variant::LowerOnly].iter().zip(direct) {
                let got = log_score(m, s, lf, *v, b).exp();
                assert!((got - want).abs() <= 1e-9 * want, "{v:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn log_score_survives_large_arguments() {
        assert!(log_score(-5000.0, 800.0, -3.0, Variant::TwoSided, 1.0).is_finite());
        assert!(log_score(-5000.0, 800.0, -3.0, Variant::UpperOnly, 1.0).is_finite());
        assert!(log_score(-5000.0, 1e-300, -3.0, Variant::LowerOnly, 1.0).is_finite());
    }

    #[test]
    fn config_validation() {
        assert!(AcquisitionConfig::default().validate().is_ok());
        let bad = AcquisitionConfig { candidate_pool_size: 4, n_starts: 8, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AcquisitionConfig { b: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
