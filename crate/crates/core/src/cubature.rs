//! Monte Carlo evidence estimators driven by the surrogate mean and
//! standard deviation, the stopping metric, and the error-bound constants.
//!
//! Every evidence is carried as a natural log.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::points::PointSet;

/// Which bound gap drives stopping and acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `(ĉ_upper - ĉ_lower) / ĉ`
    #[default]
    TwoSided,
    /// `(ĉ_upper - ĉ) / ĉ`
    UpperOnly,
    /// `(ĉ - ĉ_lower) / ĉ`
    LowerOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub log_c_plugin: f64,
    pub log_c_upper: f64,
    pub log_c_lower: f64,
    pub cov_plugin: f64,
    pub pool_size: usize,
    pub b: f64,
}

/// `ln Σ exp(v_i)`, max-shifted, summed in index order.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln( (1/N) Σ exp(v_i) )`.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    log_sum_exp(values) - (values.len() as f64).ln()
}

/// Above this gap between the largest upper-bound exponent and the largest
/// mean, the upper bound gets its own shift.
const SHARED_SHIFT_LIMIT: f64 = 600.0;

fn shifted_log_mean(values: impl Iterator<Item = f64>, shift: f64, n: usize) -> f64 {
    shift + values.map(|v| (v - shift).exp()).sum::<f64>().ln() - (n as f64).ln()
}

/// Plug-in, upper and lower evidences from pool predictions. All three
/// share the shift `max m_j` whenever that cannot overflow, which keeps
/// `lower ≤ plugin ≤ upper` exact in floating point.
pub fn evidence_from_predictions(means: &[f64], stds: &[f64], b: f64) -> Result<EvidenceEstimate> {
    let n = means.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("evidence estimation needs a pool of at least 2, got {n}")));
    }
    if stds.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: stds.len() });
    }
    check_b(b)?;
    let mp = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !mp.is_finite() {
        return Err(Error::InvalidArgument(format!("posterior means are not finite (max {mp})")));
    }
    let log_c_plugin = shifted_log_mean(means.iter().copied(), mp, n);
    let lower = means.iter().zip(stds).map(|(m, s)| m - b * s);
    let log_c_lower = shifted_log_mean(lower, mp, n);
    let upper = || means.iter().zip(stds).map(|(m, s)| m + b * s);
    let mu = upper().fold(f64::NEG_INFINITY, f64::max);
    let upper_shift = if mu - mp > SHARED_SHIFT_LIMIT { mu } else { mp };
    let log_c_upper = shifted_log_mean(upper(), upper_shift, n);
    let cov_plugin = cov_from_means(means, log_c_plugin);
    Ok(EvidenceEstimate { log_c_plugin, log_c_upper, log_c_lower, cov_plugin, pool_size: n, b })
}

/// Coefficient of variation of the Monte Carlo mean of `exp(m_j)`, in the
/// ratio form `sqrt(Σ (r_j - 1)² / (N (N-1)))` with `r_j = exp(m_j - ln ĉ)`.
pub fn cov_from_means(means: &[f64], log_c: f64) -> f64 {
    let n = means.len() as f64;
    let ss: f64 = means.iter().map(|m| ((m - log_c).exp() - 1.0).powi(2)).sum();
    (ss / (n * (n - 1.0))).sqrt()
}

fn check_b(b: f64) -> Result<()> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidArgument(format!("bound width b must be > 0, got {b}")));
    }
    Ok(())
}

fn check_pool(model: &GpModel, pool: &PointSet, min: usize) -> Result<()> {
    if pool.len() < min {
        return Err(Error::InvalidArgument(format!("pool needs at least {min} points, got {}", pool.len())));
    }
    if pool.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: pool.dim() });
    }
    Ok(())
}

/// Plug-in evidence `ln( (1/N) Σ exp(m(x_j)) )` over the pool.
pub fn plugin_evidence(model: &GpModel, pool: &PointSet) -> Result<f64> {
    check_pool(model, pool, 1)?;
    let (means, _) = model.predict_batch(pool)?;
    Ok(log_mean_exp(&means))
}

/// Evidence with `m ± b·σ` in place of the surrogate.
pub fn bound_evidence(model: &GpModel, pool: &PointSet, b: f64, side: Side) -> Result<f64> {
    check_b(b)?;
    check_pool(model, pool, 1)?;
    let (means, stds) = model.predict_batch(pool)?;
    let sign = match side {
        Side::Upper => 1.0,
        Side::Lower => -1.0,
    };
    let v: Vec<f64> = means.iter().zip(&stds).map(|(m, s)| m + sign * b * s).collect();
    Ok(log_mean_exp(&v))
}

/// Monte Carlo CoV of the plug-in estimator.
pub fn estimator_cov(model: &GpModel, pool: &PointSet) -> Result<f64> {
    check_pool(model, pool, 2)?;
    let (means, _) = model.predict_batch(pool)?;
    Ok(cov_from_means(&means, log_mean_exp(&means)))
}

/// All three evidences and the CoV from one pass over the pool.
pub fn estimate_evidence(model: &GpModel, pool: &PointSet, b: f64) -> Result<EvidenceEstimate> {
    check_b(b)?;
    check_pool(model, pool, 2)?;
    let (means, stds) = model.predict_batch(pool)?;
    evidence_from_predictions(&means, &stds, b)
}

/// Relative bound gap used by the stopping rule.
pub fn stopping_metric(est: &EvidenceEstimate, variant: Variant) -> f64 {
    let up = (est.log_c_upper - est.log_c_plugin).exp_m1();
    let down = (est.log_c_lower - est.log_c_plugin).exp_m1();
    match variant {
        Variant::TwoSided => up - down,
        Variant::UpperOnly => up,
        Variant::LowerOnly => -down,
    }
}

/// `h_b(σ) = exp(σ²/2) (2Φ(σ) - 1) / (2 sinh(bσ))`, extended continuously
/// by `sqrt(2/π) / (2b)` at `σ = 0`.
pub fn h_b(sigma: f64, b: f64) -> f64 {
    if sigma == 0.0 {
        return (2.0 / std::f64::consts::PI).sqrt() / (2.0 * b);
    }
    let two_phi_minus_one = libm::erf(sigma * std::f64::consts::FRAC_1_SQRT_2);
    (0.5 * sigma * sigma).exp() * two_phi_minus_one / (2.0 * (b * sigma).sinh())
}

/// `M_b = max{ e^{1/2} sqrt(2/π) / (2b), e^{σ0²/2} / (2 sinh b) }`, an upper
/// bound of `h_b` on `[0, σ0]`.
pub fn m_b_bound(sigma0: f64, b: f64) -> f64 {
    log_m_b_bound(sigma0, b).exp()
}

/// `ln M_b`; finite where `M_b` itself overflows (large `σ0`).
pub fn log_m_b_bound(sigma0: f64, b: f64) -> f64 {
    let near_zero = 0.5 - (2.0 * b).ln() + 0.5 * (2.0 / std::f64::consts::PI).ln();
    let far = 0.5 * sigma0 * sigma0 - (2.0 * b.sinh()).ln();
    near_zero.max(far)
}

/// `M_b (ĉ_upper - ĉ_lower)`: upper bound on the expected absolute error of
/// the plug-in evidence against the GP-random evidence.
pub fn expected_error_bound(est: &EvidenceEstimate, sigma0: f64) -> f64 {
    log_expected_error_bound(est, sigma0).exp()
}

pub fn log_expected_error_bound(est: &EvidenceEstimate, sigma0: f64) -> f64 {
    log_m_b_bound(sigma0, est.b) + est.log_c_plugin + stopping_metric(est, Variant::TwoSided).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{Hyperparams, Standardization, TrainingSet};

    fn est(upper: f64, plugin: f64, lower: f64) -> EvidenceEstimate {
        EvidenceEstimate {
            log_c_plugin: plugin.ln(),
            log_c_upper: upper.ln(),
            log_c_lower: lower.ln(),
            cov_plugin: 0.0,
            pool_size: 10,
            b: 1.0,
        }
    }

    #[test]
    fn log_mean_exp_examples() {
        let k: f64 = 0.37;
        assert!((log_mean_exp(&[k.ln(); 5]) - k.ln()).abs() < 1e-15);
        assert!((log_mean_exp(&[0.0, 3f64.ln()]) - 2f64.ln()).abs() < 1e-15);
        let deep = [-1e4, -1e4 + 1.0, -1e4 - 3.0];
        let v = log_mean_exp(&deep);
        assert!(v.is_finite());
        let want = -1e4 + ((1.0 + 1f64.exp() + (-3f64).exp()) / 3.0).ln();
        assert!((v - want).abs() < 1e-10);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
    }

    #[test]
    fn bounds_from_predictions() {
        let e = evidence_from_predictions(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert!((e.log_c_upper - 1.0).abs() < 1e-15);
        assert!((e.log_c_lower + 1.0).abs() < 1e-15);
        let e = evidence_from_predictions(&[-2.0, 0.5, 1.0], &[0.0; 3], 1.0).unwrap();
        assert_eq!(e.log_c_upper, e.log_c_plugin);
        assert_eq!(e.log_c_lower, e.log_c_plugin);
        assert!(evidence_from_predictions(&[0.0, 1.0], &[0.0, 0.0], 0.0).is_err());
        assert!(evidence_from_predictions(&[0.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn huge_sigma_upper_uses_its_own_shift() {
        let e = evidence_from_predictions(&[0.0, -5.0], &[0.0, 1000.0], 1.0).unwrap();
        assert!(e.log_c_upper.is_finite());
        assert!((e.log_c_upper - (995.0 - 2f64.ln())).abs() < 1e-9);
        assert!(e.log_c_lower <= e.log_c_plugin && e.log_c_plugin <= e.log_c_upper);
    }

    #[test]
    fn cov_examples() {
        let means = [0.0, 3f64.ln()];
        let cov = cov_from_means(&means, log_mean_exp(&means));
        assert!((cov - 0.5).abs() < 1e-15);
        assert_eq!(cov_from_means(&[1.5; 7], 1.5), 0.0);
    }

    #[test]
    fn stopping_metric_examples() {
        let e = est(1.2, 1.0, 0.9);
        assert!((stopping_metric(&e, Variant::TwoSided) - 0.3).abs() < 1e-14);
        assert_eq!(
            stopping_metric(&e, Variant::TwoSided),
            stopping_metric(&e, Variant::UpperOnly) + stopping_metric(&e, Variant::LowerOnly)
        );
        let flat = est(2.0, 2.0, 2.0);
        for v in [Variant::TwoSided, Variant::UpperOnly, Variant::LowerOnly] {
            assert_eq!(stopping_metric(&flat, v), 0.0);
        }
    }

    #[test]
    fn h_b_values() {
        assert!((h_b(0.0, 1.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        // e^{1/2} (2Φ(1) - 1) / (2 sinh 1), Φ(1) = 0.841344746068543
        let want = 0.5f64.exp() * (2.0 * 0.841_344_746_068_543 - 1.0) / (2.0 * 1f64.sinh());
        assert!((h_b(1.0, 1.0) - want).abs() < 1e-12);
        assert!((h_b(1.0, 1.0) - 0.4788).abs() < 1e-4);
        for s in [0.1, 0.5, 1.0, 3.0] {
            assert!(h_b(s, 2.0) < h_b(s, 1.0));
        }
        for b in [0.5, 1.0, 2.0] {
            let lim = (2.0 / std::f64::consts::PI).sqrt() / (2.0 * b);
            assert!((h_b(1e-8, b) - lim).abs() < 1e-6);
        }
    }

    #[test]
    fn m_b_values() {
        assert!((m_b_bound(1.0, 1.0) - 0.7015).abs() < 5e-5);
        let near = 0.5f64.exp() / 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((near - 0.6577).abs() < 5e-5);
        for s0 in [0.5, 1.0, 2.0] {
            let mut prev = f64::INFINITY;
            for i in 1..50 {
                let m = m_b_bound(s0, i as f64 * 0.1);
                assert!(m <= prev);
                prev = m;
            }
        }
    }

    #[test]
    fn error_bound_zero_when_bounds_coincide() {
        assert_eq!(expected_error_bound(&est(3.0, 3.0, 3.0), 1.0), 0.0);
        let a = expected_error_bound(&est(1.2, 1.0, 0.9), 1.0);
        assert!((a - m_b_bound(1.0, 1.0) * 0.3).abs() < 1e-14);
        let huge = log_expected_error_bound(&est(1.2, 1.0, 0.9), 40.0);
        assert!(huge.is_finite() && expected_error_bound(&est(1.2, 1.0, 0.9), 40.0).is_infinite());
    }

    #[test]
    fn model_level_operations() {
        let train = TrainingSet::new(PointSet::from_rows(&[[0.0], [1.0]]).unwrap(), vec![-1.0, -2.0]).unwrap();
        let hp = Hyperparams::new(-1.5, 0.8, vec![0.6]).unwrap();
        let m = GpModel::with_hyperparams(train, hp, Standardization::identity(1)).unwrap();
        let pool = PointSet::from_rows(&[[0.2], [0.5], [2.0], [-1.0]]).unwrap();
        let e = estimate_evidence(&m, &pool, 1.0).unwrap();
        assert!((plugin_evidence(&m, &pool).unwrap() - e.log_c_plugin).abs() < 1e-14);
        assert!((bound_evidence(&m, &pool, 1.0, Side::Upper).unwrap() - e.log_c_upper).abs() < 1e-14);
        assert!((bound_evidence(&m, &pool, 1.0, Side::Lower).unwrap() - e.log_c_lower).abs() < 1e-14);
        assert!((estimator_cov(&m, &pool).unwrap() - e.cov_plugin).abs() < 1e-14);
        assert!(bound_evidence(&m, &pool, -1.0, Side::Upper).is_err());
        assert!(plugin_evidence(&m, &PointSet::new(1)).is_err());
        assert!(estimator_cov(&m, &PointSet::from_rows(&[[0.0]]).unwrap()).is_err());
    }
}
