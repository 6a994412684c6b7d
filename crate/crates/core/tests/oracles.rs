use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use sbalc_core::benchmarks::quadrature::integrate;
use sbalc_core::benchmarks::*;
use sbalc_core::cubature::{estimate_evidence, plugin_evidence};
use sbalc_core::driver::{monte_carlo_pool, run, AlcConfig, TerminationReason};
use sbalc_core::gp::{GpModel, Hyperparams, Standardization, TrainingSet};
use sbalc_core::posterior::{posterior_moments, sir_indices, sir_resample, WeightedPool};
use sbalc_core::{MarginalPrior, PointSet, PriorSpec};

/// Roots of det(K - λI) = 0 by bisection on the characteristic cubic,
/// bracketed by Gershgorin discs and split at the cubic's critical points.
fn charpoly_eigenvalues(k: &[[f64; 3]; 3]) -> [f64; 3] {
    let tr = k[0][0] + k[1][1] + k[2][2];
    let minors = k[0][0] * k[1][1] - k[0][1] * k[1][0] + k[0][0] * k[2][2] - k[0][2] * k[2][0] + k[1][1] * k[2][2]
        - k[1][2] * k[2][1];
    let det = k[0][0] * (k[1][1] * k[2][2] - k[1][2] * k[2][1]) - k[0][1] * (k[1][0] * k[2][2] - k[1][2] * k[2][0])
        + k[0][2] * (k[1][0] * k[2][1] - k[1][1] * k[2][0]);
    // p(λ) = -λ³ + tr λ² - minors λ + det
    let p = |l: f64| -l * l * l + tr * l * l - minors * l + det;
    let radius = (0..3).map(|i| (0..3).map(|j| k[i][j].abs()).sum::<f64>()).fold(0.0, f64::max);
    let disc = (tr * tr - 3.0 * minors).sqrt();
    let (c1, c2) = ((tr - disc) / 3.0, (tr + disc) / 3.0);
    let bisect = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (p(a) > 0.0) == (p(m) > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    [bisect(-radius - 1.0, c1), bisect(c1, c2), bisect(c2, radius + 1.0)]
}

#[test]
fn frequencies_match_characteristic_polynomial() {
    for (k1, k2, k5) in [(1.5, 1.5, 1.5), (0.7, 2.3, 1.1), (3.0, 0.4, 2.2)] {
        let f = mass_spring_frequencies(k1, k2, k5).unwrap();
        let lam = charpoly_eigenvalues(&stiffness_matrix(k1, k2, k5));
        for (fi, li) in f.iter().zip(lam) {
            let want = li.sqrt() / (2.0 * std::f64::consts::PI);
            assert!((fi - want).abs() < 1e-10, "{fi} vs {want}");
        }
        assert!(f[0] < f[1] && f[1] < f[2]);
    }
}

#[test]
fn eigen_residuals_are_small() {
    let k = stiffness_matrix(1.2, 1.9, 0.8);
    let norm = k.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    for l in symmetric_eigenvalues(&k) {
        let v = symmetric_eigenvector(&k, l);
        let r: f64 = (0..3).map(|i| ((0..3).map(|j| k[i][j] * v[j]).sum::<f64>() - l * v[i]).powi(2)).sum::<f64>().sqrt();
        assert!(r <= 1e-9 * norm);
    }
}

#[test]
fn example2_loglik_matches_naive_double_sum() {
    let obs = generate_observations(&mut ChaCha8Rng::seed_from_u64(21));
    let f = mass_spring_frequencies(1.5, 1.5, 1.5).unwrap();
    let mut acc = 0.0;
    for r in 0..30 {
        for i in 0..3 {
            let e = obs[r][i] - f[i];
            acc += e * e;
        }
    }
    let want = -acc / (2.0 * 0.01 * 0.01);
    let got = example2_loglik(&[1.5, 1.5, 1.5], &obs).unwrap();
    assert!((got - want).abs() <= 1e-12 * want.abs());
}

#[test]
fn observation_column_means_near_nominal_frequencies() {
    let nominal = mass_spring_frequencies(1.5, 1.5, 1.5).unwrap();
    for seed in 0..5 {
        let rows = generate_observations(&mut ChaCha8Rng::seed_from_u64(seed));
        let n = rows.len() as f64;
        for i in 0..3 {
            let mean = rows.iter().map(|r| r[i]).sum::<f64>() / n;
            let sd = (rows.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!((mean - nominal[i]).abs() < 3.0 * sd / n.sqrt(), "seed {seed} column {i}");
        }
    }
}

#[test]
fn mcs_cov_scales_as_inverse_sqrt_n() {
    let prior = example1_prior();
    let a = reference_evidence_mcs(&mut Example1, &prior, 20_000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = reference_evidence_mcs(&mut Example1, &prior, 80_000, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let ratio = a.cov / b.cov;
    assert!((ratio - 2.0).abs() <= 0.4, "{ratio}");
}

#[test]
fn quadrature_and_mcs_agree_on_one_dimensional_fixtures() {
    let prior = PriorSpec::new(vec![MarginalPrior::Uniform { lower: -1.0, upper: 3.0 }]).unwrap();
    let mut peaked = FnLogLikelihood::new("peaked", 1, |x: &[f64]| -8.0 * (x[0] - 0.4).powi(2));
    for (model, prior) in [
        (&mut Example1 as &mut dyn LogLikelihood, example1_prior()),
        (&mut peaked as &mut dyn LogLikelihood, prior),
    ] {
        let q = reference_evidence_quadrature(model, &prior).unwrap();
        let m = reference_evidence_mcs(model, &prior, 200_000, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!(((m.log_c - q).exp() - 1.0).abs() <= 3.0 * m.cov, "{} vs {}", m.log_c, q);
    }
}

#[test]
fn one_point_gp_plugin_matches_quadrature() {
    // n = 1: m(x) = β + k(x, x1)/σ0² (y1 - β) in closed form.
    let (x1, y1, beta, sigma0, ell) = (0.5, -0.3, -2.0, 1.4, 0.8);
    let train = TrainingSet::new(PointSet::from_flat(1, vec![x1]).unwrap(), vec![y1]).unwrap();
    let hp = Hyperparams::new(beta, sigma0, vec![ell]).unwrap();
    let model = GpModel::with_hyperparams(train, hp, Standardization::identity(1)).unwrap();
    let prior = PriorSpec::new(vec![MarginalPrior::Gaussian { mean: 0.0, std: 1.0 }]).unwrap();
    let mean = |x: f64| beta + (-(x - x1).powi(2) / (2.0 * ell * ell)).exp() * (y1 - beta) / (1.0 + 1e-10);
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let q = integrate(|x| Ok(mean(x).exp() * pdf(x)), -12.0, 12.0, 1e-12, 64, 100_000).unwrap().value;

    let pool = prior.sample(1_000_000, &mut ChaCha8Rng::seed_from_u64(4));
    let est = estimate_evidence(&model, &pool, 1.0).unwrap();
    assert_eq!(est.log_c_plugin, plugin_evidence(&model, &pool).unwrap());
    assert!((est.log_c_plugin.exp() / q - 1.0).abs() <= 3.0 * est.cov_plugin);
}

#[test]
fn sir_frequencies_pass_chi_square() {
    let pts = PointSet::from_flat(1, (0..8).map(f64::from).collect()).unwrap();
    let lw = vec![0.1, -1.0, 0.7, -0.2, 1.3, -2.0, 0.0, 0.4];
    let wp = WeightedPool::new(pts, lw).unwrap().normalize().unwrap();
    let m = 50_000;
    let idx = sir_indices(&wp, m, &mut ChaCha8Rng::seed_from_u64(17)).unwrap();
    let mut counts = [0usize; 8];
    for i in idx {
        counts[i] += 1;
    }
    let chi2: f64 = counts
        .iter()
        .zip(wp.weights())
        .map(|(&c, w)| {
            let e = w * m as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let critical = ChiSquared::new(7.0).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "{chi2} >= {critical}");
}

#[test]
fn sir_mean_matches_weighted_mean() {
    let prior = PriorSpec::new(vec![MarginalPrior::Gaussian { mean: 0.0, std: 1.0 }; 2]).unwrap();
    let pts = prior.sample(5000, &mut ChaCha8Rng::seed_from_u64(1));
    let lw: Vec<f64> = pts.rows().map(|x| -2.0 * (x[0] - 0.5).powi(2) - (x[1] + 0.3).powi(2)).collect();
    let wp = WeightedPool::new(pts, lw).unwrap().normalize().unwrap();
    let (mean, std) = posterior_moments(&wp).unwrap();
    let m = 20_000;
    let s = sir_resample(&wp, m, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    for k in 0..2 {
        let sm = s.column(k).iter().sum::<f64>() / m as f64;
        assert!((sm - mean[k]).abs() <= 3.0 * std[k] / (m as f64).sqrt(), "dim {k}");
    }
}

#[test]
fn driver_invariants_on_a_small_problem() {
    let prior = PriorSpec::new(vec![MarginalPrior::Gaussian { mean: 0.0, std: 1.0 }; 2]).unwrap();
    let mut model = FnLogLikelihood::new("bowl", 2, |x: &[f64]| -4.0 * (x[0] - 0.3).powi(2) - 2.0 * (x[1] + 0.2).powi(2));
    let cfg = AlcConfig { pool_size: 5000, pool_increment: 5000, eta: 0.01, sir_size: 1000, seed: 3, ..Default::default() };
    let r = run(&mut model, &prior, &cfg).unwrap();
    assert!(r.n_model_calls <= cfg.max_model_calls);
    assert!(r.pool_enrichments <= cfg.max_pool_enrichments);
    assert_eq!(r.evidence.pool_size, cfg.pool_size + r.pool_enrichments * cfg.pool_increment);
    assert_eq!(monte_carlo_pool(&prior, &cfg, r.pool_enrichments).len(), r.evidence.pool_size);
    for h in &r.history {
        assert!(h.log_c_lower <= h.log_c_plugin && h.log_c_plugin <= h.log_c_upper);
    }
    let acquisitions = r.history.iter().filter(|h| h.selected_point.is_some()).count();
    assert_eq!(r.n_model_calls, cfg.n0 + acquisitions);
    assert!(r.history.windows(2).all(|w| w[0].n <= w[1].n));
    if r.termination_reason == TerminationReason::Converged {
        let k = r.history.len();
        assert!(r.history[k - 1].stopping_metric < cfg.eps_re && r.history[k - 2].stopping_metric < cfg.eps_re);
    }
    // Entries sharing a training size differ only by pool enrichment.
    for w in r.history.windows(2).filter(|w| w[0].n == w[1].n) {
        assert!(w[0].selected_point.is_none() && w[1].pool_size > w[0].pool_size);
    }

    let again = run(&mut model, &prior, &cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&r.without_timing()).unwrap(),
        serde_json::to_string(&again.without_timing()).unwrap()
    );
}
