//! Benchmark problems and reference oracles.
//!
//! * Example 1: a sigmoid response `R(x) = 10 / (1 + e^{-1.2(x-1)})` observed
//!   at `R(1) = 5` with error std 0.2, prior `N(1.5, 2²)`.
//! * Example 2: a 3-DOF mass–spring chain with unit masses and uncertain
//!   stiffnesses `k1, k2, k5`, updated from 30 sets of regenerated natural
//!   frequencies (Hz) with error std 0.01, prior `N(2.0, 0.3²)` each.
//!
//! The spring connectivity is an assumption taken from the usual form of this
//! benchmark:
//!
//! ```text
//! K = [[k1 + k4 + k6, -k4,          -k6         ],
//!      [-k4,          k2 + k4 + k5, -k5         ],
//!      [-k6,          -k5,          k3 + k5 + k6]]
//! ```
//!
//! with `k3 = k4 = 1.0` and `k6 = 3.0` N/m held fixed.

mod eigen3;
pub mod quadrature;
mod reference;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::{MarginalPrior, PriorSpec};

pub use eigen3::{symmetric_eigenvalues, symmetric_eigenvector};
pub use reference::{reference_evidence_mcs, reference_evidence_on_pool, reference_evidence_quadrature, McsReference};

/// Descriptive data attached to a log-likelihood.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub name: String,
    pub sigma_eps: Option<f64>,
    pub observations: Option<Vec<Vec<f64>>>,
}

/// A log-likelihood `𝓛(x) = ln L(Y_obs | x)`. Implementations must be
/// deterministic. `&mut self` lets external processes hold I/O state.
pub trait LogLikelihood {
    fn dim(&self) -> usize;

    fn log_likelihood(&mut self, x: &[f64]) -> Result<f64>;

    fn metadata(&self) -> ModelMetadata {
        ModelMetadata::default()
    }
}

impl<T: LogLikelihood + ?Sized> LogLikelihood for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_likelihood(&mut self, x: &[f64]) -> Result<f64> {
        (**self).log_likelihood(x)
    }
    fn metadata(&self) -> ModelMetadata {
        (**self).metadata()
    }
}

/// Adapts a closure into a [`LogLikelihood`].
pub struct FnLogLikelihood<F> {
    dim: usize,
    name: String,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64> FnLogLikelihood<F> {
    pub fn new(name: impl Into<String>, dim: usize, f: F) -> Self {
        Self { dim, name: name.into(), f }
    }
}

impl<F: FnMut(&[f64]) -> f64> LogLikelihood for FnLogLikelihood<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_likelihood(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok((self.f)(x))
    }
    fn metadata(&self) -> ModelMetadata {
        ModelMetadata { name: self.name.clone(), ..Default::default() }
    }
}

pub const EXAMPLE1_SIGMA_EPS: f64 = 0.2;
pub const EXAMPLE2_SIGMA_EPS: f64 = 0.01;
pub const EXAMPLE2_OBSERVATIONS: usize = 30;
pub const NOMINAL_STIFFNESS: [f64; 3] = [1.5, 1.5, 1.5];
pub const OBSERVATION_STIFFNESS_STD: f64 = 0.2;
const K3: f64 = 1.0;
const K4: f64 = 1.0;
const K6: f64 = 3.0;

pub fn sigmoid_response(x: f64) -> f64 {
    10.0 / (1.0 + (-1.2 * (x - 1.0)).exp())
}

/// `-(5 - R(x))² / (2·0.2²)`, without the Gaussian normalizing constant.
pub fn example1_loglik(x: f64) -> f64 {
    let r = 5.0 - sigmoid_response(x);
    -r * r / (2.0 * EXAMPLE1_SIGMA_EPS * EXAMPLE1_SIGMA_EPS)
}

pub fn example1_prior() -> PriorSpec {
    PriorSpec::new(vec![MarginalPrior::Gaussian { mean: 1.5, std: 2.0 }]).expect("valid prior")
}

pub fn example2_prior() -> PriorSpec {
    PriorSpec::new(vec![MarginalPrior::Gaussian { mean: 2.0, std: 0.3 }; 3]).expect("valid prior")
}

pub fn stiffness_matrix(k1: f64, k2: f64, k5: f64) -> [[f64; 3]; 3] {
    [[k1 + K4 + K6, -K4, -K6], [-K4, k2 + K4 + k5, -k5], [-K6, -k5, K3 + k5 + K6]]
}

/// Natural frequencies in Hz (ascending) for unit masses.
pub fn mass_spring_frequencies(k1: f64, k2: f64, k5: f64) -> Result<[f64; 3]> {
    if !(k1 > 0.0 && k2 > 0.0 && k5 > 0.0) {
        return Err(Error::NonPhysical(vec![k1, k2, k5]));
    }
    frequencies_of(&stiffness_matrix(k1, k2, k5), &[k1, k2, k5])
}

fn frequencies_of(k: &[[f64; 3]; 3], params: &[f64]) -> Result<[f64; 3]> {
    let lambda = symmetric_eigenvalues(k);
    if !(lambda[0] > 0.0) {
        return Err(Error::NonPhysical(params.to_vec()));
    }
    Ok(lambda.map(|l| l.sqrt() / (2.0 * std::f64::consts::PI)))
}

/// Thirty observation rows: frequencies of stiffness draws around the
/// nominal values, redrawn while any stiffness is non-positive.
pub fn generate_observations<R: Rng + ?Sized>(rng: &mut R) -> Vec<[f64; 3]> {
    (0..EXAMPLE2_OBSERVATIONS)
        .map(|_| loop {
            let k: Vec<f64> = NOMINAL_STIFFNESS
                .iter()
                .map(|&m| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + OBSERVATION_STIFFNESS_STD * z
                })
                .collect();
            if let Ok(f) = mass_spring_frequencies(k[0], k[1], k[2]) {
                break f;
            }
        })
        .collect()
}

/// `-(1/(2σ_ε²)) Σ_r Σ_i (f_obs,i^(r) - f_i(x))²`.
pub fn example2_loglik(x: &[f64], obs: &[[f64; 3]]) -> Result<f64> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: x.len() });
    }
    let f = mass_spring_frequencies(x[0], x[1], x[2])?;
    let ss: f64 = obs.iter().map(|row| row.iter().zip(&f).map(|(o, p)| (o - p).powi(2)).sum::<f64>()).sum();
    Ok(-ss / (2.0 * EXAMPLE2_SIGMA_EPS * EXAMPLE2_SIGMA_EPS))
}

/// Example 1 as a [`LogLikelihood`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Example1;

impl LogLikelihood for Example1 {
    fn dim(&self) -> usize {
        1
    }
    fn log_likelihood(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: x.len() });
        }
        Ok(example1_loglik(x[0]))
    }
    fn metadata(&self) -> ModelMetadata {
        ModelMetadata {
            name: "example1".into(),
            sigma_eps: Some(EXAMPLE1_SIGMA_EPS),
            observations: Some(vec![vec![sigmoid_response(1.0)]]),
        }
    }
}

/// Example 2 with a fixed observation matrix.
#[derive(Debug, Clone)]
pub struct Example2 {
    observations: Vec<[f64; 3]>,
}

impl Example2 {
    pub fn new(observations: Vec<[f64; 3]>) -> Self {
        Self { observations }
    }

    pub fn from_seed(seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self::new(generate_observations(&mut rng))
    }

    pub fn observations(&self) -> &[[f64; 3]] {
        &self.observations
    }
}

impl LogLikelihood for Example2 {
    fn dim(&self) -> usize {
        3
    }
    fn log_likelihood(&mut self, x: &[f64]) -> Result<f64> {
        example2_loglik(x, &self.observations)
    }
    fn metadata(&self) -> ModelMetadata {
        ModelMetadata {
            name: "example2".into(),
            sigma_eps: Some(EXAMPLE2_SIGMA_EPS),
            observations: Some(self.observations.iter().map(|r| r.to_vec()).collect()),
        }
    }
}

/// Likelihood identically one.
#[derive(Debug, Clone, Copy)]
pub struct Flat {
    pub dim: usize,
}

impl LogLikelihood for Flat {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_likelihood(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(0.0)
    }
    fn metadata(&self) -> ModelMetadata {
        ModelMetadata { name: "flat".into(), ..Default::default() }
    }
}
