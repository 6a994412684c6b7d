//! Gaussian-process surrogate of the log-likelihood.
//!
//! Constant prior mean `β` and a squared-exponential kernel
//! `σ0² exp(-½ Σ_j ((x_j - x'_j)/l_j)²)`. Hyperparameters are fitted by
//! maximizing the marginal likelihood with `β` and `σ0` profiled out in
//! closed form, leaving a multi-start Nelder–Mead search over the log
//! lengthscales. Inputs are standardized per dimension before the kernel is
//! evaluated, so fitted lengthscales live in standardized units.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lowdisc::hammersley;
use crate::optim::{multi_start, NelderMead};
use crate::points::PointSet;

/// `V = [β, σ0, l_1..l_d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub beta: f64,
    pub sigma0: f64,
    pub lengthscales: Vec<f64>,
}

impl Hyperparams {
    pub fn new(beta: f64, sigma0: f64, lengthscales: Vec<f64>) -> Result<Self> {
        let hp = Self { beta, sigma0, lengthscales };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite, got {}", self.beta)));
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma0 must be > 0, got {}", self.sigma0)));
        }
        if self.lengthscales.is_empty() || self.lengthscales.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "lengthscales must be positive, got {:?}",
                self.lengthscales
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }
}

/// Squared-exponential kernel `σ0² exp(-½ Σ ((x_j - x2_j)/l_j)²)`.
pub fn kernel(x: &[f64], x2: &[f64], hp: &Hyperparams) -> Result<f64> {
    if x.len() != hp.dim() || x2.len() != hp.dim() {
        return Err(Error::DimensionMismatch { expected: hp.dim(), got: x.len().max(x2.len()) });
    }
    Ok(hp.sigma0 * hp.sigma0 * correlation(x, x2, &inverse(&hp.lengthscales)))
}

#[inline]
fn correlation(x: &[f64], x2: &[f64], inv_ls: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((&a, &b), &il) in x.iter().zip(x2).zip(inv_ls) {
        let t = (a - b) * il;
        s += t * t;
    }
    (-0.5 * s).exp()
}

fn inverse(ls: &[f64]) -> Vec<f64> {
    ls.iter().map(|l| 1.0 / l).collect()
}

/// Paired design points and log-likelihood values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    inputs: PointSet,
    outputs: Vec<f64>,
}

impl TrainingSet {
    /// Validates finiteness, matching lengths and pairwise-distinct rows.
    /// A single point is accepted here; [`fit`] requires at least two.
    pub fn new(inputs: PointSet, outputs: Vec<f64>) -> Result<Self> {
        if inputs.len() != outputs.len() {
            return Err(Error::InvalidTrainingSet(format!(
                "{} inputs but {} outputs",
                inputs.len(),
                outputs.len()
            )));
        }
        if inputs.is_empty() {
            return Err(Error::InvalidTrainingSet("no training points".into()));
        }
        if inputs.as_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrainingSet("non-finite input".into()));
        }
        if let Some(i) = outputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTrainingSet(format!(
                "non-finite output {} at {:?}",
                outputs[i],
                inputs.row(i)
            )));
        }
        for i in 1..inputs.len() {
            for k in 0..i {
                if inputs.row(i) == inputs.row(k) {
                    return Err(Error::InvalidTrainingSet(format!(
                        "duplicate input {:?} at rows {k} and {i}",
                        inputs.row(i)
                    )));
                }
            }
        }
        Ok(Self { inputs, outputs })
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrainingSet(format!("non-finite pair {x:?} -> {y}")));
        }
        if self.inputs.rows().any(|r| r == x) {
            return Err(Error::InvalidTrainingSet(format!("duplicate input {x:?}")));
        }
        self.inputs.push(x)?;
        self.outputs.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.dim()
    }

    pub fn inputs(&self) -> &PointSet {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// Rows in lexicographic input order.
    pub fn sorted(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (self.inputs.row(a), self.inputs.row(b));
            ra.iter().zip(rb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
        });
        Self { inputs: self.inputs.select(&order), outputs: order.iter().map(|&i| self.outputs[i]).collect() }
    }
}

/// Per-dimension affine map applied to inputs before kernel evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn identity(d: usize) -> Self {
        Self { shift: vec![0.0; d], scale: vec![1.0; d] }
    }

    /// Shift by the column mean and scale by the column standard deviation
    /// (population form); constant columns keep scale 1.
    pub fn from_inputs(inputs: &PointSet) -> Self {
        let n = inputs.len() as f64;
        let (shift, scale) = (0..inputs.dim())
            .map(|j| {
                let col = inputs.column(j);
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                (mean, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
            })
            .unzip();
        Self { shift, scale }
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, &v), &m), &s) in out.iter_mut().zip(x).zip(&self.shift).zip(&self.scale) {
            *o = (v - m) / s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub n_starts: usize,
    /// Lengthscale search interval in standardized units.
    pub lengthscale_bounds: (f64, f64),
    pub optimizer: NelderMead,
    /// Initial nugget relative to `σ0²`.
    pub nugget_start: f64,
    /// Largest relative nugget tried before giving up.
    pub nugget_max: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 8,
            lengthscale_bounds: (1e-3, 1e3),
            optimizer: NelderMead { max_iters: 300, f_tol: 1e-9, x_tol: 1e-7, initial_step: 0.1 },
            nugget_start: 1e-10,
            nugget_max: 1e-4,
        }
    }
}

/// Cholesky factor of the unit-variance correlation matrix plus nugget.
struct Factor {
    l: DMatrix<f64>,
    nugget: f64,
}

fn correlation_matrix(x: &PointSet, inv_ls: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut r = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for k in 0..i {
            let c = correlation(x.row(i), x.row(k), inv_ls);
            r[(i, k)] = c;
            r[(k, i)] = c;
        }
    }
    r
}

fn factorize(r: &DMatrix<f64>, nugget_start: f64, nugget_max: f64) -> Option<Factor> {
    let mut nugget = nugget_start;
    while nugget <= nugget_max * (1.0 + 1e-12) {
        let mut m = r.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += nugget;
        }
        if let Some(ch) = m.cholesky() {
            return Some(Factor { l: ch.unpack(), nugget });
        }
        nugget *= 10.0;
    }
    None
}

fn solve_factor(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let y = l.solve_lower_triangular(b).expect("nonsingular triangular factor");
    l.tr_solve_lower_triangular(&y).expect("nonsingular triangular factor")
}

fn log_det(l: &DMatrix<f64>) -> f64 {
    2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Log marginal likelihood of `train` under `hp` with a nugget of
/// `nugget · σ0²` on the diagonal, escalated by ×10 up to `1e-4` on
/// factorization failure. Inputs are used as given (no standardization).
pub fn log_marginal_likelihood(train: &TrainingSet, hp: &Hyperparams) -> Result<f64> {
    let cfg = FitConfig::default();
    log_marginal_likelihood_with(train, hp, cfg.nugget_start, cfg.nugget_max)
}

pub fn log_marginal_likelihood_with(
    train: &TrainingSet,
    hp: &Hyperparams,
    nugget_start: f64,
    nugget_max: f64,
) -> Result<f64> {
    hp.validate()?;
    if hp.dim() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), got: hp.dim() });
    }
    let r = correlation_matrix(train.inputs(), &inverse(&hp.lengthscales));
    let f = factorize(&r, nugget_start, nugget_max).ok_or_else(|| factorization_error(train, nugget_max))?;
    let n = train.len() as f64;
    let s2 = hp.sigma0 * hp.sigma0;
    let resid = DVector::from_iterator(train.len(), train.outputs().iter().map(|y| y - hp.beta));
    let alpha = solve_factor(&f.l, &resid);
    let quad = resid.dot(&alpha) / s2;
    Ok(-0.5 * quad - 0.5 * (log_det(&f.l) + n * s2.ln()) - 0.5 * n * (2.0 * PI).ln())
}

/// Gradient of [`log_marginal_likelihood`] with respect to
/// `(β, ln σ0, ln l_1, ..., ln l_d)`, at the initial nugget.
pub fn log_marginal_likelihood_gradient(train: &TrainingSet, hp: &Hyperparams) -> Result<Vec<f64>> {
    hp.validate()?;
    let d = train.dim();
    if hp.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: hp.dim() });
    }
    let n = train.len();
    let s2 = hp.sigma0 * hp.sigma0;
    let inv_ls = inverse(&hp.lengthscales);
    let r = correlation_matrix(train.inputs(), &inv_ls);
    let cfg = FitConfig::default();
    let f = factorize(&r, cfg.nugget_start, cfg.nugget_start).ok_or_else(|| factorization_error(train, cfg.nugget_start))?;
    let mut k = r.clone() * s2;
    for i in 0..n {
        k[(i, i)] += f.nugget * s2;
    }
    let chol = k.clone().cholesky().ok_or_else(|| factorization_error(train, f.nugget))?;
    let k_inv = chol.inverse();
    let resid = DVector::from_iterator(n, train.outputs().iter().map(|y| y - hp.beta));
    let alpha = &k_inv * &resid;
    // ½ tr((ααᵀ - K⁻¹) dK)
    let inner = &alpha * alpha.transpose() - &k_inv;
    let half_trace = |dk: &DMatrix<f64>| 0.5 * inner.component_mul(dk).sum();

    let mut grad = Vec::with_capacity(d + 2);
    grad.push(alpha.sum());
    grad.push(half_trace(&(k.clone() * 2.0)));
    let x = train.inputs();
    for j in 0..d {
        let mut dk = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for m in 0..n {
                let t = (x.row(i)[j] - x.row(m)[j]) * inv_ls[j];
                dk[(i, m)] = s2 * r[(i, m)] * t * t;
            }
        }
        grad.push(half_trace(&dk));
    }
    Ok(grad)
}

fn factorization_error(train: &TrainingSet, nugget: f64) -> Error {
    Error::Factorization { nugget, design: train.inputs().to_rows() }
}

/// Fitted GP surrogate: hyperparameters, cached factorization and weights.
#[derive(Debug, Clone)]
pub struct GpModel {
    hyperparams: Hyperparams,
    train: TrainingSet,
    standardization: Standardization,
    nugget: f64,
    std_inputs: PointSet,
    inv_ls: Vec<f64>,
    /// Row-major lower Cholesky factor of `R + nugget·I` (unit variance).
    l_rows: Vec<f64>,
    /// `(R + nugget·I)⁻¹ (𝔏 - β)`.
    alpha_unit: Vec<f64>,
}

impl GpModel {
    /// Conditions a GP with fixed hyperparameters on `train`. The
    /// hyperparameters act on standardized inputs.
    pub fn with_hyperparams(train: TrainingSet, hp: Hyperparams, standardization: Standardization) -> Result<Self> {
        let cfg = FitConfig::default();
        Self::with_hyperparams_and_nugget(train, hp, standardization, cfg.nugget_start, cfg.nugget_max)
    }

    fn with_hyperparams_and_nugget(
        train: TrainingSet,
        hp: Hyperparams,
        standardization: Standardization,
        nugget_start: f64,
        nugget_max: f64,
    ) -> Result<Self> {
        hp.validate()?;
        let d = train.dim();
        if hp.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: hp.dim() });
        }
        if standardization.shift.len() != d || standardization.scale.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: standardization.shift.len() });
        }
        let train = train.sorted();
        let std_inputs = standardize_all(&standardization, train.inputs());
        let inv_ls = inverse(&hp.lengthscales);
        let r = correlation_matrix(&std_inputs, &inv_ls);
        let f = factorize(&r, nugget_start, nugget_max).ok_or_else(|| factorization_error(&train, nugget_max))?;
        let resid = DVector::from_iterator(train.len(), train.outputs().iter().map(|y| y - hp.beta));
        let alpha = solve_factor(&f.l, &resid);
        let n = train.len();
        let mut l_rows = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..=i {
                l_rows[i * n + k] = f.l[(i, k)];
            }
        }
        Ok(Self {
            hyperparams: hp,
            train,
            standardization,
            nugget: f.nugget,
            std_inputs,
            inv_ls,
            l_rows,
            alpha_unit: alpha.iter().copied().collect(),
        })
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    /// Training data, rows sorted lexicographically so that results do not
    /// depend on insertion order.
    pub fn train(&self) -> &TrainingSet {
        &self.train
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    /// Nugget actually used, relative to `σ0²`.
    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn dim(&self) -> usize {
        self.train.dim()
    }

    /// Lower Cholesky factor of `K + nugget·σ0²·I`.
    pub fn chol_factor(&self) -> DMatrix<f64> {
        let n = self.train.len();
        DMatrix::from_row_slice(n, n, &self.l_rows) * self.hyperparams.sigma0
    }

    /// `K + nugget·σ0²·I` on the training inputs.
    pub fn regularized_kernel_matrix(&self) -> DMatrix<f64> {
        let s2 = self.hyperparams.sigma0.powi(2);
        let mut k = correlation_matrix(&self.std_inputs, &self.inv_ls) * s2;
        for i in 0..k.nrows() {
            k[(i, i)] += self.nugget * s2;
        }
        k
    }

    /// `α = K⁻¹ (𝔏 - β·1)`.
    pub fn weights(&self) -> Vec<f64> {
        let s2 = self.hyperparams.sigma0.powi(2);
        self.alpha_unit.iter().map(|a| a / s2).collect()
    }

    /// Posterior mean and standard deviation at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let mut scratch = Scratch::new(self.dim(), self.train.len());
        Ok(self.predict_with(x, &mut scratch))
    }

    /// Row-wise [`predict`](Self::predict) over `xs`.
    pub fn predict_batch(&self, xs: &PointSet) -> Result<(Vec<f64>, Vec<f64>)> {
        if xs.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: xs.dim() });
        }
        const CHUNK: usize = 512;
        let pairs: Vec<(f64, f64)> = xs
            .as_flat()
            .par_chunks(CHUNK * self.dim())
            .flat_map_iter(|block| {
                let mut scratch = Scratch::new(self.dim(), self.train.len());
                block
                    .chunks_exact(self.dim())
                    .map(|x| self.predict_with(x, &mut scratch))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(pairs.into_iter().unzip())
    }

    fn predict_with(&self, x: &[f64], s: &mut Scratch) -> (f64, f64) {
        let n = self.train.len();
        self.standardization.apply_into(x, &mut s.z);
        for (i, ki) in s.k.iter_mut().enumerate() {
            *ki = correlation(&s.z, self.std_inputs.row(i), &self.inv_ls);
        }
        let mean = self.hyperparams.beta + s.k.iter().zip(&self.alpha_unit).map(|(a, b)| a * b).sum::<f64>();
        // Forward substitution L v = k.
        let mut vv = 0.0;
        for i in 0..n {
            let row = &self.l_rows[i * n..i * n + i];
            let acc: f64 = row.iter().zip(&s.v[..i]).map(|(a, b)| a * b).sum();
            let vi = (s.k[i] - acc) / self.l_rows[i * n + i];
            s.v[i] = vi;
            vv += vi * vi;
        }
        let var = (1.0 - vv).max(0.0);
        (mean, self.hyperparams.sigma0 * var.sqrt())
    }
}

struct Scratch {
    z: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
}

impl Scratch {
    fn new(d: usize, n: usize) -> Self {
        Self { z: vec![0.0; d], k: vec![0.0; n], v: vec![0.0; n] }
    }
}

fn standardize_all(st: &Standardization, xs: &PointSet) -> PointSet {
    let mut out = PointSet::with_capacity(xs.dim(), xs.len());
    for r in xs.rows() {
        out.push(&st.apply(r)).expect("same dimension");
    }
    out
}

/// Profiled objective: for fixed lengthscales, `β` is the generalized
/// least-squares estimate and `σ0²` the closed-form maximizer.
struct Profile {
    beta: f64,
    sigma0_sq: f64,
    lml: f64,
}

/// Largest training-point residual of the posterior mean accepted during the
/// strict search, relative to `range(𝔏) + 1`.
const INTERPOLATION_TOL: f64 = 1e-7;

/// `strict` rejects lengthscales that need more than the starting nugget or
/// whose mean misses a training output by more than the interpolation
/// tolerance (the residual at point `i` is exactly `nugget · α_i`).
fn profile(x: &PointSet, y: &DVector<f64>, inv_ls: &[f64], strict: bool, cfg: &FitConfig, sigma_floor_sq: f64) -> Option<Profile> {
    let n = y.len();
    let r = correlation_matrix(x, inv_ls);
    let f = factorize(&r, cfg.nugget_start, if strict { cfg.nugget_start } else { cfg.nugget_max })?;
    let ones = DVector::from_element(n, 1.0);
    let r_inv_one = solve_factor(&f.l, &ones);
    let r_inv_y = solve_factor(&f.l, y);
    let beta = r_inv_y.sum() / r_inv_one.sum();
    if !beta.is_finite() {
        return None;
    }
    let resid = y.map(|v| v - beta);
    let alpha = solve_factor(&f.l, &resid);
    if strict {
        let range = y.max() - y.min();
        if f.nugget * alpha.amax() > INTERPOLATION_TOL * (range + 1.0) {
            return None;
        }
    }
    let quad = resid.dot(&alpha).max(0.0);
    let sigma0_sq = (quad / n as f64).max(sigma_floor_sq);
    let nf = n as f64;
    let lml = -0.5 * quad / sigma0_sq - 0.5 * (log_det(&f.l) + nf * sigma0_sq.ln()) - 0.5 * nf * (2.0 * PI).ln();
    lml.is_finite().then_some(Profile { beta, sigma0_sq, lml })
}

/// Maximum-likelihood fit of the hyperparameters followed by conditioning on
/// `train`. Deterministic: the start points form a fixed Hammersley set in
/// the log-lengthscale box.
pub fn fit(train: &TrainingSet, cfg: &FitConfig) -> Result<GpModel> {
    if train.len() < 2 {
        return Err(Error::InvalidTrainingSet(format!("fit needs at least 2 points, got {}", train.len())));
    }
    let train = &train.sorted();
    let d = train.dim();
    let st = Standardization::from_inputs(train.inputs());
    let xs = standardize_all(&st, train.inputs());
    let y = DVector::from_column_slice(train.outputs());
    let scale = train.outputs().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let sigma_floor_sq = 1e-20 * scale * scale;

    let (lmin, lmax) = cfg.lengthscale_bounds;
    let lo = vec![lmin.ln(); d];
    let hi = vec![lmax.ln(); d];
    let n_starts = cfg.n_starts.max(1);
    // Cell-centred Hammersley points keep the starts off the box corners.
    let starts: Vec<Vec<f64>> = hammersley(n_starts, d)
        .rows()
        .map(|u| {
            u.iter()
                .enumerate()
                .map(|(j, &t)| {
                    let c = (t + 0.5 / n_starts as f64).fract();
                    lo[j] + c * (hi[j] - lo[j])
                })
                .collect()
        })
        .collect();

    // The relaxed search only runs when no start satisfies the strict one.
    let search = |strict: bool| {
        let objective = |theta: &[f64]| -> f64 {
            let ls: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
            match profile(&xs, &y, &inverse(&ls), strict, cfg, sigma_floor_sq) {
                Some(p) => -p.lml,
                None => f64::INFINITY,
            }
        };
        multi_start(&cfg.optimizer, objective, &starts, &lo, &hi).filter(|m| m.value.is_finite()).map(|m| (m, strict))
    };
    let (best, strict) = search(true)
        .or_else(|| search(false))
        .ok_or_else(|| factorization_error(train, cfg.nugget_max))?;

    let lengthscales: Vec<f64> = best.x.iter().map(|t| t.exp()).collect();
    let p = profile(&xs, &y, &inverse(&lengthscales), strict, cfg, sigma_floor_sq)
        .ok_or_else(|| factorization_error(train, cfg.nugget_max))?;
    let hp = Hyperparams { beta: p.beta, sigma0: p.sigma0_sq.sqrt(), lengthscales };
    GpModel::with_hyperparams_and_nugget(train.clone(), hp, st, cfg.nugget_start, cfg.nugget_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(rows: &[&[f64]], y: &[f64]) -> TrainingSet {
        TrainingSet::new(PointSet::from_rows(rows).unwrap(), y.to_vec()).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let hp = Hyperparams::new(0.0, 1.0, vec![1.0]).unwrap();
        assert_eq!(kernel(&[0.3], &[0.3], &hp).unwrap(), 1.0);
        assert!((kernel(&[0.0], &[1.0], &hp).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        let hp = Hyperparams::new(0.0, 2.0, vec![0.5, 3.0]).unwrap();
        let (a, b) = ([0.1, -2.0], [1.3, 0.4]);
        assert_eq!(kernel(&a, &b, &hp).unwrap(), kernel(&b, &a, &hp).unwrap());
        assert!(kernel(&a, &b, &hp).unwrap() <= 4.0);
        assert!(kernel(&a, &[1.0], &hp).is_err());
    }

    #[test]
    fn training_set_validation() {
        let dup = TrainingSet::new(PointSet::from_rows(&[[1.0], [1.0]]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(dup, Err(Error::InvalidTrainingSet(_))));
        let nan = TrainingSet::new(PointSet::from_rows(&[[1.0], [2.0]]).unwrap(), vec![0.0, f64::NAN]);
        assert!(nan.is_err());
        let short = TrainingSet::new(PointSet::from_rows(&[[1.0], [2.0]]).unwrap(), vec![0.0]);
        assert!(short.is_err());
        let mut ok = ts(&[&[0.0]], &[1.0]);
        assert!(ok.push(&[0.0], 2.0).is_err());
        ok.push(&[1.0], 2.0).unwrap();
        assert_eq!(ok.len(), 2);
        assert!(fit(&ts(&[&[0.0]], &[1.0]), &FitConfig::default()).is_err());
    }

    #[test]
    fn lml_one_point_is_normal_density() {
        let train = ts(&[&[0.4]], &[2.5]);
        let hp = Hyperparams::new(1.0, 1.5, vec![0.7]).unwrap();
        let var = 1.5f64.powi(2) * (1.0 + 1e-10);
        let want = -0.5 * (2.5 - 1.0f64).powi(2) / var - 0.5 * (2.0 * PI * var).ln();
        assert!((log_marginal_likelihood(&train, &hp).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn one_point_predict_closed_form() {
        let train = ts(&[&[0.0]], &[3.0]);
        let hp = Hyperparams::new(1.0, 2.0, vec![0.5]).unwrap();
        let m = GpModel::with_hyperparams(train, hp.clone(), Standardization::identity(1)).unwrap();
        let x = 0.3;
        let k = 4.0 * (-0.5 * (x / 0.5f64).powi(2)).exp();
        let denom = 4.0 * (1.0 + 1e-10);
        let want_mean = 1.0 + k / denom * (3.0 - 1.0);
        let want_var = 4.0 - k * k / denom;
        let (mean, sd) = m.predict(&[x]).unwrap();
        assert!((mean - want_mean).abs() < 1e-12);
        assert!((sd - want_var.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn cholesky_reproduces_kernel() {
        let train = ts(&[&[0.0, 1.0], &[0.5, -1.0], &[2.0, 0.3], &[1.1, 1.1]], &[1.0, -2.0, 0.5, 0.0]);
        let m = fit(&train, &FitConfig::default()).unwrap();
        let l = m.chol_factor();
        let k = m.regularized_kernel_matrix();
        let rel = (&l * l.transpose() - &k).norm() / k.norm();
        assert!(rel < 1e-8, "{rel}");
        let w = m.weights();
        let r: Vec<f64> = m.train().outputs().iter().map(|y| y - m.hyperparams().beta).collect();
        let kw = &k * DVector::from_vec(w);
        for (a, b) in kw.iter().zip(&r) {
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn fit_constant_outputs() {
        let train = ts(&[&[0.0], &[1.0], &[2.5], &[4.0]], &[-7.0; 4]);
        let m = fit(&train, &FitConfig::default()).unwrap();
        assert!((m.hyperparams().beta + 7.0).abs() < 1e-9);
        for x in [0.0, 0.7, 1.9, 3.3, 10.0] {
            let (mean, sd) = m.predict(&[x]).unwrap();
            assert!((mean + 7.0).abs() < 1e-8);
            assert!(sd < 1e-6);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let train = ts(&[&[0.0], &[0.8], &[1.7], &[3.0], &[4.2]], &[0.0, 0.7, 1.0, 0.1, -0.9]);
        let a = fit(&train, &FitConfig::default()).unwrap();
        let b = fit(&train, &FitConfig::default()).unwrap();
        assert_eq!(a.hyperparams(), b.hyperparams());
    }

    #[test]
    fn sine_fit_rmse() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64 * 2.0 * PI / 7.0).collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let train = TrainingSet::new(PointSet::from_rows(&rows).unwrap(), xs.iter().map(|x| x.sin()).collect()).unwrap();
        let m = fit(&train, &FitConfig::default()).unwrap();
        let grid: Vec<f64> = (0..=1000).map(|i| i as f64 * 2.0 * PI / 1000.0).collect();
        let mse = grid.iter().map(|&x| (m.predict(&[x]).unwrap().0 - x.sin()).powi(2)).sum::<f64>() / grid.len() as f64;
        assert!(mse.sqrt() < 0.1, "rmse {}", mse.sqrt());
    }

    #[test]
    fn far_field_reverts_to_prior() {
        let train = ts(&[&[0.0], &[1.0], &[2.0]], &[1.0, 3.0, 2.0]);
        let m = fit(&train, &FitConfig::default()).unwrap();
        let hp = m.hyperparams();
        let far = 1e3 * hp.lengthscales[0] * m.standardization().scale[0];
        let (mean, sd) = m.predict(&[far]).unwrap();
        assert!((mean - hp.beta).abs() < 1e-9);
        assert!((sd - hp.sigma0).abs() < 1e-9 * hp.sigma0);
    }

    #[test]
    fn batch_matches_pointwise() {
        let train = ts(&[&[0.0, 0.0], &[1.0, 0.5], &[0.2, 2.0], &[1.5, 1.5]], &[0.0, -3.0, -1.0, -10.0]);
        let m = fit(&train, &FitConfig::default()).unwrap();
        let mut q = PointSet::new(2);
        for i in 0..1500 {
            q.push(&[(i as f64 * 0.37).sin() * 2.0, (i as f64 * 0.11).cos() * 2.0]).unwrap();
        }
        let (means, sds) = m.predict_batch(&q).unwrap();
        for (i, x) in q.rows().enumerate() {
            let (mu, sd) = m.predict(x).unwrap();
            assert!((mu - means[i]).abs() <= 1e-12 * (1.0 + mu.abs()));
            assert!((sd - sds[i]).abs() <= 1e-12 * (1.0 + sd));
        }
        let (tm, _) = m.predict_batch(train.inputs()).unwrap();
        for (a, b) in tm.iter().zip(train.outputs()) {
            assert!((a - b).abs() < 1e-6 * 11.0);
        }
    }
}
