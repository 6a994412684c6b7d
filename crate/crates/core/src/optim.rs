//! Box-constrained Nelder–Mead simplex minimizer.
//!
//! Trial points are projected onto the box before evaluation, so the
//! objective is never called outside it. NaN objective values are treated
//! as `+inf`.

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMead {
    pub max_iters: usize,
    /// Absolute spread of simplex values below which the run may stop.
    pub f_tol: f64,
    /// Simplex diameter (per coordinate, relative to the box width) below
    /// which the run may stop.
    pub x_tol: f64,
    /// Initial simplex edge as a fraction of the box width per coordinate.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iters: 400, f_tol: 1e-10, x_tol: 1e-10, initial_step: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], lo: &[f64], hi: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let d = x0.len();
        assert!(d >= 1 && lo.len() == d && hi.len() == d);
        let mut evaluations = 0usize;
        let mut eval = |x: &mut Vec<f64>| -> f64 {
            for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
                *v = v.clamp(l, h);
            }
            evaluations += 1;
            let y = f(x);
            if y.is_nan() {
                f64::INFINITY
            } else {
                y
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
        let mut start = x0.to_vec();
        let y0 = eval(&mut start);
        simplex.push((start.clone(), y0));
        for j in 0..d {
            let step = self.initial_step * (hi[j] - lo[j]);
            let mut p = start.clone();
            p[j] = if p[j] + step <= hi[j] { p[j] + step } else { p[j] - step };
            let y = eval(&mut p);
            simplex.push((p, y));
        }

        let mut iterations = 0;
        while iterations < self.max_iters {
            // Stable sort keeps earlier vertices first among ties.
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if self.converged(&simplex, lo, hi) {
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..d)
                .map(|j| simplex[..d].iter().map(|(p, _)| p[j]).sum::<f64>() / d as f64)
                .collect();
            let worst = simplex[d].clone();
            let toward = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&worst.0).map(|(&c, &w)| c + t * (w - c)).collect()
            };

            let mut reflected = toward(-ALPHA);
            let yr = eval(&mut reflected);
            if yr < simplex[0].1 {
                let mut expanded = toward(-ALPHA * GAMMA);
                let ye = eval(&mut expanded);
                simplex[d] = if ye < yr { (expanded, ye) } else { (reflected, yr) };
                continue;
            }
            if yr < simplex[d - 1].1 {
                simplex[d] = (reflected, yr);
                continue;
            }
            let (mut contracted, bound) = if yr < worst.1 {
                (toward(-ALPHA * RHO), yr)
            } else {
                (toward(RHO), worst.1)
            };
            let yc = eval(&mut contracted);
            if yc < bound {
                simplex[d] = (contracted, yc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let mut p: Vec<f64> =
                    best.iter().zip(&vertex.0).map(|(&b, &v)| b + SIGMA * (v - b)).collect();
                let y = eval(&mut p);
                *vertex = (p, y);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum { x, value, iterations, evaluations }
    }

    fn converged(&self, simplex: &[(Vec<f64>, f64)], lo: &[f64], hi: &[f64]) -> bool {
        let spread = simplex.last().unwrap().1 - simplex[0].1;
        if !(spread.is_finite() && spread <= self.f_tol) {
            return false;
        }
        let best = &simplex[0].0;
        simplex[1..].iter().all(|(p, _)| {
            p.iter()
                .zip(best)
                .enumerate()
                .all(|(j, (&a, &b))| (a - b).abs() <= self.x_tol * (hi[j] - lo[j]))
        })
    }
}

/// Runs [`NelderMead::minimize`] from each start and returns the best result.
/// Ties keep the earliest start.
pub fn multi_start<F>(nm: &NelderMead, mut f: F, starts: &[Vec<f64>], lo: &[f64], hi: &[f64]) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut best: Option<Minimum> = None;
    for s in starts {
        let m = nm.minimize(&mut f, s, lo, hi);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead { max_iters: 5000, f_tol: 1e-14, x_tol: 1e-10, ..Default::default() };
        let m = nm.minimize(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &[-5.0, -5.0],
            &[5.0, 5.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn one_dimensional() {
        let m = NelderMead::default().minimize(|x| (x[0] - 0.3).powi(2), &[2.0], &[-3.0], &[3.0]);
        assert!((m.x[0] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn respects_bounds() {
        let m = NelderMead::default().minimize(
            |x| {
                assert!(x[0] >= 1.0 && x[0] <= 2.0 && x[1] >= -1.0 && x[1] <= 0.0);
                x[0] + (x[1] + 5.0).powi(2)
            },
            &[1.5, -0.5],
            &[1.0, -1.0],
            &[2.0, 0.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-8 && (m.x[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn nan_is_treated_as_infinite() {
        let m = NelderMead::default().minimize(
            |x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 1.0).powi(2) },
            &[0.5],
            &[-2.0],
            &[3.0],
        );
        assert!((m.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn multi_start_picks_global() {
        let f = |x: &[f64]| (x[0] * x[0] - 1.0).powi(2) + 0.1 * x[0];
        let starts = vec![vec![0.9], vec![-0.9]];
        let m = multi_start(&NelderMead::default(), f, &starts, &[-2.0], &[2.0]).unwrap();
        assert!(m.x[0] < 0.0);
    }
}
