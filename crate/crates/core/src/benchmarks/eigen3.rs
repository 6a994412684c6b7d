//! Closed-form eigenvalues of symmetric 3×3 matrices.

/// Eigenvalues of the symmetric matrix `a`, ascending. Uses the
/// trigonometric solution of the characteristic cubic.
pub fn symmetric_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    if p2 == 0.0 {
        return [q; 3];
    }
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (0.5 * det).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let largest = q + 2.0 * p * phi.cos();
    let smallest = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let middle = 3.0 * q - largest - smallest;
    [smallest, middle, largest]
}

/// Unit eigenvector of the symmetric matrix `a` for a simple eigenvalue
/// `lambda`: the largest cross product of two rows of `a - λI`.
pub fn symmetric_eigenvector(a: &[[f64; 3]; 3], lambda: f64) -> [f64; 3] {
    let mut m = *a;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    let cross = |u: &[f64; 3], v: &[f64; 3]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let norm2 = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>();
    let candidates = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let best = candidates.iter().max_by(|x, y| norm2(x).total_cmp(&norm2(y))).copied().expect("three candidates");
    let n = norm2(&best).sqrt();
    [best[0] / n, best[1] / n, best[2] / n]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_scalar() {
        let d = [[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(symmetric_eigenvalues(&d), [1.0, 2.0, 3.0]);
        let s = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(symmetric_eigenvalues(&s), [2.0; 3]);
    }

    #[test]
    fn known_spectrum() {
        // Tridiagonal [2,-1;-1,2,-1;-1,2] has eigenvalues 2 - √2, 2, 2 + √2.
        let a = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]];
        let e = symmetric_eigenvalues(&a);
        let want = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (x, y) in e.iter().zip(want) {
            assert!((x - y).abs() < 1e-14);
        }
        for &l in &e {
            let v = symmetric_eigenvector(&a, l);
            for i in 0..3 {
                let r: f64 = (0..3).map(|j| a[i][j] * v[j]).sum::<f64>() - l * v[i];
                assert!(r.abs() < 1e-12);
            }
        }
    }
}
