//! Hammersley point sets.

use crate::points::PointSet;

/// Radical inverse of `i` in base `base`: the base-`b` digits of `i`
/// mirrored about the radix point.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut factor = inv_base;
    let mut value = 0.0;
    while i > 0 {
        value += (i % base) as f64 * factor;
        i /= base;
        factor *= inv_base;
    }
    value
}

/// The first `k` primes.
pub fn first_primes(k: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(k);
    let mut candidate = 2u64;
    while primes.len() < k {
        if primes.iter().take_while(|&&p| p * p <= candidate).all(|&p| !candidate.is_multiple_of(p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// `n` Hammersley points in `[0,1)^d`. Row `i` is
/// `(i/n, φ₂(i), φ₃(i), φ₅(i), ...)`, unscrambled.
pub fn hammersley(n: usize, d: usize) -> PointSet {
    assert!(n >= 1 && d >= 1, "hammersley requires n >= 1 and d >= 1");
    let bases = first_primes(d - 1);
    let mut out = PointSet::with_capacity(d, n);
    let mut row = vec![0.0; d];
    for i in 0..n {
        row[0] = i as f64 / n as f64;
        for (slot, &b) in row[1..].iter_mut().zip(&bases) {
            *slot = radical_inverse(i as u64, b);
        }
        out.push(&row).expect("row has dimension d");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_rows() {
        let h = hammersley(4, 2);
        assert_eq!(h.row(0), &[0.0, 0.0]);
        assert_eq!(h.row(1), &[0.25, 0.5]);
        let h = hammersley(4, 3);
        assert_eq!(h.row(2)[0], 0.5);
        assert_eq!(h.row(2)[1], 0.25);
        assert!((h.row(2)[2] - 2.0 / 3.0).abs() < 1e-15);
        let h = hammersley(7, 5);
        assert!(h.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn primes() {
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
        assert!(first_primes(0).is_empty());
    }

    #[test]
    fn distinct_and_in_unit_cube() {
        let n = 1 << 20;
        let h = hammersley(n, 2);
        let mut firsts: Vec<f64> = h.column(0);
        assert!(h.as_flat().iter().all(|&v| (0.0..1.0).contains(&v)));
        firsts.dedup();
        assert_eq!(firsts.len(), n);
    }
}
