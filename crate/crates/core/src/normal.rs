//! Standard normal distribution functions.
//!
//! The CDF is built on the `erfc` rational approximation from `libm`
//! (a port of the fdlibm routine, accurate to about one ulp). The quantile
//! starts from Acklam's rational approximation and is polished with two
//! Halley steps against the CDF, which brings it to near machine precision.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

#[inline]
pub fn ln_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - cdf(x)` without cancellation.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

fn acklam(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Inverse of [`cdf`]. Requires `0 < p < 1`; returns NaN otherwise.
pub fn quantile(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        return f64::NAN;
    }
    let mut x = acklam(p);
    // Halley refinement; the upper half is refined on the survival function
    // so that p close to 1 keeps its relative accuracy.
    for _ in 0..2 {
        let e = if x > 0.0 { (1.0 - p) - sf(x) } else { cdf(x) - p };
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    // Trapezoid-free oracle: Simpson integration of the density from 0.
    fn cdf_by_simpson(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let mut s = pdf(0.0) + pdf(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * pdf(i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    fn quantile_by_bisection(p: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf_by_simpson(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cdf_matches_simpson_oracle() {
        for &x in &[-6.0, -3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.5, 5.0] {
            let got = cdf(x);
            let want = cdf_by_simpson(x);
            assert!((got - want).abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        // 0.975 → 1.959964 with the bisection oracle.
        let z = quantile(0.975);
        let oracle = quantile_by_bisection(0.975);
        assert!((z - oracle).abs() < 1e-10);
        assert!((z - 1.959_964).abs() < 1e-6);
        for &p in &[1e-5, 0.001, 0.02, 0.3, 0.5, 0.77, 0.99, 1.0 - 1e-5] {
            let z = quantile(p);
            let o = quantile_by_bisection(p);
            assert!((z - o).abs() < 1e-9, "p={p}: {z} vs {o}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = quantile(p);
            assert!((cdf(x) - p).abs() < 1e-15 + 1e-12 * p);
        }
        assert!(quantile(0.0).is_nan());
        assert!(quantile(1.0).is_nan());
    }

    #[test]
    fn deep_tails() {
        let z = quantile(1e-300);
        assert!((cdf(z) / 1e-300 - 1.0).abs() < 1e-9);
        let p = 2f64.powi(-40);
        assert!((quantile(1.0 - p) + quantile(p)).abs() < 1e-9);
    }
}
