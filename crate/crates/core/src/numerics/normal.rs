use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF, via the complementary error function so the lower
/// tail keeps full relative precision.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    std_normal_log_pdf(x).exp()
}

pub fn std_normal_log_pdf(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Standard normal quantile. Fails outside the open unit interval.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs p in (0,1), got {p}"
        )));
    }
    Ok(quantile_unchecked(p))
}

/// Quantile for callers that already guarantee `p` in (0,1).
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        // 1 - p is exact here, and the lower tail keeps full precision
        return -quantile_unchecked(1.0 - p);
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // one Halley step against the accurate CDF
    let r = (std_normal_cdf(x) - p) / std_normal_pdf(x);
    x - r / (1.0 + 0.5 * x * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erfc(x) for x >= 0 by the continued fraction (large x) or the
    /// Maclaurin series of erf (small x), summed in extended steps.
    fn erfc_oracle(x: f64) -> f64 {
        if x < 0.0 {
            return 2.0 - erfc_oracle(-x);
        }
        if x < 3.0 {
            // erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1))
            let mut term = x;
            let mut sum = x;
            let mut n = 0.0;
            loop {
                n += 1.0;
                term *= -x * x / n;
                let add = term / (2.0 * n + 1.0);
                sum += add;
                if add.abs() < 1e-18 {
                    break;
                }
            }
            1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
        } else {
            // Lentz evaluation of the continued fraction
            // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
            let mut f = x;
            for k in (1..200).rev() {
                f = x + (k as f64 / 2.0) / f;
            }
            (-x * x).exp() / std::f64::consts::PI.sqrt() / f
        }
    }

    fn cdf_oracle(x: f64) -> f64 {
        0.5 * erfc_oracle(-x / SQRT_2)
    }

    #[test]
    fn cdf_matches_series_oracle() {
        for i in -80..=80 {
            let x = i as f64 / 10.0;
            let got = std_normal_cdf(x);
            let want = cdf_oracle(x);
            assert!((got - want).abs() <= 1e-12, "x={x} got={got} want={want}");
        }
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(1.959964) - 0.975).abs() < 1e-7);
        let tail = std_normal_cdf(-8.0);
        assert!(tail < 1e-14 && tail > 0.0);
        assert!((tail - cdf_oracle(-8.0)).abs() / cdf_oracle(-8.0) < 1e-10);
    }

    #[test]
    fn quantile_matches_bisection() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf_oracle(mid) < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = std_normal_quantile(0.975).unwrap();
        assert!((q - lo).abs() < 1e-9);
        assert!((q - 1.959964).abs() < 1e-6);
        for p in [1e-12, 1e-6, 0.01, 0.3, 0.77, 0.999_999] {
            let x = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() <= 1e-10 * p.max(1e-3), "p={p}");
        }
    }

    #[test]
    fn quantile_domain_errors() {
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
        assert!(std_normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn round_trip_on_grid() {
        for i in -600..=600 {
            let x = i as f64 / 100.0;
            let p = std_normal_cdf(x);
            let back = std_normal_quantile(p).unwrap();
            // above ~5.3 the rounding of p itself (half an ulp near 1)
            // moves the quantile by more than 1e-9
            let tol = 1e-9_f64.max(2.0 * f64::EPSILON * p / std_normal_pdf(x));
            assert!((back - x).abs() < tol, "x={x} back={back}");
        }
    }
}
