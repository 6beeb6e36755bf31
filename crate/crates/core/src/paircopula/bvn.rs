//! Bivariate standard normal upper-orthant probability, after Genz's BVNU
//! (Drezner–Wesolowsky with a tail expansion for |r| > 0.925).

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::numerics::{gauss_legendre, std_normal_cdf, GaussLegendre};

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// P(X > h, Y > k) for standard normals with correlation `r`.
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let gl = rule();
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = 0.5 * r.asin();
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                let sn = (asr * (1.0 + x)).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
            bvn *= asr / (2.0 * PI);
        }
        return (bvn + std_normal_cdf(-h) * std_normal_cdf(-k)).clamp(0.0, 1.0);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 80.0;
        let asr = -0.5 * (bs / as_ + hk);
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
        }
        if hk > -100.0 {
            let b = bs.sqrt();
            let sp = (2.0 * PI).sqrt() * std_normal_cdf(-b / a);
            bvn -= (-0.5 * hk).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a *= 0.5;
        let mut acc = 0.0;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let xs = (a * (1.0 + x)).powi(2);
            let asr = -0.5 * (bs / xs + hk);
            if asr > -100.0 {
                let rs = (1.0 - xs).sqrt();
                let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                let ep = (-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                acc += w * asr.exp() * (sp - ep);
            }
        }
        // the node loop above covers both halves of Genz's mirrored sum
        bvn = (a * acc - bvn) / (2.0 * PI);
    }
    let out = if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else if h >= k {
        -bvn
    } else {
        let l = if h < 0.0 {
            std_normal_cdf(k) - std_normal_cdf(h)
        } else {
            std_normal_cdf(-h) - std_normal_cdf(-k)
        };
        l - bvn
    };
    out.clamp(0.0, 1.0)
}

/// P(X ≤ x, Y ≤ y).
pub fn bvn_lower(x: f64, y: f64, r: f64) -> f64 {
    bvn_upper(-x, -y, r)
}
