//! Unrotated one-parameter families. Every function here takes arguments
//! already clamped into the open unit square.

use super::bvn::bvn_lower;
use super::FamilyKind;
use crate::numerics::std_normal_cdf;
use crate::numerics::normal::quantile_unchecked as qnorm;

/// ln(e^a + e^b − 1) for a, b ≥ 0.
fn log_clayton_sum(a: f64, b: f64) -> f64 {
    let (m, n) = if a >= b { (a, b) } else { (b, a) };
    m + ((-m).exp() * n.exp_m1()).ln_1p()
}

/// ln(e^a − 1) for a > 0.
fn ln_expm1(a: f64) -> f64 {
    a + (-(-a).exp_m1()).ln()
}

/// ln(1 + e^z).
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Clayton h(u | v) = exp(−(1 + 1/θ) s) with s = ln(1 + (u^−θ − 1) v^θ).
fn clayton_s(th: f64, u: f64, v: f64) -> f64 {
    softplus(ln_expm1(-th * u.ln()) + th * v.ln())
}

/// Clayton u with ln(1 + (u^−θ − 1) v^θ) = s.
fn clayton_u_from_s(th: f64, s: f64, v: f64) -> f64 {
    (-softplus(ln_expm1(s) - th * v.ln()) / th).exp()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub(super) fn log_pdf(kind: FamilyKind, th: f64, u: f64, v: f64) -> f64 {
    match kind {
        FamilyKind::Independence => 0.0,
        FamilyKind::Gaussian => {
            let (x, y) = (qnorm(u), qnorm(v));
            gaussian_log_pdf_scores(th, x, y)
        }
        FamilyKind::Clayton => {
            let (lu, lv) = (u.ln(), v.ln());
            let l = log_clayton_sum(-th * lu, -th * lv);
            th.ln_1p() - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * l
        }
        FamilyKind::Gumbel => {
            let (x, y) = (-u.ln(), -v.ln());
            let (lx, ly) = (x.ln(), y.ln());
            let ls = log_add_exp(th * lx, th * ly);
            let a = (ls / th).exp();
            -a + x + y + (th - 1.0) * (lx + ly) + (1.0 / th - 2.0) * ls + (a + th - 1.0).ln()
        }
        FamilyKind::Frank => {
            if th.abs() < super::FRANK_ZERO {
                return 0.0;
            }
            let e = (-th).exp_m1();
            let xu = (-th * u).exp_m1();
            let yv = (-th * v).exp_m1();
            (-th * e).ln() - th * (u + v) - 2.0 * (e + xu * yv).abs().ln()
        }
        FamilyKind::Joe => {
            let (lub, lvb) = ((-u).ln_1p(), (-v).ln_1p());
            let (ut, vt) = ((th * lub).exp(), (th * lvb).exp());
            let a = ut + vt - ut * vt;
            (1.0 / th - 2.0) * a.ln() + (th - 1.0) * (lub + lvb) + (th - 1.0 + a).ln()
        }
    }
}

pub(super) fn gaussian_log_pdf_scores(rho: f64, x: f64, y: f64) -> f64 {
    let om = 1.0 - rho * rho;
    -0.5 * om.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * om)
}

/// h(u | v) = ∂C(u, v)/∂v.
pub(super) fn h(kind: FamilyKind, th: f64, u: f64, v: f64) -> f64 {
    let out = match kind {
        FamilyKind::Independence => u,
        FamilyKind::Gaussian => {
            std_normal_cdf((qnorm(u) - th * qnorm(v)) / (1.0 - th * th).sqrt())
        }
        FamilyKind::Clayton => (-(1.0 + 1.0 / th) * clayton_s(th, u, v)).exp(),
        FamilyKind::Gumbel => {
            let (x, y) = (-u.ln(), -v.ln());
            let ly = y.ln();
            let ls = log_add_exp(th * x.ln(), th * ly);
            let a = (ls / th).exp();
            (-a + (1.0 / th - 1.0) * ls + (th - 1.0) * ly + y).exp()
        }
        FamilyKind::Frank => {
            if th.abs() < super::FRANK_ZERO {
                return u;
            }
            let e = (-th).exp_m1();
            let xu = (-th * u).exp_m1();
            let yv = (-th * v).exp_m1();
            (-th * v).exp() * xu / (e + xu * yv)
        }
        FamilyKind::Joe => {
            let (lub, lvb) = ((-u).ln_1p(), (-v).ln_1p());
            let (ut, vt) = ((th * lub).exp(), (th * lvb).exp());
            let a = ut + vt - ut * vt;
            ((1.0 / th - 1.0) * a.ln() + (th - 1.0) * lvb).exp() * -(th * lub).exp_m1()
        }
    };
    out.clamp(0.0, 1.0)
}

pub(super) fn h_inverse(kind: FamilyKind, th: f64, w: f64, v: f64) -> f64 {
    match kind {
        FamilyKind::Independence => w,
        FamilyKind::Gaussian => {
            std_normal_cdf((1.0 - th * th).sqrt() * qnorm(w) + th * qnorm(v))
        }
        FamilyKind::Clayton => clayton_u_from_s(th, -w.ln() * th / (1.0 + th), v),
        FamilyKind::Frank => {
            if th.abs() < super::FRANK_ZERO {
                return w;
            }
            let e = (-th).exp_m1();
            let ev = (-th * v).exp();
            let yv = (-th * v).exp_m1();
            let x = w * e / (ev - w * yv);
            -x.ln_1p() / th
        }
        FamilyKind::Gumbel | FamilyKind::Joe => invert_numeric(kind, th, w, v),
    }
}

/// 1 − h(u | v), without cancellation where the family allows it.
pub(super) fn h_upper(kind: FamilyKind, th: f64, u: f64, v: f64) -> f64 {
    match kind {
        FamilyKind::Gaussian => std_normal_cdf((th * qnorm(v) - qnorm(u)) / (1.0 - th * th).sqrt()),
        FamilyKind::Clayton => -(-(1.0 + 1.0 / th) * clayton_s(th, u, v)).exp_m1(),
        _ => 1.0 - h(kind, th, u, v),
    }
    .clamp(0.0, 1.0)
}

/// u with 1 − h(u | v) = wc.
pub(super) fn h_inverse_upper(kind: FamilyKind, th: f64, wc: f64, v: f64) -> f64 {
    match kind {
        FamilyKind::Gaussian => {
            std_normal_cdf(th * qnorm(v) - (1.0 - th * th).sqrt() * qnorm(wc))
        }
        FamilyKind::Clayton => clayton_u_from_s(th, -(-wc).ln_1p() * th / (1.0 + th), v),
        _ => h_inverse(kind, th, 1.0 - wc, v),
    }
}

/// Safeguarded Newton on u ↦ h(u | v) − w, using c(u, v) as the slope.
fn invert_numeric(kind: FamilyKind, th: f64, w: f64, v: f64) -> f64 {
    let (mut lo, mut hi) = (super::EPS, 1.0 - super::EPS);
    if h(kind, th, lo, v) >= w {
        return lo;
    }
    if h(kind, th, hi, v) <= w {
        return hi;
    }
    let mut u = w.clamp(lo, hi);
    for _ in 0..200 {
        let f = h(kind, th, u, v) - w;
        if f == 0.0 {
            return u;
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let slope = log_pdf(kind, th, u, v).exp();
        let mut next = u - f / slope;
        if !(next > lo && next < hi) {
            next = if hi / lo > 4.0 && lo < 1e-3 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
        }
        if (next - u).abs() <= 2.0 * f64::EPSILON * u || hi - lo <= 2.0 * f64::EPSILON * hi {
            return next;
        }
        u = next;
    }
    u
}

pub(super) fn cdf(kind: FamilyKind, th: f64, u: f64, v: f64) -> f64 {
    let out = match kind {
        FamilyKind::Independence => u * v,
        FamilyKind::Gaussian => bvn_lower(qnorm(u), qnorm(v), th),
        FamilyKind::Clayton => {
            (-log_clayton_sum(-th * u.ln(), -th * v.ln()) / th).exp()
        }
        FamilyKind::Gumbel => {
            let ls = log_add_exp(th * (-u.ln()).ln(), th * (-v.ln()).ln());
            (-(ls / th).exp()).exp()
        }
        FamilyKind::Frank => {
            if th.abs() < super::FRANK_ZERO {
                return u * v;
            }
            let e = (-th).exp_m1();
            let xu = (-th * u).exp_m1();
            let yv = (-th * v).exp_m1();
            -(xu * yv / e).ln_1p() / th
        }
        FamilyKind::Joe => {
            let (ut, vt) = ((th * (-u).ln_1p()).exp(), (th * (-v).ln_1p()).exp());
            -((ut + vt - ut * vt).ln() / th).exp_m1()
        }
    };
    out.clamp(0.0, u.min(v))
}

/// Kendall's tau of the unrotated family.
pub(super) fn tau(kind: FamilyKind, th: f64) -> f64 {
    match kind {
        FamilyKind::Independence => 0.0,
        FamilyKind::Gaussian => 2.0 / std::f64::consts::PI * th.asin(),
        FamilyKind::Clayton => th / (th + 2.0),
        FamilyKind::Gumbel => 1.0 - 1.0 / th,
        FamilyKind::Frank => frank_tau(th),
        FamilyKind::Joe => joe_tau(th),
    }
}

fn frank_tau(th: f64) -> f64 {
    if th.abs() < super::FRANK_ZERO {
        return th / 9.0;
    }
    let a = th.abs();
    let gl = debye_rule();
    // D1(a) = (1/a) ∫_0^a t/(e^t − 1) dt
    let d1 = gl.integrate(0.0, a, |t| if t == 0.0 { 1.0 } else { t / t.exp_m1() }) / a;
    let tau = 1.0 - 4.0 / a * (1.0 - d1);
    tau.copysign(th)
}

fn debye_rule() -> &'static crate::numerics::GaussLegendre {
    static RULE: std::sync::OnceLock<crate::numerics::GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| crate::numerics::gauss_legendre(48))
}

fn joe_tau(th: f64) -> f64 {
    use statrs::function::gamma::digamma;
    if (th - 2.0).abs() < 1e-6 {
        // limit of the digamma form at θ = 2
        return 2.0 - std::f64::consts::PI.powi(2) / 6.0;
    }
    1.0 + 2.0 / (2.0 - th) * (digamma(2.0) - digamma(2.0 / th + 1.0))
}

/// Gaussian helpers shared with the sufficient-statistic MLE.
pub(super) fn normal_scores(u: &[f64]) -> Vec<f64> {
    u.iter().map(|&p| qnorm(super::clamp01(p))).collect()
}
