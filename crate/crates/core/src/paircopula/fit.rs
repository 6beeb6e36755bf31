use std::cmp::Ordering;

use super::{clamp01, families, tau_to_theta, FamilyKind, PairCopula, PairCopulaFamily, Rotation};
use crate::error::{Error, Result};
use crate::numerics::{brent_minimize, kendall_tau, std_normal_cdf};

/// A fitted copula with its log-likelihood and AIC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub copula: PairCopula,
    pub log_lik: f64,
    pub aic: f64,
}

impl FitResult {
    fn new(copula: PairCopula, log_lik: f64) -> Self {
        let k = copula.n_params() as f64;
        Self {
            copula,
            log_lik,
            aic: 2.0 * k - 2.0 * log_lik,
        }
    }
}

struct Sample {
    u: Vec<f64>,
    v: Vec<f64>,
    tau: f64,
}

impl Sample {
    fn new(u: &[f64], v: &[f64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Dimension(format!(
                "pseudo-observation columns differ in length ({} vs {})",
                u.len(),
                v.len()
            )));
        }
        if u.len() < 10 {
            return Err(Error::Data(format!("copula fit needs at least 10 rows, got {}", u.len())));
        }
        if u.iter().chain(v).any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::Domain("pseudo-observations must lie in (0,1)".into()));
        }
        let u: Vec<f64> = u.iter().map(|&p| clamp01(p)).collect();
        let v: Vec<f64> = v.iter().map(|&p| clamp01(p)).collect();
        let tau = kendall_tau(&u, &v).unwrap_or(0.0);
        Ok(Self { u, v, tau })
    }
}

fn log_lik(pc: &PairCopula, s: &Sample) -> f64 {
    s.u.iter().zip(&s.v).map(|(&a, &b)| pc.log_density(a, b)).sum()
}

/// Maximum-likelihood fit of a single family on pseudo-observations.
pub fn fit_mle(family: PairCopulaFamily, u: &[f64], v: &[f64]) -> Result<FitResult> {
    let s = Sample::new(u, v)?;
    fit_sample(family, &s)
}

fn fit_sample(family: PairCopulaFamily, s: &Sample) -> Result<FitResult> {
    let family = PairCopulaFamily::new(family.kind, family.rotation);
    if family.kind == FamilyKind::Independence {
        return Ok(FitResult::new(PairCopula::independence(), 0.0));
    }
    let init = initial_theta(family, s.tau);
    let (lo, hi) = family.kind.bounds();

    let best = if family.kind == FamilyKind::Gaussian {
        let (sq, cross, n) = gaussian_sums(s);
        let nll = |r: f64| {
            let om = 1.0 - r * r;
            0.5 * n * om.ln() + (r * r * sq - 2.0 * r * cross) / (2.0 * om)
        };
        brent_minimize(nll, lo, hi, Some(init), 1e-10, 300)
    } else {
        // move the data once so the base density can be used directly
        let (a, b): (Vec<f64>, Vec<f64>) = s
            .u
            .iter()
            .zip(&s.v)
            .map(|(&x, &y)| match family.rotation {
                Rotation::R0 => (x, y),
                Rotation::R90 => (1.0 - x, y),
                Rotation::R180 => (1.0 - x, 1.0 - y),
                Rotation::R270 => (x, 1.0 - y),
            })
            .unzip();
        let kind = family.kind;
        let nll = |t: f64| -> f64 {
            -a.iter()
                .zip(&b)
                .map(|(&x, &y)| families::log_pdf(kind, t, x, y))
                .sum::<f64>()
        };
        brent_minimize(nll, lo, hi, Some(init), 1e-9, 300)
    };
    let best = best.ok_or_else(|| Error::NoConvergence(family.to_string()))?;

    let fitted = PairCopula::new(family, Some(best.x.clamp(lo, hi)))?;
    let start = PairCopula::new(family, Some(init))?;
    let (ll_fit, ll_start) = (log_lik(&fitted, s), log_lik(&start, s));
    if !ll_fit.is_finite() && !ll_start.is_finite() {
        return Err(Error::NoConvergence(family.to_string()));
    }
    if ll_fit >= ll_start || !ll_start.is_finite() {
        Ok(FitResult::new(fitted, ll_fit))
    } else {
        Ok(FitResult::new(start, ll_start))
    }
}

fn gaussian_sums(s: &Sample) -> (f64, f64, f64) {
    let x = families::normal_scores(&s.u);
    let y = families::normal_scores(&s.v);
    let sq = x.iter().chain(&y).map(|a| a * a).sum();
    let cross = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    (sq, cross, x.len() as f64)
}

/// Tau-inversion start point, nudged to the family's sign of dependence
/// when the empirical tau points the other way.
fn initial_theta(family: PairCopulaFamily, tau: f64) -> f64 {
    let mut t = tau.clamp(-0.9, 0.9);
    if family.kind.is_rotatable() {
        let mag = t.abs().max(0.05);
        t = if family.rotation.is_negative() { -mag } else { mag };
    }
    let theta = tau_to_theta(family, t).unwrap_or(family.kind.bounds().0);
    if family.kind == FamilyKind::Frank && theta.abs() < 2.0 * super::FRANK_ZERO {
        return 0.1_f64.copysign(if t == 0.0 { 1.0 } else { t });
    }
    theta
}

/// Knobs for [`select_aic_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectOptions {
    /// Level of the asymptotic Kendall's-tau independence test run before
    /// any fitting; when the test does not reject, Independence is returned
    /// directly. `None` disables the pre-test (pure AIC).
    pub independence_level: Option<f64>,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self {
            independence_level: Some(0.05),
        }
    }
}

/// Two-sided p-value of the asymptotic test of τ = 0 under independence,
/// z = 3τ √(n(n−1)) / √(2(2n+5)).
pub fn independence_pvalue(tau: f64, n: usize) -> f64 {
    let n = n as f64;
    let z = 3.0 * tau * (n * (n - 1.0)).sqrt() / (2.0 * (2.0 * n + 5.0)).sqrt();
    2.0 * std_normal_cdf(-z.abs())
}

/// [`select_aic_with`] under the default options.
pub fn select_aic(u: &[f64], v: &[f64], candidates: &[PairCopulaFamily]) -> Result<FitResult> {
    select_aic_with(u, v, candidates, &SelectOptions::default())
}

/// Fits every candidate and keeps the one with the smallest AIC. Ties go to
/// fewer parameters, then to the family name, then to the rotation.
pub fn select_aic_with(
    u: &[f64],
    v: &[f64],
    candidates: &[PairCopulaFamily],
    opts: &SelectOptions,
) -> Result<FitResult> {
    if !candidates.iter().any(|c| c.kind == FamilyKind::Independence) {
        return Err(Error::Domain("candidate set must contain independence".into()));
    }
    let s = Sample::new(u, v)?;
    if let Some(level) = opts.independence_level {
        if independence_pvalue(s.tau, s.u.len()) > level {
            return Ok(FitResult::new(PairCopula::independence(), 0.0));
        }
    }
    let mut best: Option<FitResult> = None;
    let mut last_err = None;
    for &fam in candidates {
        match fit_sample(fam, &s) {
            Ok(fit) => {
                if best.is_none_or(|b| compare(&fit, &b) == Ordering::Less) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::Domain("no candidates".into())))
}

fn compare(a: &FitResult, b: &FitResult) -> Ordering {
    a.aic
        .total_cmp(&b.aic)
        .then(a.copula.n_params().cmp(&b.copula.n_params()))
        .then(a.copula.kind().name().cmp(b.copula.kind().name()))
        .then(a.copula.rotation().cmp(&b.copula.rotation()))
}
