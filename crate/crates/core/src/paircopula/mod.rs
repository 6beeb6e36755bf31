//! One-parameter bivariate copulas: densities, h-functions and their
//! inverses, Kendall's tau conversions, maximum likelihood and AIC
//! selection.
//!
//! Rotations act on the base copula C₀ as
//!
//! | rotation | density at (u, v)   |
//! |----------|---------------------|
//! | 0        | c₀(u, v)            |
//! | 90       | c₀(1 − u, v)        |
//! | 180      | c₀(1 − u, 1 − v)    |
//! | 270      | c₀(u, 1 − v)        |
//!
//! All base families are exchangeable, so 90 and 270 are mirror images
//! and both carry negative dependence.

mod bvn;
mod families;
mod fit;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bvn::{bvn_lower, bvn_upper};
pub use fit::{fit_mle, independence_pvalue, select_aic, select_aic_with, FitResult, SelectOptions};

/// Lower and upper clamp applied to every copula argument.
pub const EPS: f64 = 1e-10;
pub(crate) const FRANK_ZERO: f64 = 1e-4;

#[inline]
pub fn clamp01(p: f64) -> f64 {
    p.clamp(EPS, 1.0 - EPS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Independence,
    Gaussian,
    Clayton,
    Gumbel,
    Frank,
    Joe,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        FamilyKind::Independence,
        FamilyKind::Gaussian,
        FamilyKind::Clayton,
        FamilyKind::Gumbel,
        FamilyKind::Frank,
        FamilyKind::Joe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Independence => "independence",
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::Clayton => "clayton",
            FamilyKind::Gumbel => "gumbel",
            FamilyKind::Frank => "frank",
            FamilyKind::Joe => "joe",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    pub fn n_params(self) -> usize {
        match self {
            FamilyKind::Independence => 0,
            _ => 1,
        }
    }

    /// Families whose rotations give distinct copulas.
    pub fn is_rotatable(self) -> bool {
        matches!(self, FamilyKind::Clayton | FamilyKind::Gumbel | FamilyKind::Joe)
    }

    /// Closed parameter interval used by the optimizer and validation.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            FamilyKind::Independence => (0.0, 0.0),
            FamilyKind::Gaussian => (-0.9999, 0.9999),
            FamilyKind::Clayton => (1e-10, 28.0),
            FamilyKind::Gumbel => (1.0, 17.0),
            FamilyKind::Frank => (-35.0, 35.0),
            FamilyKind::Joe => (1.0 + 1e-10, 30.0),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 90,
            Rotation::R180 => 180,
            Rotation::R270 => 270,
        }
    }

    pub fn from_degrees(deg: u16) -> Result<Self> {
        match deg {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            other => Err(Error::Domain(format!("rotation must be 0, 90, 180 or 270, got {other}"))),
        }
    }

    /// Rotations that carry negative dependence.
    pub fn is_negative(self) -> bool {
        matches!(self, Rotation::R90 | Rotation::R270)
    }
}

/// Family tag plus rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairCopulaFamily {
    pub kind: FamilyKind,
    pub rotation: Rotation,
}

impl PairCopulaFamily {
    /// Rotation is dropped for families where it has no effect.
    pub fn new(kind: FamilyKind, rotation: Rotation) -> Self {
        let rotation = if kind.is_rotatable() { rotation } else { Rotation::R0 };
        Self { kind, rotation }
    }

    pub fn plain(kind: FamilyKind) -> Self {
        Self::new(kind, Rotation::R0)
    }

    /// The family of the copula with its two arguments swapped.
    pub fn transposed(self) -> Self {
        let rotation = match self.rotation {
            Rotation::R90 => Rotation::R270,
            Rotation::R270 => Rotation::R90,
            r => r,
        };
        Self { rotation, ..self }
    }

    /// Every distinct family/rotation pair.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::new();
        for kind in FamilyKind::ALL {
            if kind.is_rotatable() {
                for r in [Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270] {
                    out.push(Self::new(kind, r));
                }
            } else {
                out.push(Self::plain(kind));
            }
        }
        out
    }

    /// Candidate set used when fitting a vine edge with empirical tau
    /// `tau_hat`: the symmetric families plus the rotations whose sign of
    /// dependence agrees with the data.
    pub fn candidates_for_tau(tau_hat: f64) -> Vec<Self> {
        let rots = if tau_hat >= 0.0 {
            [Rotation::R0, Rotation::R180]
        } else {
            [Rotation::R90, Rotation::R270]
        };
        let mut out = vec![
            Self::plain(FamilyKind::Independence),
            Self::plain(FamilyKind::Gaussian),
            Self::plain(FamilyKind::Frank),
        ];
        for kind in [FamilyKind::Clayton, FamilyKind::Gumbel, FamilyKind::Joe] {
            for r in rots {
                out.push(Self::new(kind, r));
            }
        }
        out
    }

    /// Whether a rotated family can attain Kendall's tau of the given sign.
    fn sign_compatible(self, tau: f64) -> bool {
        if !self.kind.is_rotatable() {
            return true;
        }
        if self.rotation.is_negative() {
            tau <= 0.0
        } else {
            tau >= 0.0
        }
    }
}

impl fmt::Display for PairCopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.is_rotatable() {
            write!(f, "{}{}", self.kind, self.rotation.degrees())
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// A fitted pair copula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPairCopula", into = "RawPairCopula")]
pub struct PairCopula {
    family: PairCopulaFamily,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPairCopula {
    family: String,
    rotation: u16,
    theta: Option<f64>,
}

impl TryFrom<RawPairCopula> for PairCopula {
    type Error = Error;

    fn try_from(raw: RawPairCopula) -> Result<Self> {
        let kind = FamilyKind::from_name(&raw.family)?;
        let rotation = Rotation::from_degrees(raw.rotation)?;
        if !kind.is_rotatable() && rotation != Rotation::R0 {
            return Err(Error::Model(format!("{kind} does not take a rotation")));
        }
        PairCopula::new(PairCopulaFamily::new(kind, rotation), raw.theta)
    }
}

impl From<PairCopula> for RawPairCopula {
    fn from(pc: PairCopula) -> Self {
        RawPairCopula {
            family: pc.family.kind.name().to_string(),
            rotation: pc.family.rotation.degrees(),
            theta: pc.theta(),
        }
    }
}

impl Default for PairCopula {
    fn default() -> Self {
        Self::independence()
    }
}

impl PairCopula {
    /// Validated constructor. Frank with |θ| below 1e-4 collapses to
    /// Independence.
    pub fn new(family: PairCopulaFamily, theta: Option<f64>) -> Result<Self> {
        let family = PairCopulaFamily::new(family.kind, family.rotation);
        if family.kind == FamilyKind::Independence {
            return match theta {
                None => Ok(Self::independence()),
                Some(t) => Err(Error::InvalidParameter { family: family.to_string(), theta: t }),
            };
        }
        let theta = theta.ok_or_else(|| Error::Model(format!("{family} needs a parameter")))?;
        let (lo, hi) = family.kind.bounds();
        if !(theta >= lo && theta <= hi) {
            return Err(Error::InvalidParameter { family: family.to_string(), theta });
        }
        if family.kind == FamilyKind::Frank && theta.abs() < FRANK_ZERO {
            return Ok(Self::independence());
        }
        Ok(Self { family, theta })
    }

    pub fn independence() -> Self {
        Self {
            family: PairCopulaFamily::plain(FamilyKind::Independence),
            theta: 0.0,
        }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(PairCopulaFamily::plain(FamilyKind::Gaussian), Some(rho))
    }

    pub fn family(&self) -> PairCopulaFamily {
        self.family
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind
    }

    pub fn rotation(&self) -> Rotation {
        self.family.rotation
    }

    pub fn theta(&self) -> Option<f64> {
        (self.family.kind != FamilyKind::Independence).then_some(self.theta)
    }

    pub fn is_independence(&self) -> bool {
        self.family.kind == FamilyKind::Independence
    }

    pub fn n_params(&self) -> usize {
        self.family.kind.n_params()
    }

    pub fn density(&self, u: f64, v: f64) -> f64 {
        self.log_density(u, v).exp()
    }

    pub fn log_density(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return 0.0;
        }
        let (u, v) = (clamp01(u), clamp01(v));
        let (a, b) = match self.family.rotation {
            Rotation::R0 => (u, v),
            Rotation::R90 => (1.0 - u, v),
            Rotation::R180 => (1.0 - u, 1.0 - v),
            Rotation::R270 => (u, 1.0 - v),
        };
        families::log_pdf(self.family.kind, self.theta, a, b)
    }

    /// Conditional distribution of the first argument given the second,
    /// h(u | v) = ∂C(u, v)/∂v.
    pub fn h(&self, u: f64, v: f64) -> f64 {
        if self.is_independence() {
            return u;
        }
        let (u, v) = (clamp01(u), clamp01(v));
        let (k, t) = (self.family.kind, self.theta);
        match self.family.rotation {
            Rotation::R0 => families::h(k, t, u, v),
            Rotation::R90 => families::h_upper(k, t, 1.0 - u, v),
            Rotation::R180 => families::h_upper(k, t, 1.0 - u, 1.0 - v),
            Rotation::R270 => families::h(k, t, u, 1.0 - v),
        }
    }

    /// Conditional distribution of the second argument given the first,
    /// ∂C(u, v)/∂u evaluated as a function of v.
    pub fn h_given_first(&self, v: f64, u: f64) -> f64 {
        self.transposed().h(v, u)
    }

    /// Solves h(u | v) = w for u.
    pub fn h_inverse(&self, w: f64, v: f64) -> f64 {
        if self.is_independence() {
            return w;
        }
        // w is a probability level, not a copula argument; only keep it off
        // the exact endpoints
        let w = w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        let v = clamp01(v);
        let (k, t) = (self.family.kind, self.theta);
        let u = match self.family.rotation {
            Rotation::R0 => families::h_inverse(k, t, w, v),
            Rotation::R90 => 1.0 - families::h_inverse_upper(k, t, w, v),
            Rotation::R180 => 1.0 - families::h_inverse_upper(k, t, w, 1.0 - v),
            Rotation::R270 => families::h_inverse(k, t, w, 1.0 - v),
        };
        clamp01(u)
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp01(u), clamp01(v));
        let (k, t) = (self.family.kind, self.theta);
        let c = match self.family.rotation {
            Rotation::R0 => families::cdf(k, t, u, v),
            Rotation::R90 => v - families::cdf(k, t, 1.0 - u, v),
            Rotation::R180 => u + v - 1.0 + families::cdf(k, t, 1.0 - u, 1.0 - v),
            Rotation::R270 => u - families::cdf(k, t, u, 1.0 - v),
        };
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    pub fn tau(&self) -> f64 {
        theta_to_tau(self.family, self.theta)
    }

    pub fn transposed(&self) -> Self {
        Self {
            family: self.family.transposed(),
            theta: self.theta,
        }
    }
}

impl fmt::Display for PairCopula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.theta() {
            Some(t) => write!(f, "{}({t:.4})", self.family),
            None => write!(f, "{}", self.family),
        }
    }
}

/// Kendall's tau of a family at parameter `theta`.
pub fn theta_to_tau(family: PairCopulaFamily, theta: f64) -> f64 {
    if family.kind == FamilyKind::Independence {
        return 0.0;
    }
    let t = families::tau(family.kind, theta);
    if family.rotation.is_negative() {
        -t
    } else {
        t
    }
}

/// Parameter with the given Kendall's tau. Values beyond the family's
/// attainable magnitude are clamped to the admissible range; a tau of the
/// wrong sign for a rotated family is an error.
pub fn tau_to_theta(family: PairCopulaFamily, tau: f64) -> Result<f64> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(Error::Domain(format!("kendall tau must lie in (-1,1), got {tau}")));
    }
    let family = PairCopulaFamily::new(family.kind, family.rotation);
    if !family.sign_compatible(tau) {
        return Err(Error::Domain(format!("{family} cannot attain kendall tau {tau}")));
    }
    let (lo, hi) = family.kind.bounds();
    let base = if family.rotation.is_negative() { -tau } else { tau };
    let theta = match family.kind {
        FamilyKind::Independence => return Ok(0.0),
        FamilyKind::Gaussian => (std::f64::consts::FRAC_PI_2 * tau).sin(),
        FamilyKind::Clayton => {
            if base <= 0.0 {
                return Err(Error::Domain(format!("{family} needs positive dependence")));
            }
            2.0 * base / (1.0 - base)
        }
        FamilyKind::Gumbel => 1.0 / (1.0 - base),
        FamilyKind::Joe => {
            if base <= 0.0 {
                return Err(Error::Domain(format!("{family} needs positive dependence")));
            }
            invert_tau(FamilyKind::Joe, base, lo, hi)
        }
        FamilyKind::Frank => {
            if tau == 0.0 {
                0.0
            } else {
                invert_tau(FamilyKind::Frank, tau.abs(), FRANK_ZERO, hi).copysign(tau)
            }
        }
    };
    Ok(theta.clamp(lo, hi))
}

fn invert_tau(kind: FamilyKind, tau: f64, lo: f64, hi: f64) -> f64 {
    if families::tau(kind, hi) <= tau {
        return hi;
    }
    if families::tau(kind, lo) >= tau {
        return lo;
    }
    crate::numerics::bisect(|t| families::tau(kind, t) - tau, lo, hi, 1e-13, 200).unwrap_or(lo)
}

#[cfg(test)]
mod tests;
