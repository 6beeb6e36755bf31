use super::*;
use crate::numerics::{gauss_legendre, std_normal_cdf, std_normal_pdf, std_normal_quantile, RngStream};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

fn fam(kind: FamilyKind, deg: u16) -> PairCopulaFamily {
    PairCopulaFamily::new(kind, Rotation::from_degrees(deg).unwrap())
}

fn pc(kind: FamilyKind, deg: u16, theta: f64) -> PairCopula {
    PairCopula::new(fam(kind, deg), Some(theta)).unwrap()
}

/// Parameters spread over each family's useful range.
fn grid() -> Vec<PairCopula> {
    let mut out = Vec::new();
    for &r in &[-0.9, -0.4, 0.3, 0.85] {
        out.push(pc(FamilyKind::Gaussian, 0, r));
    }
    for &t in &[-12.0, -3.0, 2.0, 9.0] {
        out.push(pc(FamilyKind::Frank, 0, t));
    }
    for deg in [0, 90, 180, 270] {
        for &t in &[0.3, 2.0, 6.0] {
            out.push(pc(FamilyKind::Clayton, deg, t));
        }
        for &t in &[1.2, 2.0, 4.0] {
            out.push(pc(FamilyKind::Gumbel, deg, t));
            out.push(pc(FamilyKind::Joe, deg, t + 0.3));
        }
    }
    out
}

#[test]
fn density_examples() {
    let ind = PairCopula::independence();
    assert_eq!(ind.density(0.2, 0.9), 1.0);
    let g0 = PairCopula::gaussian(0.0).unwrap();
    assert!((g0.density(0.3, 0.8) - 1.0).abs() < 1e-15);
    // φ₂(0,0;ρ)/φ(0)² = 1/√(1−ρ²)
    let g = PairCopula::gaussian(0.5).unwrap();
    assert!((g.density(0.5, 0.5) - 1.0 / 0.75f64.sqrt()).abs() < 1e-14);
    assert!((g.density(0.5, 0.5) - 1.1547).abs() < 1e-4);
}

#[test]
fn gaussian_density_matches_bivariate_normal_ratio() {
    for &r in &[-0.7, 0.2, 0.95] {
        let g = PairCopula::gaussian(r).unwrap();
        for &(u, v) in &[(0.1, 0.9), (0.4, 0.45), (0.99, 0.97)] {
            let (x, y) = (std_normal_quantile(u).unwrap(), std_normal_quantile(v).unwrap());
            let om: f64 = 1.0 - r * r;
            let joint = (-(x * x - 2.0 * r * x * y + y * y) / (2.0 * om)).exp()
                / (2.0 * std::f64::consts::PI * om.sqrt());
            let want = joint / (std_normal_pdf(x) * std_normal_pdf(y));
            assert!((g.density(u, v) / want - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn gaussian_h_matches_derivative_of_cdf() {
    let g = PairCopula::gaussian(0.5).unwrap();
    let (u, v) = (0.5, 0.8);
    let step = 1e-5;
    let fd = (g.cdf(u, v + step) - g.cdf(u, v - step)) / (2.0 * step);
    let closed = std_normal_cdf(-0.5 * std_normal_quantile(0.8).unwrap() / 0.75f64.sqrt());
    assert!((g.h(u, v) - closed).abs() < 1e-14);
    assert!((g.h(u, v) - fd).abs() < 1e-8, "{} vs {fd}", g.h(u, v));
    assert_eq!(PairCopula::independence().h(0.3, 0.6), 0.3);
    assert!((PairCopula::gaussian(0.0).unwrap().h(0.3, 0.6) - 0.3).abs() < 1e-15);
}

#[test]
fn gaussian_h_inverse_matches_bisection() {
    let g = PairCopula::gaussian(0.5).unwrap();
    for &(w, v) in &[(0.1, 0.3), (0.5, 0.8), (0.93, 0.05)] {
        let root = crate::numerics::bisect(|u| g.h(u, v) - w, 1e-12, 1.0 - 1e-12, 1e-15, 200).unwrap();
        assert!((g.h_inverse(w, v) - root).abs() < 1e-9);
    }
    assert_eq!(PairCopula::independence().h_inverse(0.42, 0.1), 0.42);
}

#[test]
fn h_matches_numerical_derivative_of_cdf_every_family() {
    let step = 1e-6;
    for c in grid() {
        for &(u, v) in &[(0.2, 0.3), (0.5, 0.5), (0.7, 0.15), (0.85, 0.9)] {
            let fd = (c.cdf(u, v + step) - c.cdf(u, v - step)) / (2.0 * step);
            assert!((c.h(u, v) - fd).abs() < 2e-6, "{c} at ({u},{v}): h={} fd={fd}", c.h(u, v));
            let fd1 = (c.cdf(u + step, v) - c.cdf(u - step, v)) / (2.0 * step);
            assert!((c.h_given_first(v, u) - fd1).abs() < 2e-6, "{c} h2 at ({u},{v})");
        }
    }
}

#[test]
fn density_is_derivative_of_h() {
    let step = 1e-6;
    for c in grid() {
        for &(u, v) in &[(0.25, 0.35), (0.5, 0.6), (0.8, 0.2)] {
            let fd = (c.h(u + step, v) - c.h(u - step, v)) / (2.0 * step);
            let d = c.density(u, v);
            assert!((d - fd).abs() < 1e-5 * d.max(1.0), "{c} at ({u},{v}): c={d} fd={fd}");
        }
    }
}

/// ∫∫ c over the unit square in normal-score coordinates, on a graded
/// composite Gauss–Legendre mesh.
fn total_mass(c: &PairCopula) -> f64 {
    let gl = gauss_legendre(8);
    let mut nodes = Vec::new();
    let pieces = 60;
    let (lo, hi) = (-8.5, 8.5);
    let step = (hi - lo) / pieces as f64;
    for i in 0..pieces {
        let a = lo + step * i as f64;
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            nodes.push((a + 0.5 * step * (x + 1.0), 0.5 * step * w));
        }
    }
    let mut total = 0.0;
    for &(s, ws) in &nodes {
        let (u, pu) = (std_normal_cdf(s), std_normal_pdf(s));
        for &(t, wt) in &nodes {
            let (v, pv) = (std_normal_cdf(t), std_normal_pdf(t));
            total += ws * wt * pu * pv * c.density(u, v);
        }
    }
    total
}

#[test]
fn densities_integrate_to_one() {
    for c in grid() {
        let m = total_mass(&c);
        assert!((m - 1.0).abs() < 1e-3, "{c}: mass {m}");
    }
}

#[test]
fn rotation_conventions() {
    for kind in [FamilyKind::Clayton, FamilyKind::Gumbel, FamilyKind::Joe] {
        let base = pc(kind, 0, 2.5);
        let (u, v) = (0.2, 0.7);
        assert!((pc(kind, 180, 2.5).density(u, v) - base.density(1.0 - u, 1.0 - v)).abs() < 1e-12);
        assert!((pc(kind, 90, 2.5).density(u, v) - base.density(v, 1.0 - u)).abs() < 1e-12);
        assert!((pc(kind, 270, 2.5).density(u, v) - base.density(1.0 - v, u)).abs() < 1e-12);
        assert!(pc(kind, 90, 2.5).tau() < 0.0 && pc(kind, 180, 2.5).tau() > 0.0);
    }
    let g = PairCopula::new(fam(FamilyKind::Gaussian, 90), Some(0.3)).unwrap();
    assert_eq!(g.rotation(), Rotation::R0);
}

#[test]
fn h_inverse_round_trip_grid() {
    let pts = [0.1, 0.3, 0.5, 0.7, 0.9];
    for c in grid() {
        for &u in &pts {
            for &v in &pts {
                let back = c.h_inverse(c.h(u, v), v);
                assert!((back - u).abs() < 1e-9, "{c} u={u} v={v} back={back}");
                let w = u;
                let fwd = c.h(c.h_inverse(w, v), v);
                assert!((fwd - w).abs() < 1e-9, "{c} w={w} v={v} fwd={fwd}");
            }
        }
    }
}

#[test]
fn h_limits_and_monotonicity() {
    for c in grid() {
        for &v in &[0.05, 0.5, 0.95] {
            assert!(c.h(1e-12, v) < 1e-3, "{c} v={v}");
            assert!(c.h(1.0 - 1e-12, v) > 1.0 - 1e-3, "{c} v={v}");
            let mut prev = 0.0;
            for i in 1..100 {
                let h = c.h(i as f64 / 100.0, v);
                assert!(h >= prev - 1e-15 && h <= 1.0);
                prev = h;
            }
        }
    }
}

#[test]
fn tau_inversion_examples() {
    let g = PairCopulaFamily::plain(FamilyKind::Gaussian);
    assert!((tau_to_theta(g, 0.5).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert_eq!(tau_to_theta(g, 0.0).unwrap(), 0.0);
    let cl = PairCopulaFamily::plain(FamilyKind::Clayton);
    assert!((tau_to_theta(cl, 1.0 / 3.0).unwrap() - 1.0).abs() < 1e-14);
    assert!(tau_to_theta(cl, -0.2).is_err());
    assert!(tau_to_theta(fam(FamilyKind::Gumbel, 90), 0.3).is_err());
    assert!(tau_to_theta(g, 1.0).is_err());
}

#[test]
fn tau_inversion_round_trip() {
    for f in PairCopulaFamily::all() {
        if f.kind == FamilyKind::Independence {
            continue;
        }
        for &t in &[0.05, 0.2, 0.45, 0.7, 0.85] {
            let tau = if f.rotation.is_negative() { -t } else { t };
            let th = tau_to_theta(f, tau).unwrap();
            let back = theta_to_tau(f, th);
            assert!((back - tau).abs() < 1e-6, "{f} tau={tau} theta={th} back={back}");
        }
    }
}

/// Kendall's tau of the base families by the integral
/// τ = 4 ∫∫ C dC − 1 = 1 − 4 ∫∫ h(u|v) h₂(v|u) du dv.
#[test]
fn closed_form_tau_matches_integral() {
    let gl = gauss_legendre(24);
    let pieces = 24;
    for c in grid().into_iter().filter(|c| c.rotation() == Rotation::R0) {
        let mut acc = 0.0;
        for i in 0..pieces {
            for j in 0..pieces {
                let (a, b) = (i as f64 / pieces as f64, j as f64 / pieces as f64);
                let s = 1.0 / pieces as f64;
                for (x, wx) in gl.nodes.iter().zip(&gl.weights) {
                    for (y, wy) in gl.nodes.iter().zip(&gl.weights) {
                        let u = a + 0.5 * s * (x + 1.0);
                        let v = b + 0.5 * s * (y + 1.0);
                        acc += 0.25 * s * s * wx * wy * c.h(u, v) * c.h_given_first(v, u);
                    }
                }
            }
        }
        let tau = 1.0 - 4.0 * acc;
        assert!((tau - c.tau()).abs() < 2e-4, "{c}: integral {tau} closed {}", c.tau());
    }
}

fn gaussian_sample(rho: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = RngStream::new(seed).rng();
    (0..n)
        .map(|_| {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let x = z1;
            let y = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
            (std_normal_cdf(x), std_normal_cdf(y))
        })
        .unzip()
}

/// Marshall–Olkin frailty construction for Clayton.
fn clayton_sample(theta: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = RngStream::new(seed).rng();
    let gamma = Gamma::new(1.0 / theta, 1.0).unwrap();
    (0..n)
        .map(|_| {
            let w: f64 = gamma.sample(&mut rng);
            let e1: f64 = Exp1.sample(&mut rng);
            let e2: f64 = Exp1.sample(&mut rng);
            ((1.0 + e1 / w).powf(-1.0 / theta), (1.0 + e2 / w).powf(-1.0 / theta))
        })
        .unzip()
}

#[test]
fn mle_recovers_gaussian_and_clayton() {
    let (u, v) = gaussian_sample(0.6, 5000, 11);
    let fit = fit_mle(PairCopulaFamily::plain(FamilyKind::Gaussian), &u, &v).unwrap();
    let rho = fit.copula.theta().unwrap();
    assert!((0.55..=0.65).contains(&rho), "rho={rho}");
    let re: f64 = u.iter().zip(&v).map(|(a, b)| fit.copula.log_density(*a, *b)).sum();
    assert!((re - fit.log_lik).abs() < 1e-8);

    let (u, v) = clayton_sample(2.0, 5000, 12);
    let fit = fit_mle(PairCopulaFamily::plain(FamilyKind::Clayton), &u, &v).unwrap();
    let th = fit.copula.theta().unwrap();
    assert!((1.7..=2.3).contains(&th), "theta={th}");

    let ind = fit_mle(PairCopulaFamily::plain(FamilyKind::Independence), &u, &v).unwrap();
    assert_eq!(ind.log_lik, 0.0);
    assert_eq!(ind.copula.theta(), None);
}

#[test]
fn mle_never_worse_than_initializer() {
    for f in PairCopulaFamily::all() {
        if f.kind == FamilyKind::Independence {
            continue;
        }
        let (u, v) = gaussian_sample(if f.rotation.is_negative() { -0.4 } else { 0.4 }, 400, 3);
        let fit = fit_mle(f, &u, &v).unwrap();
        let tau = crate::numerics::kendall_tau(&u, &v).unwrap();
        let init = PairCopula::new(f, Some(tau_to_theta(f, tau).unwrap())).unwrap();
        let ll_init: f64 = u.iter().zip(&v).map(|(a, b)| init.log_density(*a, *b)).sum();
        assert!(fit.log_lik >= ll_init - 1e-9, "{f}: {} < {ll_init}", fit.log_lik);
    }
}

#[test]
fn fit_rejects_bad_input() {
    let u = vec![0.5; 5];
    assert!(fit_mle(PairCopulaFamily::plain(FamilyKind::Gaussian), &u, &u).is_err());
    let u = vec![0.5; 20];
    let mut v = vec![0.5; 20];
    v[3] = 1.0;
    assert!(fit_mle(PairCopulaFamily::plain(FamilyKind::Gaussian), &u, &v).is_err());
}

#[test]
fn aic_selection_harness() {
    let mut ind_hits = 0;
    let mut gauss_hits = 0;
    for trial in 0..20u64 {
        let mut rng = RngStream::with_stream(77, trial).rng();
        let u: Vec<f64> = (0..2000).map(|_| rng.random_range(0.0005..0.9995)).collect();
        let v: Vec<f64> = (0..2000).map(|_| rng.random_range(0.0005..0.9995)).collect();
        let tau = crate::numerics::kendall_tau(&u, &v).unwrap();
        let fit = select_aic(&u, &v, &PairCopulaFamily::candidates_for_tau(tau)).unwrap();
        ind_hits += fit.copula.is_independence() as usize;

        let (u, v) = gaussian_sample(0.7, 2000, 1000 + trial);
        let tau = crate::numerics::kendall_tau(&u, &v).unwrap();
        let fit = select_aic(&u, &v, &PairCopulaFamily::candidates_for_tau(tau)).unwrap();
        gauss_hits += (fit.copula.kind() == FamilyKind::Gaussian) as usize;
    }
    assert!(ind_hits >= 18, "independence chosen {ind_hits}/20");
    assert!(gauss_hits >= 16, "gaussian chosen {gauss_hits}/20");
}

#[test]
fn aic_single_candidate_and_ties() {
    let (u, v) = gaussian_sample(0.5, 200, 4);
    let only = [PairCopulaFamily::plain(FamilyKind::Independence)];
    let fit = select_aic(&u, &v, &only).unwrap();
    assert!(fit.copula.is_independence());
    assert_eq!(fit.aic, 0.0);
    let pure = SelectOptions { independence_level: None };
    let fit = select_aic_with(&u, &v, &PairCopulaFamily::candidates_for_tau(0.3), &pure).unwrap();
    assert!(!fit.copula.is_independence());
    let no_ind = [PairCopulaFamily::plain(FamilyKind::Gaussian)];
    assert!(select_aic(&u, &v, &no_ind).is_err());
}

#[test]
fn serde_round_trip_and_errors() {
    for c in grid().into_iter().chain([PairCopula::independence()]) {
        let s = serde_json::to_string(&c).unwrap();
        let back: PairCopula = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
    let s = serde_json::to_string(&pc(FamilyKind::Gumbel, 180, 2.0)).unwrap();
    assert_eq!(s, r#"{"family":"gumbel","rotation":180,"theta":2.0}"#);
    let err = serde_json::from_str::<PairCopula>(r#"{"family":"student","rotation":0,"theta":2.0}"#)
        .unwrap_err();
    assert!(err.to_string().contains("student"), "{err}");
    assert!(serde_json::from_str::<PairCopula>(r#"{"family":"clayton","rotation":45,"theta":2.0}"#).is_err());
    assert!(serde_json::from_str::<PairCopula>(r#"{"family":"gumbel","rotation":0,"theta":0.5}"#).is_err());
}

#[test]
fn independence_pvalue_behaves() {
    assert_eq!(independence_pvalue(0.0, 100), 1.0);
    // z = 1.96 at the 5% boundary
    let n = 1000usize;
    let nf = n as f64;
    let tau = 1.959964 * (2.0 * (2.0 * nf + 5.0)).sqrt() / (3.0 * (nf * (nf - 1.0)).sqrt());
    assert!((independence_pvalue(tau, n) - 0.05).abs() < 1e-6);
    assert!(independence_pvalue(0.3, 2000) < 1e-10);
}

#[test]
fn frank_near_zero_is_independence() {
    let c = PairCopula::new(PairCopulaFamily::plain(FamilyKind::Frank), Some(5e-5)).unwrap();
    assert!(c.is_independence());
}

proptest! {
    #[test]
    fn h_inverse_inverts_h(u in 0.01f64..0.99, v in 0.01f64..0.99, idx in 0usize..40) {
        let cs = grid();
        let c = cs[idx % cs.len()];
        let w = c.h(u, v);
        let back = c.h_inverse(w, v);
        // where h saturates near 0 or 1 the level itself carries only a few
        // digits; there the inverse must reproduce the level instead
        let ok = (back - u).abs() < 1e-8 || (c.h(back, v) - w).abs() < 1e-13;
        prop_assert!(ok, "{} u={} v={} back={}", c, u, v, back);
    }

    #[test]
    fn cdf_within_frechet_bounds(u in 0.001f64..0.999, v in 0.001f64..0.999, idx in 0usize..40) {
        let cs = grid();
        let c = cs[idx % cs.len()];
        let cv = c.cdf(u, v);
        prop_assert!(cv >= (u + v - 1.0).max(0.0) - 1e-12 && cv <= u.min(v) + 1e-12);
    }
}
