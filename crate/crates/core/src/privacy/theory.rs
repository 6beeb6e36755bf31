//! Closed-form regression coefficients of a standardized Gaussian vector
//! whose C-vine is truncated. Variables are indexed in vine order: the last
//! variable is the root of tree 1, the one before it the root of tree 2, …

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cvine::CVineCopula;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::paircopula::FamilyKind;

/// Coefficients of regressing variable `j` on all the others (in index
/// order, `j` removed) and the residual variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaTheory {
    pub beta: Vec<f64>,
    pub sigma2: f64,
}

fn check_correlation(rho: &Matrix) -> Result<DMatrix<f64>> {
    let dim = rho.nrows();
    if dim < 2 || rho.ncols() != dim || !rho.is_symmetric(1e-12) {
        return Err(Error::Domain("correlation matrix must be square and symmetric".into()));
    }
    if (0..dim).any(|i| (rho.get(i, i) - 1.0).abs() > 1e-12) {
        return Err(Error::Domain("correlation matrix needs a unit diagonal".into()));
    }
    let m = rho.to_dmatrix();
    if m.clone().cholesky().is_none() {
        return Err(Error::Domain("correlation matrix is not positive definite".into()));
    }
    Ok(m)
}

/// Regression of `j` on the variables in `on`: (coefficients, σ²).
fn regress(m: &DMatrix<f64>, j: usize, on: &[usize]) -> (Vec<f64>, f64) {
    if on.is_empty() {
        return (Vec::new(), 1.0);
    }
    let a = DMatrix::from_fn(on.len(), on.len(), |r, c| m[(on[r], on[c])]);
    let b = DVector::from_fn(on.len(), |r, _| m[(on[r], j)]);
    let coef = a.cholesky().expect("principal submatrix of a PD matrix").solve(&b);
    let sigma2 = 1.0 - b.dot(&coef);
    (coef.iter().copied().collect(), sigma2)
}

/// Full (untruncated) regression of variable `j` on all others.
pub fn regression_beta(rho: &Matrix, j: usize) -> Result<BetaTheory> {
    let m = check_correlation(rho)?;
    let dim = m.nrows();
    if j >= dim {
        return Err(Error::Domain(format!("variable {j} out of range for dimension {dim}")));
    }
    let others: Vec<usize> = (0..dim).filter(|&k| k != j).collect();
    let (beta, sigma2) = regress(&m, j, &others);
    Ok(BetaTheory { beta, sigma2 })
}

/// Coefficients for variable `j` (0-based, a non-root of the first `tau`
/// trees) under the vine truncated at `tau`. Only the `tau` roots carry
/// weight; every other coefficient is exactly zero.
pub fn theoretical_beta(rho: &Matrix, j: usize, tau: usize) -> Result<BetaTheory> {
    let m = check_correlation(rho)?;
    let dim = m.nrows();
    if tau == 0 || j + tau >= dim {
        return Err(Error::Domain(format!(
            "truncation level {tau} needs 1 ≤ τ ≤ {} for variable {j}",
            dim.saturating_sub(j + 1)
        )));
    }
    let roots: Vec<usize> = (dim - tau..dim).collect();
    let (coef, sigma2) = regress(&m, j, &roots);
    let mut beta = vec![0.0; dim - 1];
    let offset = dim - 1 - tau;
    beta[offset..].copy_from_slice(&coef);
    Ok(BetaTheory { beta, sigma2 })
}

/// Correlation matrix implied by the Gaussian vine of `rho` truncated at
/// `tau`: partial correlations above tree `tau` set to zero.
pub fn truncated_correlation(rho: &Matrix, tau: usize) -> Result<Matrix> {
    check_correlation(rho)?;
    let vine = CVineCopula::gaussian_from_correlation(rho)?.truncate(tau)?;
    gaussian_vine_correlation(&vine)
}

/// Correlation matrix of a vine whose edges are all Gaussian or
/// Independence.
pub fn gaussian_vine_correlation(vine: &CVineCopula) -> Result<Matrix> {
    let dim = vine.dim();
    let param = |t: usize, k: usize| -> Result<f64> {
        let pc = vine.edge(t, k);
        match pc.kind() {
            FamilyKind::Independence => Ok(0.0),
            FamilyKind::Gaussian => Ok(pc.theta().expect("gaussian has a parameter")),
            other => Err(Error::Domain(format!("edge ({t},{k}) is {}, not gaussian", other.name()))),
        }
    };
    // p holds partial correlations given the roots of trees 1..t−1,
    // rebuilt from the last tree back to the first
    let mut p = Matrix::zeros(dim, dim);
    for i in 0..dim {
        p.set(i, i, 1.0);
    }
    for t in (1..dim).rev() {
        let r = dim - t;
        let mut prev = p.clone();
        let a: Vec<f64> = (0..r).map(|k| param(t, k)).collect::<Result<_>>()?;
        for k in 0..r {
            prev.set(k, r, a[k]);
            prev.set(r, k, a[k]);
        }
        for i in 0..r {
            for j in 0..r {
                if i != j {
                    let v = p.get(i, j) * ((1.0 - a[i] * a[i]) * (1.0 - a[j] * a[j])).sqrt() + a[i] * a[j];
                    prev.set(i, j, v);
                }
            }
        }
        p = prev;
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub holds: bool,
    pub max_abs_beta: f64,
}

/// Whether truncation at `tau` leaves every sensitive variable in `s`
/// with an all-zero coefficient vector. `k` and `s` are positions in vine
/// order and must be disjoint, with τ ≤ dim − |K| − |S|.
pub fn block_privacy_check(rho: &Matrix, k: &[usize], s: &[usize], tau: usize) -> Result<BlockCheck> {
    if s.iter().any(|j| k.contains(j)) {
        return Err(Error::Domain("sensitive and associated sets overlap".into()));
    }
    let dim = rho.nrows();
    if tau == 0 || tau + k.len() + s.len() > dim {
        return Err(Error::Domain(format!(
            "truncation level {tau} exceeds the safe bound {}",
            dim.saturating_sub(k.len() + s.len())
        )));
    }
    let mut max_abs_beta = 0.0f64;
    for &j in s {
        let b = theoretical_beta(rho, j, tau)?;
        max_abs_beta = b.beta.iter().fold(max_abs_beta, |m, v| m.max(v.abs()));
    }
    Ok(BlockCheck {
        holds: max_abs_beta <= 1e-12,
        max_abs_beta,
    })
}
