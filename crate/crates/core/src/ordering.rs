//! Privacy-aware covariate ordering.
//!
//! Sensitive covariates go first, then the covariates strongly associated
//! with them, then everything else. With the response as root of tree 1 and
//! the last covariate as root of tree 2, truncating the vine low enough
//! drops every edge that links a sensitive covariate to its associates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{kendall_tau, pearson_matrix, sample_sd, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Association {
    #[default]
    Kendall,
    Pearson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSpec {
    /// Sensitive covariate indices (0-based).
    pub sensitive: Vec<usize>,
    /// Association threshold ρ* > 0.
    pub threshold: f64,
    #[serde(default)]
    pub association: Association,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderResult {
    /// Covariate permutation; the response is implicitly last.
    pub order: Vec<usize>,
    /// Covariates associated above threshold with some sensitive one, in
    /// placement order.
    pub associated: Vec<usize>,
    /// Rows of the pairwise association matrix.
    pub association: Vec<Vec<f64>>,
}

/// Pairwise association of the covariates.
pub fn association_matrix(data: &Dataset, measure: Association) -> Result<Matrix> {
    let d = data.n_covariates();
    if d < 2 {
        return Err(Error::Dimension("association needs at least two covariates".into()));
    }
    for j in 0..d {
        if !(sample_sd(data.covariate(j)) > 0.0) {
            return Err(Error::ZeroVariance(data.names()[j].clone()));
        }
    }
    match measure {
        Association::Pearson => Ok(pearson_matrix(data.covariates())),
        Association::Kendall => {
            let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
            let taus = pairs
                .par_iter()
                .map(|&(i, j)| kendall_tau(data.covariate(i), data.covariate(j)))
                .collect::<Result<Vec<f64>>>()?;
            let mut m = Matrix::zeros(d, d);
            for i in 0..d {
                m.set(i, i, 1.0);
            }
            for (&(i, j), t) in pairs.iter().zip(taus) {
                m.set(i, j, t);
                m.set(j, i, t);
            }
            Ok(m)
        }
    }
}

fn check_spec(spec: &OrderSpec, d: usize) -> Result<()> {
    if !(spec.threshold > 0.0) {
        return Err(Error::Domain(format!("threshold {} must be positive", spec.threshold)));
    }
    let mut seen = vec![false; d];
    for &j in &spec.sensitive {
        if j >= d {
            return Err(Error::Domain(format!("sensitive index {j} out of range for {d} covariates")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::Domain(format!("sensitive index {j} listed twice")));
        }
    }
    Ok(())
}

/// Order from a precomputed association matrix.
pub fn order_from_association(assoc: &Matrix, spec: &OrderSpec) -> Result<OrderResult> {
    let d = assoc.nrows();
    check_spec(spec, d)?;
    let mut sensitive = spec.sensitive.clone();
    sensitive.sort_unstable();
    let is_sensitive = |k: usize| sensitive.binary_search(&k).is_ok();

    let key = |k: usize| sensitive.iter().map(|&j| assoc.get(j, k).abs()).fold(0.0, f64::max);
    let mut associated: Vec<usize> = (0..d).filter(|&k| !is_sensitive(k) && key(k) > spec.threshold).collect();
    associated.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));

    let mut order = sensitive.clone();
    order.extend_from_slice(&associated);
    order.extend((0..d).filter(|&k| !is_sensitive(k) && !associated.contains(&k)));
    Ok(OrderResult {
        order,
        associated,
        association: (0..d).map(|i| assoc.row(i)).collect(),
    })
}

pub fn find_order(data: &Dataset, spec: &OrderSpec) -> Result<OrderResult> {
    check_spec(spec, data.n_covariates())?;
    let assoc = association_matrix(data, spec.association)?;
    order_from_association(&assoc, spec)
}

/// Block-placement diagnostics for an order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub sensitive_first: bool,
    pub associated_next: bool,
    /// Largest truncation level that keeps sensitive and associated
    /// covariates apart: d + 1 − |K| − |S|.
    pub safe_truncation_bound: usize,
    pub violations: Vec<String>,
}

impl OrderReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_order(order: &[usize], sensitive: &[usize], associated: &[usize], d: usize) -> Result<OrderReport> {
    let mut seen = vec![false; d];
    if order.len() != d || order.iter().any(|&j| j >= d || std::mem::replace(&mut seen[j], true)) {
        return Err(Error::Domain(format!("order is not a permutation of 0..{d}")));
    }
    let (s, k) = (sensitive.len(), associated.len());
    if s + k > d {
        return Err(Error::Domain("sensitive and associated sets exceed d".into()));
    }
    let mut violations = Vec::new();
    for (p, &j) in order.iter().enumerate() {
        if sensitive.contains(&j) && p >= s {
            violations.push(format!("sensitive covariate {j} at position {} (expected within 1..={s})", p + 1));
        }
        if associated.contains(&j) && !(s..s + k).contains(&p) {
            violations.push(format!(
                "associated covariate {j} at position {} (expected within {}..={})",
                p + 1,
                s + 1,
                s + k
            ));
        }
    }
    let sensitive_first = order[..s].iter().all(|j| sensitive.contains(j));
    let associated_next = order[s..s + k].iter().all(|j| associated.contains(j));
    Ok(OrderReport {
        sensitive_first,
        associated_next,
        safe_truncation_bound: d + 1 - k - s,
        violations,
    })
}
