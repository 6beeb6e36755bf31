use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CVineCopula, FitOptions};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{empirical_pit, sample_sd, Matrix, QuantileTable, RngStream};
use crate::paircopula::{clamp01, PairCopula};

pub const SCHEMA_VERSION: u32 = 1;

/// Marginal of one covariate: its sorted training values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    pub name: String,
    pub quantile_table: QuantileTable,
}

/// Fitted generative model: margins plus a C-vine whose tree-1 root is the
/// response.
///
/// Copula variable `p < d` is covariate `order[p]`; variable `d` is the
/// response. So the last covariate in the order is the root of tree 2 and
/// the first one is never a root.
#[derive(Debug, Clone, PartialEq)]
pub struct CVineModel {
    order: Vec<usize>,
    n_train: usize,
    marginals: Vec<Marginal>,
    response_name: String,
    response_prevalence: f64,
    vine: CVineCopula,
}

/// Per-tree log-odds contributions for one covariate row.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiDecomposition {
    /// `terms[t - 1]` is ψ_t.
    pub terms: Vec<f64>,
}

impl PsiDecomposition {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }

    /// Σ_{t ≤ tau} ψ_t.
    pub fn truncated(&self, tau: usize) -> f64 {
        self.terms.iter().take(tau).sum()
    }
}

fn check_order(order: &[usize], d: usize) -> Result<()> {
    if order.len() != d {
        return Err(Error::Data(format!("order has {} entries for {d} covariates", order.len())));
    }
    let mut seen = vec![false; d];
    for &j in order {
        if j >= d || seen[j] {
            return Err(Error::Data(format!("order is not a permutation of 0..{d}")));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Fits margins and the C-vine up to tree `t_max`.
///
/// The binary response is spread to a latent continuous variable
/// (y + uniform noise drawn from `stream`) before ranking.
pub fn fit_cvine(data: &Dataset, order: &[usize], t_max: usize, stream: &RngStream) -> Result<CVineModel> {
    fit_cvine_with(data, order, t_max, stream, &FitOptions::default())
}

pub fn fit_cvine_with(
    data: &Dataset,
    order: &[usize],
    t_max: usize,
    stream: &RngStream,
    opts: &FitOptions,
) -> Result<CVineModel> {
    let (n, d) = (data.n_rows(), data.n_covariates());
    if n < 30 {
        return Err(Error::Data(format!("fitting needs at least 30 rows, got {n}")));
    }
    if d == 0 {
        return Err(Error::Data("no covariates".into()));
    }
    check_order(order, d)?;
    if t_max == 0 || t_max > d {
        return Err(Error::Domain(format!("t_max {t_max} outside 1..={d}")));
    }
    for j in 0..d {
        let sd = sample_sd(data.covariate(j));
        if !(sd > 0.0) {
            return Err(Error::ZeroVariance(data.names()[j].clone()));
        }
    }
    let prevalence = data.prevalence();
    if prevalence == 0.0 || prevalence == 1.0 {
        return Err(Error::Data("response has a single class".into()));
    }

    let mut cols: Vec<Vec<f64>> = order.iter().map(|&j| empirical_pit(data.covariate(j))).collect();
    let mut rng = stream.rng();
    let latent: Vec<f64> = data.response().iter().map(|&y| y as f64 + rng.random::<f64>()).collect();
    cols.push(empirical_pit(&latent));
    let u = Matrix::from_columns(cols)?;
    let vine = CVineCopula::fit(&u, t_max, opts)?;

    let marginals = (0..d)
        .map(|j| {
            Ok(Marginal {
                name: data.names()[j].clone(),
                quantile_table: QuantileTable::new(data.covariate(j))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CVineModel {
        order: order.to_vec(),
        n_train: n,
        marginals,
        response_name: data.response_name().to_string(),
        response_prevalence: prevalence,
        vine,
    })
}

impl CVineModel {
    /// Assembles a model from parts, checking every invariant.
    pub fn from_parts(
        order: Vec<usize>,
        n_train: usize,
        marginals: Vec<Marginal>,
        response_name: String,
        response_prevalence: f64,
        vine: CVineCopula,
    ) -> Result<Self> {
        let d = marginals.len();
        if d == 0 {
            return Err(Error::Model("model has no covariates".into()));
        }
        check_order(&order, d).map_err(|e| Error::Model(e.to_string()))?;
        if vine.dim() != d + 1 {
            return Err(Error::Model(format!(
                "vine has {} variables, margins imply {}",
                vine.dim(),
                d + 1
            )));
        }
        if !(response_prevalence > 0.0 && response_prevalence < 1.0) {
            return Err(Error::Model(format!("response prevalence {response_prevalence} outside (0,1)")));
        }
        Ok(Self {
            order,
            n_train,
            marginals,
            response_name,
            response_prevalence,
            vine,
        })
    }

    pub fn n_covariates(&self) -> usize {
        self.marginals.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn names(&self) -> Vec<String> {
        self.marginals.iter().map(|m| m.name.clone()).collect()
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn response_prevalence(&self) -> f64 {
        self.response_prevalence
    }

    pub fn truncation_level(&self) -> usize {
        self.vine.truncation_level()
    }

    pub fn vine(&self) -> &CVineCopula {
        &self.vine
    }

    pub fn truncate(&self, t: usize) -> Result<Self> {
        Ok(Self {
            vine: self.vine.truncate(t)?,
            ..self.clone()
        })
    }

    /// `n` synthetic rows. Deterministic given `stream`.
    pub fn sample(&self, n: usize, stream: &RngStream) -> Result<Dataset> {
        let d = self.n_covariates();
        let u = self.vine.sample(n, stream);
        let mut cols = vec![Vec::new(); d];
        for (p, &j) in self.order.iter().enumerate() {
            let table = &self.marginals[j].quantile_table;
            cols[j] = u.column(p).iter().map(|&q| table.quantile(q)).collect();
        }
        let threshold = 1.0 - self.response_prevalence;
        let y = u.column(d).iter().map(|&q| u8::from(q > threshold)).collect();
        Dataset::new(self.names(), Matrix::from_columns(cols)?, self.response_name.clone(), y)
    }

    /// Covariates of one row mapped to the copula scale in vine order.
    fn covariate_pits(&self, x: &[f64]) -> Vec<f64> {
        self.order
            .iter()
            .map(|&j| clamp01(self.marginals[j].quantile_table.cdf(x[j])))
            .collect()
    }

    /// Conditional pseudo-observations at tree 2 given Y = y:
    /// F(u_k | Y = y) from the tree-1 copula between covariate k and Y.
    fn given_response(&self, u: &[f64], y: u8) -> Vec<f64> {
        let d = self.n_covariates();
        let q = 1.0 - self.response_prevalence;
        (0..d)
            .map(|k| {
                let c = self.vine.edge(1, k).cdf(u[k], q);
                let v = if y == 0 { c / q } else { (u[k] - c) / (1.0 - q) };
                clamp01(v)
            })
            .collect()
    }

    /// log P(Y = y | U_k = u_k) − log P(Y = y) for the tree-1 edge of `k`.
    fn tree1_term(&self, k: usize, uk: f64, y: u8) -> f64 {
        let q = 1.0 - self.response_prevalence;
        let p0 = self.vine.edge(1, k).h_given_first(q, uk).clamp(1e-300, 1.0);
        if y == 0 {
            p0.ln() - q.ln()
        } else {
            (1.0 - p0).max(1e-300).ln() - (1.0 - q).ln()
        }
    }

    /// Log copula densities of trees 2..=level for a covariate row with the
    /// response fixed at `y`, summed per tree.
    fn upper_tree_terms(&self, u: &[f64], y: u8) -> Vec<f64> {
        let level = self.truncation_level();
        let mut out = Vec::with_capacity(level.saturating_sub(1));
        if level < 2 {
            return out;
        }
        // after conditioning on Y, variables 0..d act like a vine on d
        // variables whose tree s + 1 is the model's tree s + 2
        let mut prev = self.given_response(u, y);
        for t in 2..=level {
            let r = self.vine.root(t);
            let mut sum = 0.0;
            let mut next = Vec::with_capacity(r);
            for k in 0..r {
                let pc: &PairCopula = self.vine.edge(t, k);
                sum += pc.log_density(prev[k], prev[r]);
                if t < level {
                    next.push(clamp01(pc.h(prev[k], prev[r])));
                }
            }
            out.push(sum);
            prev = next;
        }
        out
    }

    /// Joint log-density of covariates `x` (original column order) and
    /// response `y`. Covariate margins use a Gaussian-kernel estimate; the
    /// response enters through its Bernoulli probability.
    pub fn log_density(&self, x: &[f64], y: u8) -> f64 {
        let d = self.n_covariates();
        let u = self.covariate_pits(x);
        let p = if y == 1 { self.response_prevalence } else { 1.0 - self.response_prevalence };
        let mut total = p.ln();
        for j in 0..d {
            total += self.marginals[j].quantile_table.kde_log_density(x[j]);
        }
        for k in 0..d {
            total += self.tree1_term(k, u[k], y);
        }
        total + self.upper_tree_terms(&u, y).iter().sum::<f64>()
    }

    /// Log-odds of Y = 1 given `x`, split by tree. ψ₁ carries the prior
    /// log-odds and the tree-1 likelihood ratios; ψ_t for t ≥ 2 compares the
    /// tree-t copula densities under y = 1 and y = 0. Trees above the
    /// truncation level contribute 0.
    pub fn psi_decomposition(&self, x: &[f64]) -> PsiDecomposition {
        let d = self.n_covariates();
        let u = self.covariate_pits(x);
        let pi = self.response_prevalence;
        let mut terms = vec![0.0; d];
        terms[0] = (pi / (1.0 - pi)).ln()
            + (0..d)
                .map(|k| self.tree1_term(k, u[k], 1) - self.tree1_term(k, u[k], 0))
                .sum::<f64>();
        let one = self.upper_tree_terms(&u, 1);
        let zero = self.upper_tree_terms(&u, 0);
        for (i, (a, b)) in one.iter().zip(&zero).enumerate() {
            terms[i + 1] = a - b;
        }
        PsiDecomposition { terms }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// On-disk form of [`CVineModel`].
#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    order: Vec<usize>,
    n_train: usize,
    marginals: Vec<Marginal>,
    response_name: String,
    response_prevalence: f64,
    truncation_level: usize,
    trees: Vec<Vec<PairCopula>>,
}

impl From<&CVineModel> for ModelDocument {
    fn from(m: &CVineModel) -> Self {
        Self {
            version: SCHEMA_VERSION,
            order: m.order.clone(),
            n_train: m.n_train,
            marginals: m.marginals.clone(),
            response_name: m.response_name.clone(),
            response_prevalence: m.response_prevalence,
            truncation_level: m.truncation_level(),
            trees: m.vine.trees().to_vec(),
        }
    }
}

impl TryFrom<ModelDocument> for CVineModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        if doc.version != SCHEMA_VERSION {
            return Err(Error::Model(format!(
                "schema version {} not supported (expected {SCHEMA_VERSION})",
                doc.version
            )));
        }
        let d = doc.marginals.len();
        if doc.truncation_level > d {
            return Err(Error::Model(format!(
                "truncation level {} exceeds the {d} trees of the vine",
                doc.truncation_level
            )));
        }
        if doc.trees.len() != d {
            return Err(Error::Model(format!("{} trees for {d} covariates", doc.trees.len())));
        }
        let vine = CVineCopula::from_trees(doc.trees, doc.truncation_level)?;
        CVineModel::from_parts(
            doc.order,
            doc.n_train,
            doc.marginals,
            doc.response_name,
            doc.response_prevalence,
            vine,
        )
    }
}
