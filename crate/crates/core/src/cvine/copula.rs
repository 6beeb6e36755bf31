use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{kendall_tau, Matrix, RngStream};
use crate::paircopula::{clamp01, select_aic_with, FamilyKind, PairCopula, PairCopulaFamily, SelectOptions};

/// Edge-selection settings for vine fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub selection: SelectOptions,
    /// Families allowed on each edge; Independence is always a candidate.
    pub families: Vec<FamilyKind>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            selection: SelectOptions::default(),
            families: FamilyKind::ALL.to_vec(),
        }
    }
}

impl FitOptions {
    /// Independence and Gaussian edges only.
    pub fn gaussian_only() -> Self {
        Self {
            families: vec![FamilyKind::Independence, FamilyKind::Gaussian],
            ..Self::default()
        }
    }

    fn candidates(&self, tau: f64) -> Vec<PairCopulaFamily> {
        PairCopulaFamily::candidates_for_tau(tau)
            .into_iter()
            .filter(|f| f.kind == FamilyKind::Independence || self.families.contains(&f.kind))
            .collect()
    }
}

/// C-vine copula on `dim` variables in star form.
///
/// Tree `t` (1-based) has root variable `dim − t`; its edges join every
/// variable `k < dim − t` to that root, conditioned on the roots of all
/// earlier trees. `trees[t - 1][k]` is the copula of edge `k`, with `k`'s
/// conditional value as the first argument and the root's as the second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVineCopula {
    dim: usize,
    truncation_level: usize,
    trees: Vec<Vec<PairCopula>>,
}

impl CVineCopula {
    /// All-independence vine.
    pub fn independence(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Dimension("a vine needs at least 2 variables".into()));
        }
        let trees = (1..dim).map(|t| vec![PairCopula::independence(); dim - t]).collect();
        Ok(Self {
            dim,
            truncation_level: dim - 1,
            trees,
        })
    }

    /// Vine from explicit trees; trees above `truncation_level` must be
    /// Independence.
    pub fn from_trees(trees: Vec<Vec<PairCopula>>, truncation_level: usize) -> Result<Self> {
        let dim = trees.len() + 1;
        if dim < 2 {
            return Err(Error::Model("a vine needs at least one tree".into()));
        }
        for (i, tree) in trees.iter().enumerate() {
            if tree.len() != dim - 1 - i {
                return Err(Error::Model(format!(
                    "tree {} has {} edges, expected {}",
                    i + 1,
                    tree.len(),
                    dim - 1 - i
                )));
            }
        }
        if truncation_level == 0 || truncation_level > dim - 1 {
            return Err(Error::Model(format!(
                "truncation level {truncation_level} outside 1..={}",
                dim - 1
            )));
        }
        if let Some((t, _)) = trees
            .iter()
            .enumerate()
            .skip(truncation_level)
            .find(|(_, tree)| tree.iter().any(|pc| !pc.is_independence()))
        {
            return Err(Error::Model(format!(
                "tree {} lies above truncation level {truncation_level} but is not independence",
                t + 1
            )));
        }
        Ok(Self {
            dim,
            truncation_level,
            trees,
        })
    }

    /// Gaussian vine whose implied correlation matrix is `rho`. Edge
    /// parameters are the partial correlations given earlier roots.
    pub fn gaussian_from_correlation(rho: &Matrix) -> Result<Self> {
        let dim = rho.nrows();
        if dim < 2 || !rho.is_symmetric(1e-12) {
            return Err(Error::Domain("correlation matrix must be square and symmetric".into()));
        }
        if (0..dim).any(|i| (rho.get(i, i) - 1.0).abs() > 1e-12) {
            return Err(Error::Domain("correlation matrix needs a unit diagonal".into()));
        }
        if rho.to_dmatrix().cholesky().is_none() {
            return Err(Error::Domain("correlation matrix is not positive definite".into()));
        }
        let mut p = rho.clone();
        let mut trees = Vec::with_capacity(dim - 1);
        for t in 1..dim {
            let r = dim - t;
            let mut tree = Vec::with_capacity(r);
            for k in 0..r {
                tree.push(PairCopula::gaussian(p.get(k, r))?);
            }
            trees.push(tree);
            let mut next = p.clone();
            for i in 0..r {
                for j in 0..r {
                    if i == j {
                        continue;
                    }
                    let (a, b) = (p.get(i, r), p.get(j, r));
                    next.set(i, j, (p.get(i, j) - a * b) / ((1.0 - a * a) * (1.0 - b * b)).sqrt());
                }
            }
            p = next;
        }
        Self::from_trees(trees, dim - 1)
    }

    /// Sequential fit on copula-scale data (`n × dim`), trees above `t_max`
    /// left as Independence.
    pub fn fit(u: &Matrix, t_max: usize, opts: &FitOptions) -> Result<Self> {
        let dim = u.ncols();
        if dim < 2 {
            return Err(Error::Dimension("a vine needs at least 2 variables".into()));
        }
        if t_max == 0 || t_max > dim - 1 {
            return Err(Error::Domain(format!("t_max {t_max} outside 1..={}", dim - 1)));
        }
        let mut level: Vec<Vec<f64>> = u.columns().map(|c| c.iter().map(|&p| clamp01(p)).collect()).collect();
        let mut trees = Vec::with_capacity(dim - 1);
        for t in 1..dim {
            let r = dim - t;
            if t > t_max {
                trees.push(vec![PairCopula::independence(); r]);
                continue;
            }
            let root = &level[r];
            let fitted: Vec<Result<(PairCopula, Vec<f64>)>> = (0..r)
                .into_par_iter()
                .map(|k| {
                    let x = &level[k];
                    let tau = kendall_tau(x, root).unwrap_or(0.0);
                    let cands = opts.candidates(tau);
                    let pc = select_aic_with(x, root, &cands, &opts.selection)?.copula;
                    let next = if t < t_max {
                        x.iter().zip(root).map(|(&a, &b)| clamp01(pc.h(a, b))).collect()
                    } else {
                        Vec::new()
                    };
                    Ok((pc, next))
                })
                .collect();
            let mut tree = Vec::with_capacity(r);
            let mut next_level = Vec::with_capacity(r);
            for item in fitted {
                let (pc, next) = item?;
                tree.push(pc);
                next_level.push(next);
            }
            trees.push(tree);
            level = next_level;
        }
        Self::from_trees(trees, t_max)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation_level(&self) -> usize {
        self.truncation_level
    }

    pub fn trees(&self) -> &[Vec<PairCopula>] {
        &self.trees
    }

    /// Copula of edge `k` in tree `t` (1-based).
    pub fn edge(&self, t: usize, k: usize) -> &PairCopula {
        &self.trees[t - 1][k]
    }

    /// Root variable of tree `t` (1-based).
    pub fn root(&self, t: usize) -> usize {
        self.dim - t
    }

    /// Same vine with every tree above `t` set to Independence.
    pub fn truncate(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.truncation_level {
            return Err(Error::Domain(format!(
                "cannot truncate at {t}: fitted level is {}",
                self.truncation_level
            )));
        }
        let mut out = self.clone();
        for tree in out.trees.iter_mut().skip(t) {
            tree.fill(PairCopula::independence());
        }
        out.truncation_level = t;
        Ok(out)
    }

    /// Conditional pseudo-observations of one point: `levels[s][k]` is
    /// F(u_k | roots of trees 1..s) for `k < dim − s`.
    pub fn conditional_levels(&self, u: &[f64]) -> Vec<Vec<f64>> {
        let mut levels = Vec::with_capacity(self.truncation_level + 1);
        levels.push(u.iter().map(|&p| clamp01(p)).collect::<Vec<f64>>());
        for t in 1..=self.truncation_level {
            let r = self.root(t);
            let prev = &levels[t - 1];
            let next = (0..r).map(|k| clamp01(self.trees[t - 1][k].h(prev[k], prev[r]))).collect();
            levels.push(next);
        }
        levels
    }

    /// Log copula density at one point of the unit cube.
    pub fn log_density(&self, u: &[f64]) -> f64 {
        let levels = self.conditional_levels(u);
        let mut total = 0.0;
        for t in 1..=self.truncation_level {
            let r = self.root(t);
            let prev = &levels[t - 1];
            for k in 0..r {
                total += self.trees[t - 1][k].log_density(prev[k], prev[r]);
            }
        }
        total
    }

    /// Inverse Rosenblatt transform of independent uniforms `w`.
    ///
    /// Variables are generated root first. Because every earlier root's
    /// conditional value given the roots before it is its own uniform,
    /// each variable only needs the raw uniforms of the roots above it.
    pub fn inverse_rosenblatt(&self, w: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut u = vec![0.0; d];
        u[d - 1] = w[d - 1];
        for k in (0..d - 1).rev() {
            let m = (d - 1 - k).min(self.truncation_level);
            let mut z = w[k];
            for s in (1..=m).rev() {
                z = self.trees[s - 1][k].h_inverse(z, w[self.root(s)]);
            }
            u[k] = z;
        }
        u
    }

    /// Forward Rosenblatt transform; inverse of [`inverse_rosenblatt`](Self::inverse_rosenblatt).
    pub fn rosenblatt(&self, u: &[f64]) -> Vec<f64> {
        let levels = self.conditional_levels(u);
        let d = self.dim;
        (0..d)
            .map(|k| {
                let m = (d - 1 - k).min(self.truncation_level);
                levels[m][k]
            })
            .collect()
    }

    /// `n` rows on the copula scale, one fresh uniform vector per row.
    pub fn sample(&self, n: usize, stream: &RngStream) -> Matrix {
        let mut rng = stream.rng();
        let mut cols = vec![Vec::with_capacity(n); self.dim];
        let mut w = vec![0.0; self.dim];
        for _ in 0..n {
            for wi in w.iter_mut() {
                *wi = clamp01(rng.random::<f64>());
            }
            for (c, v) in cols.iter_mut().zip(self.inverse_rosenblatt(&w)) {
                c.push(v);
            }
        }
        Matrix::from_columns(cols).expect("uniforms are finite")
    }
}
