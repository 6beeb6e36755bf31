use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features tried per split; `None` means ⌈√p⌉.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            features_per_split: None,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    /// Rows with `x[feature] <= threshold` go left. The threshold is an
    /// observed training value, so predictions only depend on ranks.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Class-1 fraction of the leaf reached by `row`.
    fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(p) => return p,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Bagged CART classifier with Gini splits.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<Tree>,
    n_features: usize,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [u8],
    cfg: &'a ForestConfig,
    mtry: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let ones = idx.iter().filter(|&&i| self.y[i] == 1).count();
        self.nodes.push(Node::Leaf(ones as f64 / idx.len() as f64));
        self.nodes.len() - 1
    }

    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut impl Rng) -> usize {
        let n = idx.len();
        let ones = idx.iter().filter(|&&i| self.y[i] == 1).count();
        if depth >= self.cfg.max_depth || n < 2 * self.cfg.min_leaf || ones == 0 || ones == n {
            return self.leaf(idx);
        }
        let Some((feature, threshold)) = self.best_split(idx, ones, rng) else {
            return self.leaf(idx);
        };
        let col = self.x.column(feature);
        let mut split = 0;
        for k in 0..n {
            if col[idx[k]] <= threshold {
                idx.swap(k, split);
                split += 1;
            }
        }
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf(0.0));
        let (l, r) = idx.split_at_mut(split);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[me] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        me
    }

    fn best_split(&self, idx: &[usize], ones: usize, rng: &mut impl Rng) -> Option<(usize, f64)> {
        let n = idx.len();
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<(f64, u8)> = Vec::with_capacity(n);
        for feature in sample_indices(rng, self.x.ncols(), self.mtry) {
            let col = self.x.column(feature);
            order.clear();
            order.extend(idx.iter().map(|&i| (col[i], self.y[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_ones = 0usize;
            for k in 1..n {
                left_ones += order[k - 1].1 as usize;
                if k < min_leaf || n - k < min_leaf || order[k - 1].0 == order[k].0 {
                    continue;
                }
                let (nl, nr) = (k as f64, (n - k) as f64);
                let (l1, r1) = (left_ones as f64, (ones - left_ones) as f64);
                let impurity = l1 * (nl - l1) / nl + r1 * (nr - r1) / nr;
                if best.is_none_or(|b| impurity < b.0) {
                    best = Some((impurity, feature, order[k - 1].0));
                }
            }
        }
        let parent = ones as f64 * (n - ones) as f64 / n as f64;
        best.filter(|b| b.0 < parent).map(|b| (b.1, b.2))
    }
}

impl RandomForest {
    pub fn fit(x: &Matrix, y: &[u8], cfg: &ForestConfig) -> Result<Self> {
        let (n, p) = (x.nrows(), x.ncols());
        if y.len() != n {
            return Err(Error::Dimension(format!("{} labels for {n} rows", y.len())));
        }
        if cfg.n_trees == 0 || p == 0 {
            return Err(Error::Domain("forest needs at least one tree and one feature".into()));
        }
        let ones = y.iter().filter(|&&v| v == 1).count();
        if ones == 0 || ones == n {
            return Err(Error::Data("training labels have a single class".into()));
        }
        let mtry = cfg.features_per_split.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize).clamp(1, p);
        let root = RngStream::new(cfg.seed);
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = root.derive(t as u64).rng();
                let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut b = Builder {
                    x,
                    y,
                    cfg,
                    mtry,
                    nodes: Vec::new(),
                };
                b.build(&mut idx, 0, &mut rng);
                Tree { nodes: b.nodes }
            })
            .collect();
        Ok(Self { trees, n_features: p })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Fraction of trees voting class 1; a tree whose leaf is split evenly
    /// casts half a vote.
    pub fn predict_proba_row(&self, row: &[f64]) -> f64 {
        let votes: f64 = self
            .trees
            .iter()
            .map(|t| {
                let p = t.leaf_value(row);
                if p > 0.5 {
                    1.0
                } else if p == 0.5 {
                    0.5
                } else {
                    0.0
                }
            })
            .sum();
        votes / self.trees.len() as f64
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        (0..x.nrows()).map(|i| self.predict_proba_row(&x.row(i))).collect()
    }
}

/// Forest on a dataset's covariates and response.
pub fn train_forest(train: &Dataset, cfg: &ForestConfig) -> Result<RandomForest> {
    RandomForest::fit(train.covariates(), train.response(), cfg)
}
