//! Simulated benchmark data: a binary response with class-conditional
//! Gaussian covariates.

mod benchmark;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, RngStream};

/// Two-class Gaussian mixture: Y ~ Bernoulli(prevalence), X | Y = k ~ N(μ_k, Σ_k).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGaussianSpec {
    prevalence: f64,
    means: [Vec<f64>; 2],
    covariances: [Matrix; 2],
    /// Lower Cholesky factors, row-major.
    factors: [Vec<Vec<f64>>; 2],
}

impl BlockGaussianSpec {
    pub fn new(prevalence: f64, means: [Vec<f64>; 2], covariances: [Matrix; 2]) -> Result<Self> {
        if !(prevalence > 0.0 && prevalence < 1.0) {
            return Err(Error::Domain(format!("prevalence {prevalence} outside (0,1)")));
        }
        let d = means[0].len();
        if d == 0 || means[1].len() != d {
            return Err(Error::Dimension("class means must share a nonzero length".into()));
        }
        let mut factors: [Vec<Vec<f64>>; 2] = Default::default();
        for (k, sigma) in covariances.iter().enumerate() {
            if sigma.nrows() != d || sigma.ncols() != d {
                return Err(Error::Dimension(format!("covariance {k} is not {d}x{d}")));
            }
            if !sigma.is_symmetric(0.0) {
                return Err(Error::Domain(format!("covariance {k} is not symmetric")));
            }
            let chol = sigma
                .to_dmatrix()
                .cholesky()
                .ok_or_else(|| Error::Domain(format!("covariance {k} is not positive definite")))?;
            let l = chol.l();
            factors[k] = (0..d).map(|i| (0..=i).map(|j| l[(i, j)]).collect()).collect();
        }
        Ok(Self {
            prevalence,
            means,
            covariances,
            factors,
        })
    }

    pub fn d(&self) -> usize {
        self.means[0].len()
    }

    pub fn prevalence(&self) -> f64 {
        self.prevalence
    }

    pub fn mean(&self, class: u8) -> &[f64] {
        &self.means[class as usize]
    }

    pub fn covariance(&self, class: u8) -> &Matrix {
        &self.covariances[class as usize]
    }

    /// Correlation matrix of X | Y = class.
    pub fn correlation(&self, class: u8) -> Matrix {
        let s = self.covariance(class);
        let d = self.d();
        let mut out = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, s.get(i, j) / (s.get(i, i) * s.get(j, j)).sqrt());
            }
        }
        out
    }

    /// Unconditional covariance of (X, Y) treating Y as numeric 0/1.
    pub fn joint_covariance(&self) -> Matrix {
        let d = self.d();
        let p = self.prevalence;
        let diff: Vec<f64> = (0..d).map(|i| self.means[1][i] - self.means[0][i]).collect();
        let mut out = Matrix::zeros(d + 1, d + 1);
        for i in 0..d {
            for j in 0..d {
                let within = (1.0 - p) * self.covariances[0].get(i, j) + p * self.covariances[1].get(i, j);
                out.set(i, j, within + p * (1.0 - p) * diff[i] * diff[j]);
            }
            out.set(i, d, p * (1.0 - p) * diff[i]);
            out.set(d, i, p * (1.0 - p) * diff[i]);
        }
        out.set(d, d, p * (1.0 - p));
        out
    }
}

fn to_matrix(rows: &[[f64; 20]; 20]) -> Matrix {
    Matrix::from_columns((0..20).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
        .expect("literal data is finite")
}

/// The 20-covariate benchmark with balanced classes and three mutually
/// independent blocks {x1..x5}, {x6..x10}, {x11..x20}; only the last block
/// depends on the response.
pub fn benchmark_spec() -> BlockGaussianSpec {
    BlockGaussianSpec::new(
        0.5,
        [benchmark::MU0.to_vec(), benchmark::MU1.to_vec()],
        [to_matrix(&benchmark::SIGMA0), to_matrix(&benchmark::SIGMA1)],
    )
    .expect("benchmark covariances are positive definite")
}

/// Column names `x1, …, xd`.
pub fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

/// `n` rows, class first, then the conditional Gaussian via Cholesky.
pub fn simulate(spec: &BlockGaussianSpec, n: usize, stream: &RngStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Domain("cannot simulate zero rows".into()));
    }
    let d = spec.d();
    let mut rng = stream.rng();
    let mut cols = vec![Vec::with_capacity(n); d];
    let mut y = Vec::with_capacity(n);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        let class = u8::from(rng.random::<f64>() < spec.prevalence);
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let (mu, l) = (&spec.means[class as usize], &spec.factors[class as usize]);
        for i in 0..d {
            let dot: f64 = l[i].iter().zip(&z).map(|(a, b)| a * b).sum();
            cols[i].push(mu[i] + dot);
        }
        y.push(class);
    }
    Dataset::new(default_names(d), Matrix::from_columns(cols)?, "y", y)
}

/// Stratified split into (train, test). The test part has ⌊fraction · n⌋
/// rows, shared across classes by largest remainder. Rows keep their
/// original relative order.
pub fn train_test_split(data: &Dataset, test_fraction: f64, stream: &RngStream) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Domain(format!("test fraction {test_fraction} outside (0,1)")));
    }
    let mut by_class: [Vec<usize>; 2] = Default::default();
    for (i, &y) in data.response().iter().enumerate() {
        by_class[y as usize].push(i);
    }
    if by_class.iter().any(|c| c.len() < 2) {
        return Err(Error::Data("each class needs at least two rows to split".into()));
    }
    let n = data.n_rows();
    let total = (test_fraction * n as f64).floor() as usize;
    let targets: Vec<f64> = by_class.iter().map(|c| test_fraction * c.len() as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let mut left = total.saturating_sub(counts.iter().sum());
    let mut by_remainder = [0usize, 1];
    by_remainder.sort_by(|&a, &b| (targets[b] - targets[b].floor()).total_cmp(&(targets[a] - targets[a].floor())));
    for c in by_remainder {
        if left > 0 {
            counts[c] += 1;
            left -= 1;
        }
    }
    if counts.iter().zip(&by_class).any(|(&k, c)| k == 0 || k >= c.len()) {
        return Err(Error::Data("split leaves a class empty on one side".into()));
    }

    let mut rng = stream.rng();
    let mut test = Vec::with_capacity(total);
    let mut train = Vec::with_capacity(n - total);
    for (c, idx) in by_class.iter_mut().enumerate() {
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..counts[c]]);
        train.extend_from_slice(&idx[counts[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.select_rows(&train), data.select_rows(&test)))
}

#[cfg(test)]
mod tests;
