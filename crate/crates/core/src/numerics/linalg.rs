use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real matrix stored column-major; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("columns of unequal length".into()));
        }
        let values: Vec<f64> = columns.into_iter().flatten().collect();
        Self::checked(rows, cols, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Dimension("rows of unequal length".into()));
        }
        let mut values = vec![0.0; nrows * ncols];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                values[j * nrows + i] = *v;
            }
        }
        Self::checked(nrows, ncols, values)
    }

    fn checked(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.rows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(idx.len(), self.cols);
        for j in 0..self.cols {
            let src = self.column(j);
            let dst = out.column_mut(j);
            for (k, &i) in idx.iter().enumerate() {
                dst[k] = src[i];
            }
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut values = Vec::with_capacity(idx.len() * self.rows);
        for &j in idx {
            values.extend_from_slice(self.column(j));
        }
        Matrix {
            rows: self.rows,
            cols: idx.len(),
            values,
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.rows, self.cols, &self.values)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        Self::checked(m.nrows(), m.ncols(), m.as_slice().to_vec())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

/// Column means and sample standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl ColumnStats {
    pub fn of(m: &Matrix) -> Result<Self> {
        if m.nrows() < 2 {
            return Err(Error::Dimension("standardizing needs at least 2 rows".into()));
        }
        let n = m.nrows() as f64;
        let mut means = Vec::with_capacity(m.ncols());
        let mut sds = Vec::with_capacity(m.ncols());
        for (j, c) in m.columns().enumerate() {
            let mu = c.iter().sum::<f64>() / n;
            let var = c.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            if !(sd > 1e-12 * mu.abs().max(1.0)) {
                return Err(Error::ZeroVariance(format!("column {j}")));
            }
            means.push(mu);
            sds.push(sd);
        }
        Ok(Self { means, sds })
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for j in 0..m.ncols() {
            let (mu, sd) = (self.means[j], self.sds[j]);
            for v in out.column_mut(j) {
                *v = (*v - mu) / sd;
            }
        }
        out
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, v)| (v - self.means[j]) / self.sds[j])
            .collect()
    }
}

/// Center each column and scale it to unit sample standard deviation.
pub fn standardize(m: &Matrix) -> Result<Matrix> {
    Ok(ColumnStats::of(m)?.apply(m))
}

/// Least-squares fit with an intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl OlsFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }
}

/// Ordinary least squares of `response` on `design` plus an intercept,
/// solved by a re-orthogonalized modified Gram–Schmidt QR of the centered
/// design.
pub fn ols_fit(design: &Matrix, response: &[f64]) -> Result<OlsFit> {
    let (n, p) = (design.nrows(), design.ncols());
    if response.len() != n {
        return Err(Error::Dimension(format!(
            "design has {n} rows, response {}",
            response.len()
        )));
    }
    if n <= p + 1 {
        return Err(Error::Dimension(format!(
            "ols needs more than {} rows, got {n}",
            p + 1
        )));
    }
    let nf = n as f64;
    let x_means: Vec<f64> = design.columns().map(|c| c.iter().sum::<f64>() / nf).collect();
    let y_mean = response.iter().sum::<f64>() / nf;

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut r = vec![vec![0.0; p]; p];
    for j in 0..p {
        let mut v: Vec<f64> = design.column(j).iter().map(|x| x - x_means[j]).collect();
        let norm0 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let dot: f64 = qk.iter().zip(&v).map(|(a, b)| a * b).sum();
                r[k][j] += dot;
                for (vi, qi) in v.iter_mut().zip(qk) {
                    *vi -= dot * qi;
                }
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm0 == 0.0 || norm <= 1e-9 * norm0 {
            let mut columns: Vec<usize> = (0..j)
                .filter(|&k| r[k][j].abs() > 1e-9 * norm0.max(1e-300))
                .collect();
            columns.push(j);
            return Err(Error::RankDeficient { columns });
        }
        r[j][j] = norm;
        for vi in &mut v {
            *vi /= norm;
        }
        q.push(v);
    }

    let yc: Vec<f64> = response.iter().map(|y| y - y_mean).collect();
    let qty: Vec<f64> = q
        .iter()
        .map(|qk| qk.iter().zip(&yc).map(|(a, b)| a * b).sum())
        .collect();
    let mut beta = vec![0.0; p];
    for j in (0..p).rev() {
        let s: f64 = (j + 1..p).map(|k| r[j][k] * beta[k]).sum();
        beta[j] = (qty[j] - s) / r[j][j];
    }
    let intercept = y_mean - beta.iter().zip(&x_means).map(|(b, m)| b * m).sum::<f64>();
    Ok(OlsFit {
        intercept,
        coefficients: beta,
    })
}

/// Pearson correlation matrix of the columns of `m`. Constant columns give
/// NaN entries.
pub fn pearson_matrix(m: &Matrix) -> Matrix {
    let p = m.ncols();
    let n = m.nrows() as f64;
    let centred: Vec<Vec<f64>> = m
        .columns()
        .map(|c| {
            let mu = c.iter().sum::<f64>() / n;
            c.iter().map(|v| v - mu).collect()
        })
        .collect();
    let norms: Vec<f64> = centred.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut out = Matrix::zeros(p, p);
    for i in 0..p {
        out.set(i, i, 1.0);
        for j in i + 1..p {
            let dot: f64 = centred[i].iter().zip(&centred[j]).map(|(a, b)| a * b).sum();
            let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            out.set(i, j, r);
            out.set(j, i, r);
        }
    }
    out
}
