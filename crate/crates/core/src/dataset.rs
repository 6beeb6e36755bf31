use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Tabular data: named numeric covariates plus a binary response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    response_name: String,
    x: Matrix,
    y: Vec<u8>,
}

impl Dataset {
    pub fn new(names: Vec<String>, x: Matrix, response_name: impl Into<String>, y: Vec<u8>) -> Result<Self> {
        if names.len() != x.ncols() {
            return Err(Error::Dimension(format!(
                "{} names for {} covariate columns",
                names.len(),
                x.ncols()
            )));
        }
        if y.len() != x.nrows() {
            return Err(Error::Dimension(format!(
                "{} responses for {} rows",
                y.len(),
                x.nrows()
            )));
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::Data(format!("response must be 0/1, found {bad}")));
        }
        Ok(Self {
            names,
            response_name: response_name.into(),
            x,
            y,
        })
    }

    /// Builds from row vectors of covariates.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>], response_name: &str, y: Vec<u8>) -> Result<Self> {
        let x = if rows.is_empty() {
            Matrix::zeros(0, names.len())
        } else {
            Matrix::from_rows(rows)?
        };
        Self::new(names, x, response_name, y)
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    /// Number of covariates d (the response is not counted).
    pub fn n_covariates(&self) -> usize {
        self.x.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn covariates(&self) -> &Matrix {
        &self.x
    }

    pub fn covariate(&self, j: usize) -> &[f64] {
        self.x.column(j)
    }

    pub fn response(&self) -> &[u8] {
        &self.y
    }

    pub fn response_f64(&self) -> Vec<f64> {
        self.y.iter().map(|&v| v as f64).collect()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i)
    }

    pub fn prevalence(&self) -> f64 {
        self.y.iter().map(|&v| v as f64).sum::<f64>() / self.y.len().max(1) as f64
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            response_name: self.response_name.clone(),
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Covariates followed by the response as a numeric column.
    pub fn full_matrix(&self) -> Matrix {
        let mut cols: Vec<Vec<f64>> = self.x.columns().map(<[f64]>::to_vec).collect();
        cols.push(self.response_f64());
        Matrix::from_columns(cols).expect("finite by construction")
    }

    /// Same covariates with a different response vector.
    pub fn with_response(&self, y: Vec<u8>) -> Result<Dataset> {
        Dataset::new(self.names.clone(), self.x.clone(), self.response_name.clone(), y)
    }

    /// Replaces row `i` by the given covariates and response.
    pub fn replace_row(&mut self, i: usize, x: &[f64], y: u8) {
        for (j, v) in x.iter().enumerate() {
            self.x.set(i, j, *v);
        }
        self.y[i] = y;
    }

    /// Concatenates rows of two datasets with identical columns.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.names != other.names {
            return Err(Error::Dimension("datasets have different columns".into()));
        }
        let cols: Vec<Vec<f64>> = (0..self.n_covariates())
            .map(|j| {
                let mut c = self.covariate(j).to_vec();
                c.extend_from_slice(other.covariate(j));
                c
            })
            .collect();
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        Dataset::new(self.names.clone(), Matrix::from_columns(cols)?, self.response_name.clone(), y)
    }
}
