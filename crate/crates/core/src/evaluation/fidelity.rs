use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{quantile_sorted, ColumnStats, Matrix};

pub const GRID_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub alpha: Vec<f64>,
    pub precision_curve: Vec<f64>,
    pub beta: Vec<f64>,
    pub recall_curve: Vec<f64>,
    pub integrated_precision: f64,
    pub integrated_recall: f64,
    pub authenticity: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Row with the smallest summed distance to all others.
fn medoid(rows: &[Vec<f64>]) -> usize {
    let sums: Vec<f64> = rows
        .par_iter()
        .map(|r| rows.iter().map(|s| dist(r, s)).sum())
        .collect();
    sums.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one row")
}

/// Fraction of `others` inside balls around the medoid of `own` whose radii
/// are the grid quantiles of `own`'s medoid distances.
fn coverage_curve(own: &[Vec<f64>], others: &[Vec<f64>], grid: &[f64]) -> Vec<f64> {
    let centre = &own[medoid(own)];
    let mut radii: Vec<f64> = own.iter().map(|r| dist(r, centre)).collect();
    radii.sort_by(f64::total_cmp);
    let mut d_other: Vec<f64> = others.iter().map(|r| dist(r, centre)).collect();
    d_other.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&a| {
            let r = quantile_sorted(&radii, a);
            d_other.partition_point(|&d| d <= r) as f64 / d_other.len() as f64
        })
        .collect()
}

/// 1 − 2 ∫ |curve − grid| by the trapezoid rule.
fn integrated(curve: &[f64], grid: &[f64]) -> f64 {
    let dev: Vec<f64> = curve.iter().zip(grid).map(|(c, g)| (c - g).abs()).collect();
    let area: f64 = grid.windows(2).zip(dev.windows(2)).map(|(g, d)| (g[1] - g[0]) * (d[0] + d[1]) / 2.0).sum();
    1.0 - 2.0 * area
}

/// α-precision, β-recall and authenticity of `synthetic` against `real`.
///
/// Both sides are standardized with the real column statistics. Supports
/// are balls around each side's medoid.
pub fn fidelity(real: &Matrix, synthetic: &Matrix) -> Result<FidelityReport> {
    if real.ncols() != synthetic.ncols() {
        return Err(Error::Dimension(format!(
            "real has {} columns, synthetic {}",
            real.ncols(),
            synthetic.ncols()
        )));
    }
    if real.nrows() < 2 || synthetic.nrows() < 2 {
        return Err(Error::Data("fidelity needs at least two rows on each side".into()));
    }
    let stats = ColumnStats::of(real)?;
    let to_rows = |m: &Matrix| -> Vec<Vec<f64>> { (0..m.nrows()).map(|i| stats.apply_row(&m.row(i))).collect() };
    let (r, s) = (to_rows(real), to_rows(synthetic));

    let grid: Vec<f64> = (0..GRID_POINTS).map(|i| i as f64 / (GRID_POINTS - 1) as f64).collect();
    let precision_curve = coverage_curve(&r, &s, &grid);
    let recall_curve = coverage_curve(&s, &r, &grid);

    let real_nn: Vec<f64> = (0..r.len())
        .into_par_iter()
        .map(|i| {
            (0..r.len())
                .filter(|&j| j != i)
                .map(|j| dist(&r[i], &r[j]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let authentic: usize = s
        .par_iter()
        .map(|z| {
            let (j, dz) = r
                .iter()
                .enumerate()
                .map(|(j, x)| (j, dist(z, x)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("real rows exist");
            usize::from(dz > real_nn[j])
        })
        .sum();

    Ok(FidelityReport {
        integrated_precision: integrated(&precision_curve, &grid),
        integrated_recall: integrated(&recall_curve, &grid),
        alpha: grid.clone(),
        precision_curve,
        beta: grid,
        recall_curve,
        authenticity: authentic as f64 / s.len() as f64,
    })
}
