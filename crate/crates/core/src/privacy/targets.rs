use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::numerics::{quantile_sorted, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetMode {
    Outlier,
    Random,
}

/// Row indices of attack targets.
///
/// Outliers lie strictly outside the central 95% of the sensitive column;
/// when more are available than requested, the most extreme ranks win,
/// alternating between the two tails. Random targets are drawn uniformly
/// without replacement. Both lists come back sorted.
pub fn select_targets(
    data: &Dataset,
    sensitive: usize,
    mode: TargetMode,
    count: usize,
    stream: &RngStream,
) -> Result<Vec<usize>> {
    let n = data.n_rows();
    if sensitive >= data.n_covariates() {
        return Err(Error::Domain(format!("sensitive column {sensitive} out of range")));
    }
    if count == 0 || count > n {
        return Err(Error::Domain(format!("cannot pick {count} targets from {n} rows")));
    }
    let mut picked = match mode {
        TargetMode::Random => sample_indices(&mut stream.rng(), n, count).into_vec(),
        TargetMode::Outlier => {
            let col = data.covariate(sensitive);
            let mut sorted = col.to_vec();
            sorted.sort_by(f64::total_cmp);
            let (lo, hi) = (quantile_sorted(&sorted, 0.025), quantile_sorted(&sorted, 0.975));
            let median = quantile_sorted(&sorted, 0.5);
            let mut outliers: Vec<usize> = (0..n).filter(|&i| col[i] < lo || col[i] > hi).collect();
            if outliers.len() < count {
                return Err(Error::Data(format!(
                    "only {} outliers available, {count} requested",
                    outliers.len()
                )));
            }
            // extremity = rank distance from the nearer end
            let rank_from_end = |i: usize| -> usize {
                let below = sorted.partition_point(|&v| v < col[i]);
                let above = n - sorted.partition_point(|&v| v <= col[i]);
                below.min(above)
            };
            outliers.sort_by_key(|&i| (rank_from_end(i), col[i] > median, i));
            outliers.truncate(count);
            outliers
        }
    };
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (1..=n).map(|v| vec![v as f64, (v % 7) as f64]).collect();
        let y = (0..n).map(|i| (i % 2) as u8).collect();
        Dataset::from_rows(vec!["a".into(), "b".into()], &rows, "y", y).unwrap()
    }

    #[test]
    fn outliers_of_a_ramp_are_rank_extremes() {
        let data = ramp(100);
        let all = select_targets(&data, 0, TargetMode::Outlier, 6, &RngStream::new(0)).unwrap();
        assert_eq!(all, vec![0, 1, 2, 97, 98, 99]);
        let four = select_targets(&data, 0, TargetMode::Outlier, 4, &RngStream::new(0)).unwrap();
        assert_eq!(four, vec![0, 1, 98, 99]);
    }

    #[test]
    fn too_many_outliers_requested() {
        let data = ramp(100);
        assert!(select_targets(&data, 0, TargetMode::Outlier, 7, &RngStream::new(0)).is_err());
        assert!(select_targets(&data, 2, TargetMode::Random, 1, &RngStream::new(0)).is_err());
        assert!(select_targets(&data, 0, TargetMode::Random, 101, &RngStream::new(0)).is_err());
    }

    #[test]
    fn random_targets_are_reproducible_and_distinct() {
        let data = ramp(100);
        let s = RngStream::new(9);
        let a = select_targets(&data, 0, TargetMode::Random, 10, &s).unwrap();
        let b = select_targets(&data, 0, TargetMode::Random, 10, &s).unwrap();
        assert_eq!(a, b);
        let mut c = a.clone();
        c.dedup();
        assert_eq!(c.len(), 10);
        assert_ne!(a, select_targets(&data, 0, TargetMode::Random, 10, &RngStream::new(10)).unwrap());
    }
}
