use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn total_cmp(a: &f64, b: &f64) -> std::cmp::Ordering {
    a.total_cmp(b)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation with the n-1 denominator.
pub fn sample_sd(x: &[f64]) -> f64 {
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (x.len() as f64 - 1.0)).sqrt()
}

/// Linear-interpolation quantile of an already sorted slice (type 7).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(total_cmp);
    quantile_sorted(&s, 0.5)
}

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pseudo-observations `rank / (n + 1)`, ties averaged.
pub fn empirical_pit(column: &[f64]) -> Vec<f64> {
    let denom = column.len() as f64 + 1.0;
    average_ranks(column).into_iter().map(|r| r / denom).collect()
}

/// Sorted sample supporting interpolated quantiles at plotting positions
/// `i / (n + 1)` and the matching piecewise-linear CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuantileTable {
    sorted: Vec<f64>,
}

impl QuantileTable {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Domain("empty sample".into()));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite value in sample".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(total_cmp);
        Ok(Self { sorted })
    }

    /// Accepts a table that is claimed to be sorted; checks the claim.
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.is_empty() || sorted.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Model("quantile table must be nonempty and sorted".into()));
        }
        Ok(Self { sorted })
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let h = p * (n as f64 + 1.0) - 1.0;
        if h <= 0.0 {
            return self.sorted[0];
        }
        if h >= (n - 1) as f64 {
            return self.sorted[n - 1];
        }
        let lo = h.floor() as usize;
        let frac = h - lo as f64;
        self.sorted[lo] + frac * (self.sorted[lo + 1] - self.sorted[lo])
    }

    /// Inverse of [`quantile`](Self::quantile), clamped to the plotting
    /// positions of the extreme order statistics.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.sorted.len();
        let denom = n as f64 + 1.0;
        let c = self.sorted.partition_point(|&v| v <= x);
        if c == 0 {
            return 1.0 / denom;
        }
        if c == n {
            return n as f64 / denom;
        }
        let (a, b) = (self.sorted[c - 1], self.sorted[c]);
        (c as f64 + (x - a) / (b - a)) / denom
    }

    /// Log of a Gaussian-kernel density estimate with Silverman's bandwidth.
    pub fn kde_log_density(&self, x: f64) -> f64 {
        let h = self.bandwidth();
        let n = self.sorted.len() as f64;
        let zs = self.sorted.iter().map(|v| -0.5 * ((x - v) / h).powi(2));
        let m = zs.clone().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = zs.map(|z| (z - m).exp()).sum();
        m + s.ln() - n.ln() - h.ln() - 0.918_938_533_204_672_8
    }

    pub fn bandwidth(&self) -> f64 {
        let n = self.sorted.len();
        if n < 2 {
            return 1.0;
        }
        let sd = sample_sd(&self.sorted);
        let iqr = quantile_sorted(&self.sorted, 0.75) - quantile_sorted(&self.sorted, 0.25);
        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        let h = 0.9 * spread * (n as f64).powf(-0.2);
        if h > 0.0 {
            h
        } else {
            1e-3 * self.sorted[0].abs().max(1.0)
        }
    }
}

/// Quantile of an unsorted sample at plotting positions `i / (n + 1)`.
pub fn empirical_quantile(sample: &[f64], p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0,1]")));
    }
    Ok(QuantileTable::new(sample)?.quantile(p))
}

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Dimension(format!(
            "kendall_tau lengths {} and {}",
            n,
            y.len()
        )));
    }
    if n < 2 {
        return Err(Error::Domain("kendall_tau needs at least 2 observations".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |t: u64| t * (t.saturating_sub(1)) / 2;
    let mut ties_x = 0u64;
    let mut ties_xy = 0u64;
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                ties_xy += pairs(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x += pairs(run_x);
            ties_xy += pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += pairs(run_x);
    ties_xy += pairs(run_xy);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += pairs(run_y);
            run_y = 1;
        }
    }
    ties_y += pairs(run_y);

    let n0 = pairs(n as u64);
    let denom = ((n0 - ties_x) as f64 * (n0 - ties_y) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::Domain("kendall_tau undefined for a constant input".into()));
    }
    let numer = n0 as f64 - ties_x as f64 - ties_y as f64 + ties_xy as f64 - 2.0 * swaps as f64;
    Ok((numer / denom).clamp(-1.0, 1.0))
}

/// Bottom-up merge sort counting the inversions (strictly greater pairs).
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if v[j] < v[i] {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + (mid - i)].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + (end - j)].copy_from_slice(&v[j..end]);
            v[start..end].copy_from_slice(&buf[start..end]);
            start = end;
        }
        width *= 2;
    }
    swaps
}

/// Area under the ROC curve via the Mann–Whitney statistic; ties count 1/2.
pub fn auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Dimension(format!(
            "auc: {} labels vs {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = labels.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(Error::Domain("auc needs both classes present".into()));
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(l, _)| **l == 1)
        .map(|(_, r)| r)
        .sum();
    let u = rank_sum - (n1 * (n1 + 1)) as f64 / 2.0;
    Ok(u / (n1 as f64 * n0 as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kendall_brute(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut c, mut d, mut tx, mut ty) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..n {
            for j in i + 1..n {
                let dx = (x[i] - x[j]).signum() * if x[i] == x[j] { 0.0 } else { 1.0 };
                let dy = (y[i] - y[j]).signum() * if y[i] == y[j] { 0.0 } else { 1.0 };
                if dx == 0.0 && dy != 0.0 {
                    tx += 1.0;
                } else if dy == 0.0 && dx != 0.0 {
                    ty += 1.0;
                } else if dx * dy > 0.0 {
                    c += 1.0;
                } else if dx * dy < 0.0 {
                    d += 1.0;
                }
            }
        }
        (c - d) / ((c + d + tx) * (c + d + ty)).sqrt()
    }

    fn auc_brute(labels: &[u8], scores: &[f64]) -> f64 {
        let mut s = 0.0;
        let mut cnt = 0.0;
        for (i, li) in labels.iter().enumerate() {
            for (j, lj) in labels.iter().enumerate() {
                if *li == 1 && *lj == 0 {
                    cnt += 1.0;
                    s += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        s / cnt
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_tau(&[1., 2., 3.], &[10., 20., 30.]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1., 2., 3.], &[3., 2., 1.]).unwrap(), -1.0);
        // pairs: (1,2) d, (1,3) c, (1,4) c, (2,3) c, (2,4) c, (3,4) d -> (4-2)/6
        let t = kendall_tau(&[1., 2., 3., 4.], &[2., 1., 4., 3.]).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
        assert!(kendall_tau(&[1., 2.], &[1.]).is_err());
        assert!(kendall_tau(&[1.], &[1.]).is_err());
    }

    #[test]
    fn kendall_with_ties_matches_brute_force() {
        let x = [1., 1., 2., 3., 3., 3., 4., 5., 5., 0.];
        let y = [2., 1., 2., 2., 5., 5., 0., 1., 1., 9.];
        let t = kendall_tau(&x, &y).unwrap();
        assert!((t - kendall_brute(&x, &y)).abs() < 1e-14);
    }

    #[test]
    fn pit_examples() {
        assert_eq!(empirical_pit(&[5., 1., 3.]), vec![0.75, 0.25, 0.5]);
        assert_eq!(empirical_pit(&[2., 2., 2.]), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(empirical_quantile(&[1., 2., 3.], 0.5).unwrap(), 2.0);
        assert_eq!(empirical_quantile(&[3., 1., 2.], 0.0).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&[3., 1., 2.], 1.0).unwrap(), 3.0);
        let q = empirical_quantile(&[0., 10.], 0.5).unwrap();
        assert!((q - 5.0).abs() < 1e-12);
        assert!(empirical_quantile(&[], 0.5).is_err());
        assert!(empirical_quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn quantile_cdf_round_trip() {
        let t = QuantileTable::new(&[4., -1., 2.5, 7., 0.]).unwrap();
        for i in 1..60 {
            let p = 1.0 / 6.0 + (4.0 / 6.0) * i as f64 / 60.0;
            assert!((t.cdf(t.quantile(p)) - p).abs() < 1e-12);
        }
        assert_eq!(t.cdf(-100.0), 1.0 / 6.0);
        assert_eq!(t.cdf(100.0), 5.0 / 6.0);
    }

    #[test]
    fn kde_integrates_to_one() {
        let t = QuantileTable::new(&[0.0, 0.3, 1.0, 1.1, 2.0, 5.0]).unwrap();
        let gl = crate::numerics::gauss_legendre(64);
        let total: f64 = (0..40)
            .map(|k| {
                let a = -10.0 + k as f64 * 0.5;
                gl.integrate(a, a + 0.5, |x| t.kde_log_density(x).exp())
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0, 0, 1, 1], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(auc(&[0, 0, 1, 1], &[0.9, 0.8, 0.2, 0.1]).unwrap(), 0.0);
        // cross-class pairs (pos, neg): (.35,.1) win, (.35,.4) loss, (.8,.1) win, (.8,.4) win
        assert_eq!(auc(&[0, 0, 1, 1], &[0.1, 0.4, 0.35, 0.8]).unwrap(), 0.75);
        // positives .4 and .8 beat both negatives
        assert_eq!(auc(&[0, 1, 0, 1], &[0.1, 0.4, 0.35, 0.8]).unwrap(), 1.0);
        assert!(auc(&[1, 1], &[0.1, 0.2]).is_err());
    }

    proptest! {
        #[test]
        fn kendall_agrees_with_brute(v in proptest::collection::vec((0i32..6, 0i32..6), 2..40)) {
            let x: Vec<f64> = v.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1 as f64).collect();
            let brute = kendall_brute(&x, &y);
            match kendall_tau(&x, &y) {
                Ok(t) => prop_assert!((t - brute).abs() < 1e-12),
                Err(_) => prop_assert!(brute.is_nan()),
            }
        }

        #[test]
        fn kendall_symmetric_and_monotone_invariant(v in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..60)) {
            let x: Vec<f64> = v.iter().map(|p| p.0).collect();
            let y: Vec<f64> = v.iter().map(|p| p.1).collect();
            if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
                let gx: Vec<f64> = x.iter().map(|t| t.powi(3) + 2.0 * t).collect();
                let c = kendall_tau(&gx, &y).unwrap();
                prop_assert!((a - c).abs() < 1e-12);
            }
        }

        #[test]
        fn pit_in_unit_interval_and_monotone_invariant(x in proptest::collection::vec(-1e3f64..1e3, 2..50)) {
            let u = empirical_pit(&x);
            prop_assert!(u.iter().all(|&v| v > 0.0 && v < 1.0));
            let g: Vec<f64> = x.iter().map(|t| (t / 100.0).exp()).collect();
            prop_assert_eq!(u, empirical_pit(&g));
        }

        #[test]
        fn auc_matches_brute_and_complements(v in proptest::collection::vec((0u8..2, -1e3f64..1e3), 2..50)) {
            let labels: Vec<u8> = v.iter().map(|p| p.0).collect();
            let scores: Vec<f64> = v.iter().map(|p| p.1).collect();
            prop_assume!(labels.contains(&0) && labels.contains(&1));
            let a = auc(&labels, &scores).unwrap();
            prop_assert!((a - auc_brute(&labels, &scores)).abs() < 1e-12);
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let b = auc(&labels, &neg).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }
}
