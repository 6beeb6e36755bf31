use super::*;
use crate::numerics::{kendall_tau, mean, pearson_matrix, sample_sd};

const BLOCKS: [std::ops::Range<usize>; 3] = [0..5, 5..10, 10..20];

fn block_of(j: usize) -> usize {
    BLOCKS.iter().position(|b| b.contains(&j)).unwrap()
}

#[test]
fn transcribed_entries() {
    let s = benchmark_spec();
    assert_eq!(s.d(), 20);
    assert_eq!(s.prevalence(), 0.5);
    assert_eq!(s.mean(0)[0], -2.42);
    assert_eq!(&s.mean(0)[..3], &[-2.42, 5.84, 20.10]);
    assert_eq!(s.mean(1)[10], 24.44);
    assert_eq!(s.covariance(0).get(0, 0), 2.57);
    assert_eq!(s.covariance(0).get(0, 1), -2.14);
    assert_eq!(s.covariance(0).get(0, 5), 0.0);
    assert_eq!(s.covariance(1).get(19, 19), 5.40);
    for k in 0..2u8 {
        for i in 0..20 {
            for j in 0..20 {
                if block_of(i) != block_of(j) {
                    assert_eq!(s.covariance(k).get(i, j), 0.0);
                }
            }
        }
    }
}

#[test]
fn transcription_checksums() {
    let want0 = [
        1.04, 1.88, 4.90, 0.15, 7.64, 2.22, 4.04, 4.07, 1.96, -0.02, -7.64, -1.64, 4.46, -0.64, 15.60, 10.41, 16.68,
        17.22, 7.64, 15.68,
    ];
    let want1 = [
        1.04, 1.88, 4.90, 0.15, 7.64, 2.22, 4.04, 4.07, 1.96, -0.02, 9.61, 3.04, 14.07, 13.90, 17.22, 12.23, 9.68,
        0.12, 14.21, -6.45,
    ];
    let s = benchmark_spec();
    for (k, want) in [(0u8, want0), (1, want1)] {
        let c = s.covariance(k);
        for (i, w) in want.iter().enumerate() {
            let sum: f64 = (0..20).map(|j| c.get(i, j)).sum();
            assert!((sum - w).abs() < 1e-9, "class {k} row {i}: {sum} vs {w}");
        }
    }
    let mu_sum: f64 = s.mean(0).iter().sum();
    assert!((mu_sum - 185.12).abs() < 1e-9, "{mu_sum}");
}

#[test]
fn covariances_are_positive_definite_and_blocky() {
    let s = benchmark_spec();
    for k in 0..2u8 {
        assert!(s.covariance(k).to_dmatrix().cholesky().is_some());
    }
    let joint = s.joint_covariance();
    for i in 0..10 {
        assert_eq!(joint.get(i, 20), 0.0);
        for j in 10..20 {
            assert_eq!(joint.get(i, j), 0.0);
        }
    }
    assert!(joint.get(10, 20) != 0.0);
}

#[test]
fn constructor_rejects_bad_input() {
    let eye = Matrix::from_columns(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let bad = Matrix::from_columns(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    let m = || [vec![0.0, 0.0], vec![1.0, 1.0]];
    assert!(BlockGaussianSpec::new(0.5, m(), [eye.clone(), eye.clone()]).is_ok());
    assert!(BlockGaussianSpec::new(0.5, m(), [eye.clone(), bad]).is_err());
    assert!(BlockGaussianSpec::new(1.0, m(), [eye.clone(), eye.clone()]).is_err());
    assert!(BlockGaussianSpec::new(0.5, [vec![0.0], vec![1.0, 1.0]], [eye.clone(), eye]).is_err());
}

#[test]
fn single_row_and_determinism() {
    let s = benchmark_spec();
    let one = simulate(&s, 1, &RngStream::new(1)).unwrap();
    assert_eq!(one.n_rows(), 1);
    assert_eq!(one.n_covariates(), 20);
    assert_eq!(one.names()[5], "x6");
    assert!(simulate(&s, 0, &RngStream::new(1)).is_err());
    let a = simulate(&s, 300, &RngStream::new(5)).unwrap();
    let b = simulate(&s, 300, &RngStream::new(5)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn class_conditional_moments() {
    let s = benchmark_spec();
    let data = simulate(&s, 50_000, &RngStream::new(2)).unwrap();
    assert!((data.prevalence() - 0.5).abs() < 3.0 * (0.25f64 / 50_000.0).sqrt());
    for k in 0..2u8 {
        let rows: Vec<usize> = (0..data.n_rows()).filter(|&i| data.response()[i] == k).collect();
        let part = data.select_rows(&rows);
        for j in 0..20 {
            let col = part.covariate(j);
            let sd = s.covariance(k).get(j, j).sqrt();
            assert!((mean(col) - s.mean(k)[j]).abs() <= 0.05 * sd, "class {k} column {j}");
            let m = mean(col);
            let ssd = sample_sd(col);
            let skew = col.iter().map(|v| ((v - m) / ssd).powi(3)).sum::<f64>() / col.len() as f64;
            assert!(skew.abs() <= 0.2, "class {k} column {j}: skew {skew}");
        }
    }
}

#[test]
fn sample_correlation_has_block_structure() {
    let s = benchmark_spec();
    let small = simulate(&s, 1000, &RngStream::new(3)).unwrap();
    let r = pearson_matrix(small.covariates());
    let big = simulate(&s, 5000, &RngStream::new(4)).unwrap();
    for i in 0..20 {
        for j in i + 1..20 {
            if block_of(i) != block_of(j) {
                assert!(r.get(i, j).abs() <= 0.1, "pearson ({i},{j}) = {}", r.get(i, j));
                let t = kendall_tau(big.covariate(i), big.covariate(j)).unwrap();
                assert!(t.abs() <= 0.05, "tau ({i},{j}) = {t}");
            }
        }
    }
}

#[test]
fn stratified_split_sizes() {
    let s = benchmark_spec();
    let data = simulate(&s, 1104, &RngStream::new(6)).unwrap();
    let (train, test) = train_test_split(&data, 0.2, &RngStream::new(7)).unwrap();
    assert_eq!((train.n_rows(), test.n_rows()), (884, 220));

    let ones = data.response().iter().filter(|&&y| y == 1).count() as f64;
    let test_ones = test.response().iter().filter(|&&y| y == 1).count() as f64;
    assert!((test_ones - 0.2 * ones).abs() <= 1.0);

    let mut rows: Vec<Vec<u64>> = Vec::new();
    for part in [&train, &test] {
        for i in 0..part.n_rows() {
            rows.push(part.row(i).iter().map(|v| v.to_bits()).collect());
        }
    }
    let mut orig: Vec<Vec<u64>> = (0..data.n_rows())
        .map(|i| data.row(i).iter().map(|v| v.to_bits()).collect())
        .collect();
    rows.sort();
    orig.sort();
    assert_eq!(rows, orig);

    let again = train_test_split(&data, 0.2, &RngStream::new(7)).unwrap();
    assert_eq!(again.0, train);
}

#[test]
fn split_rejects_degenerate_input() {
    let data = simulate(&benchmark_spec(), 50, &RngStream::new(8)).unwrap();
    assert!(train_test_split(&data, 0.0, &RngStream::new(1)).is_err());
    assert!(train_test_split(&data, 1.0, &RngStream::new(1)).is_err());
    let one_class = data.with_response(vec![0; 50]).unwrap();
    assert!(train_test_split(&one_class, 0.2, &RngStream::new(1)).is_err());
}
