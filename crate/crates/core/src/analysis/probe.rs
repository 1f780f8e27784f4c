use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spectral::thin_svd;
use super::{check_dims, AnalysisError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub train_r2: f64,
    pub test_r2: f64,
    pub train_size: usize,
    pub test_size: usize,
}

fn r_squared(y: &[f64], pred: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let sse: f64 = y.iter().zip(pred).map(|(v, p)| (v - p).powi(2)).sum();
    if sst == 0.0 {
        0.0
    } else {
        1.0 - sse / sst
    }
}

/// Ridge regression of `targets` on `features` with an unpenalized
/// intercept, fit on a seeded random `train_fraction` of the samples and
/// scored on both splits. `lambda = 0` gives the minimum-norm least-squares fit.
pub fn train_probe(
    features: &[Vec<f64>],
    targets: &[f64],
    train_fraction: f64,
    lambda: f64,
    seed: u64,
) -> Result<ProbeFit, AnalysisError> {
    let n = features.len();
    if n < 10 {
        return Err(AnalysisError::TooFew { needed: 10, got: n });
    }
    if targets.len() != n {
        return Err(AnalysisError::DimensionMismatch(n, targets.len()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) || !(lambda >= 0.0) {
        return Err(AnalysisError::DegenerateDesign("train fraction must be in (0, 1) and lambda >= 0"));
    }
    let d = check_dims(features)?;
    if d == 0 {
        return Err(AnalysisError::DegenerateDesign("zero-dimensional features"));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(2, n - 1);
    let (train, test) = idx.split_at(n_train);

    let x_mean: Vec<f64> =
        (0..d).map(|j| train.iter().map(|&i| features[i][j]).sum::<f64>() / n_train as f64).collect();
    let y_mean = train.iter().map(|&i| targets[i]).sum::<f64>() / n_train as f64;
    let x = DMatrix::from_fn(n_train, d, |r, j| features[train[r]][j] - x_mean[j]);
    let y = DVector::from_iterator(n_train, train.iter().map(|&i| targets[i] - y_mean));

    let mut w = DVector::zeros(d);
    let svd = thin_svd(&x);
    for ((s, u), v) in svd.values.iter().zip(&svd.left).zip(&svd.right) {
        w += v * (s / (s * s + lambda) * u.dot(&y));
    }
    let weights: Vec<f64> = w.iter().cloned().collect();
    let intercept = y_mean - weights.iter().zip(&x_mean).map(|(a, b)| a * b).sum::<f64>();

    let predict = |i: usize| intercept + features[i].iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
    let score = |split: &[usize]| {
        let y: Vec<f64> = split.iter().map(|&i| targets[i]).collect();
        let p: Vec<f64> = split.iter().map(|&i| predict(i)).collect();
        r_squared(&y, &p)
    };
    Ok(ProbeFit {
        train_r2: score(train),
        test_r2: score(test),
        weights,
        intercept,
        train_size: train.len(),
        test_size: test.len(),
    })
}
