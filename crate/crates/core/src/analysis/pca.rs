use nalgebra::DMatrix;

use super::spectral::thin_svd;
use super::{check_dims, AnalysisError};

#[derive(Clone, Debug, PartialEq)]
pub struct Pca2 {
    pub points: Vec<[f64; 2]>,
    /// Unit principal axes; an axis is all zeros when the data has rank < 2.
    pub components: [Vec<f64>; 2],
    /// Sample variance along each axis.
    pub explained_variance: [f64; 2],
    pub mean: Vec<f64>,
}

/// Projection of mean-centered data onto its top two principal axes. Each
/// axis is oriented so its largest-magnitude loading is positive.
pub fn pca2(vectors: &[Vec<f64>]) -> Result<Pca2, AnalysisError> {
    let n = vectors.len();
    if n < 3 {
        return Err(AnalysisError::TooFew { needed: 3, got: n });
    }
    let d = check_dims(vectors)?;
    let mean: Vec<f64> = (0..d).map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
    let centered = DMatrix::from_fn(n, d, |i, j| vectors[i][j] - mean[j]);
    let svd = thin_svd(&centered);
    let mut components = [vec![0.0; d], vec![0.0; d]];
    let mut explained_variance = [0.0; 2];
    for (slot, (s, v)) in svd.values.iter().zip(&svd.right).take(2).enumerate() {
        let mut axis: Vec<f64> = v.iter().cloned().collect();
        let pivot = axis.iter().enumerate().fold(0, |best, (j, x)| if x.abs() > axis[best].abs() { j } else { best });
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|x| *x = -*x);
        }
        components[slot] = axis;
        explained_variance[slot] = s * s / (n as f64 - 1.0);
    }
    let points = (0..n)
        .map(|i| {
            let row = centered.row(i);
            let proj = |c: &Vec<f64>| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            [proj(&components[0]), proj(&components[1])]
        })
        .collect();
    Ok(Pca2 { points, components, explained_variance, mean })
}
