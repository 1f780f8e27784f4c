use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{check_dims, AnalysisError};

/// Mean over coordinates of the unbiased per-coordinate sample variance.
pub fn cross_run_variance(vectors: &[Vec<f64>]) -> Result<f64, AnalysisError> {
    if vectors.len() < 2 {
        return Err(AnalysisError::TooFew { needed: 2, got: vectors.len() });
    }
    let d = check_dims(vectors)?;
    if d == 0 {
        return Ok(0.0);
    }
    let n = vectors.len() as f64;
    let total: f64 = (0..d)
        .map(|j| {
            let mean = vectors.iter().map(|v| v[j]).sum::<f64>() / n;
            vectors.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        })
        .sum();
    Ok(total / d as f64)
}

/// Euclidean distance between consecutive vectors.
pub fn phenotype_rate_of_change(sequence: &[Vec<f64>]) -> Result<Vec<f64>, AnalysisError> {
    if sequence.len() < 2 {
        return Err(AnalysisError::TooFew { needed: 2, got: sequence.len() });
    }
    check_dims(sequence)?;
    Ok(sequence.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendModel {
    /// `y = a + b t`
    Linear,
    /// `y = a + b ln t`
    Logarithmic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub model: TrendModel,
    pub intercept: f64,
    pub slope: f64,
    /// Two-sided p-value of the slope t-test (n - 2 degrees of freedom).
    pub p_value: f64,
    /// Zero when the response has no variance.
    pub r_squared: f64,
}

pub fn fit_trend(points: &[(f64, f64)], model: TrendModel) -> Result<TrendFit, AnalysisError> {
    let n = points.len();
    if n < 3 {
        return Err(AnalysisError::TooFew { needed: 3, got: n });
    }
    let xs: Vec<f64> = match model {
        TrendModel::Linear => points.iter().map(|p| p.0).collect(),
        TrendModel::Logarithmic => {
            if points.iter().any(|p| !(p.0 >= 1.0)) {
                return Err(AnalysisError::DegenerateDesign("logarithmic model needs t >= 1"));
            }
            points.iter().map(|p| p.0.ln()).collect()
        }
    };
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::DegenerateDesign("all t values are equal"));
    }
    let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - x_mean) * (p.1 - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse: f64 = xs.iter().zip(points).map(|(x, p)| (p.1 - intercept - slope * x).powi(2)).sum();
    let sst: f64 = points.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    let r_squared = if sst == 0.0 { 0.0 } else { 1.0 - sse / sst };

    let dof = nf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let p_value = if se == 0.0 {
        if slope == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        let t = (slope / se).abs();
        let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
        (2.0 * dist.sf(t)).clamp(0.0, 1.0)
    };
    Ok(TrendFit { model, intercept, slope, p_value, r_squared })
}
