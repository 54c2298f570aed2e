use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::cholesky_solve;
use crate::matrix::FeatureMatrix;
use crate::{Error, Result};

/// Ridge term added to the Gram matrix of standardized columns when it is
/// rank-deficient.
pub const LINEAR_JITTER: f64 = 1e-8;

/// Relative pivot below which the Gram matrix is treated as rank-deficient.
const RANK_TOL: f64 = 1e-10;

/// Least squares with intercept on standardized columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    /// Coefficients on the standardized columns.
    pub beta: Vec<f64>,
    /// Target mean, the intercept in standardized coordinates.
    pub intercept: f64,
}

pub(crate) fn column_stats(m: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (m.n_rows(), m.n_cols());
    let mut means = vec![0.0; p];
    for i in 0..n {
        for (mu, x) in means.iter_mut().zip(m.row(i)) {
            *mu += x;
        }
    }
    means.iter_mut().for_each(|mu| *mu /= n as f64);
    let mut scales = vec![0.0; p];
    for i in 0..n {
        for ((s, x), mu) in scales.iter_mut().zip(m.row(i)).zip(&means) {
            *s += (x - mu) * (x - mu);
        }
    }
    for s in scales.iter_mut() {
        *s = libm::sqrt(*s / n as f64);
        if !(*s > 1e-12) {
            *s = 1.0;
        }
    }
    (means, scales)
}

pub fn fit_linear(train: &FeatureMatrix) -> Result<LinearModel> {
    let (n, p) = (train.n_rows(), train.n_cols());
    if n < p + 1 {
        return Err(Error::TooFewRows {
            needed: p + 1,
            got: n,
        });
    }
    let (means, scales) = column_stats(train);
    let y_mean = train.target.iter().sum::<f64>() / n as f64;

    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut z = vec![0.0; p];
    for i in 0..n {
        for (j, x) in train.row(i).iter().enumerate() {
            z[j] = (x - means[j]) / scales[j];
        }
        let yc = train.target[i] - y_mean;
        for a in 0..p {
            rhs[a] += z[a] * yc;
            for b in 0..=a {
                gram[a * p + b] += z[a] * z[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[b * p + a] = gram[a * p + b];
        }
    }
    let beta = if p == 0 {
        Vec::new()
    } else {
        match cholesky_solve(&gram, &rhs, p, RANK_TOL) {
            Ok(beta) => beta,
            // Rank-deficient (constant or collinear columns): add the jitter.
            Err(_) => {
                for a in 0..p {
                    gram[a * p + a] += LINEAR_JITTER;
                }
                cholesky_solve(&gram, &rhs, p, 0.0)?
            }
        }
    };
    Ok(LinearModel {
        feature_names: train.columns.iter().map(|c| c.name.clone()).collect(),
        means,
        scales,
        beta,
        intercept: y_mean,
    })
}

impl LinearModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut y = self.intercept;
        for j in 0..x.len() {
            y += self.beta[j] * (x[j] - self.means[j]) / self.scales[j];
        }
        y
    }

    /// Intercept and coefficients in the original column units.
    pub fn raw_coefficients(&self) -> (f64, Vec<f64>) {
        let coef: Vec<f64> = self
            .beta
            .iter()
            .zip(&self.scales)
            .map(|(b, s)| b / s)
            .collect();
        let intercept = self.intercept
            - coef
                .iter()
                .zip(&self.means)
                .map(|(c, m)| c * m)
                .sum::<f64>();
        (intercept, coef)
    }
}
