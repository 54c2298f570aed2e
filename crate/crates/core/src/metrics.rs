//! Forecast error measures.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default floor of the denominator in [`mpe`], in kWh.
pub const MPE_EPSILON: f64 = 1e-6;

/// Test-set scores of one model on one feature set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricPair {
    /// kWh².
    pub mse: f64,
    /// Percent.
    pub mpe: f64,
    pub n_samples: usize,
    pub epsilon: f64,
}

impl MetricPair {
    pub fn compute(actual: &[f64], forecast: &[f64], epsilon: f64) -> Result<Self> {
        Ok(MetricPair {
            mse: mse(actual, forecast)?,
            mpe: mpe(actual, forecast, epsilon)?,
            n_samples: actual.len(),
            epsilon,
        })
    }
}

fn check(actual: &[f64], forecast: &[f64]) -> Result<()> {
    if actual.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Mean percentage error normalised by the larger magnitude of the pair:
/// `100 * mean(|a - f| / max(|a|, |f|, eps))`. Symmetric and bounded by 100.
pub fn mpe(actual: &[f64], forecast: &[f64], epsilon: f64) -> Result<f64> {
    check(actual, forecast)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let total: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f).abs() / a.abs().max(f.abs()).max(epsilon))
        .sum();
    Ok(100.0 * total / actual.len() as f64)
}

pub fn mse(actual: &[f64], forecast: &[f64]) -> Result<f64> {
    check(actual, forecast)?;
    let total: f64 = actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| (a - f) * (a - f))
        .sum();
    Ok(total / actual.len() as f64)
}
