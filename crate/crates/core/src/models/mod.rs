//! Forecasters and the chronological train/test protocol.

mod gbt;
mod linear;
mod mlp;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;
use crate::{Error, Result};

pub use gbt::{fit_gbt, GbtModel, GbtParams, Tree, TreeNode};
pub use linear::{fit_linear, LinearModel, LINEAR_JITTER};
pub use mlp::{fit_mlp, Layer, MlpModel, MlpParams};

/// Column the seasonal-naive baseline forecasts from.
pub const SEASONAL_NAIVE_COLUMN: &str = "energy_lag_24";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Gbt,
    Linear,
    Mlp,
    SeasonalNaive,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Gbt, Self::Linear, Self::Mlp, Self::SeasonalNaive];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gbt => "gbt",
            Self::Linear => "linear",
            Self::Mlp => "mlp",
            Self::SeasonalNaive => "seasonal_naive",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(alloc::format!("unknown model kind `{s}`")))
    }
}

/// Hyper-parameters of every model kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub gbt: GbtParams,
    pub mlp: MlpParams,
}

/// Predicts the consumption of the same hour one day earlier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalNaive {
    pub feature_names: Vec<String>,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Linear(LinearModel),
    Gbt(GbtModel),
    Mlp(MlpModel),
    SeasonalNaive(SeasonalNaive),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Linear(_) => ModelKind::Linear,
            Self::Gbt(_) => ModelKind::Gbt,
            Self::Mlp(_) => ModelKind::Mlp,
            Self::SeasonalNaive(_) => ModelKind::SeasonalNaive,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Self::Linear(m) => &m.feature_names,
            Self::Gbt(m) => &m.feature_names,
            Self::Mlp(m) => &m.feature_names,
            Self::SeasonalNaive(m) => &m.feature_names,
        }
    }

    pub fn check_columns(&self, matrix: &FeatureMatrix) -> Result<()> {
        let names = self.feature_names();
        if names.len() != matrix.n_cols()
            || names.iter().zip(&matrix.columns).any(|(a, c)| *a != c.name)
        {
            return Err(Error::ColumnMismatch {
                expected: names.to_vec(),
                found: matrix.columns.iter().map(|c| c.name.clone()).collect(),
            });
        }
        Ok(())
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        match self {
            Self::Linear(m) => m.predict_row(x),
            Self::Gbt(m) => m.predict_row(x),
            Self::Mlp(m) => m.predict_row(x),
            Self::SeasonalNaive(m) => x[m.column],
        }
    }

    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_columns(matrix)?;
        let out: Vec<f64> = (0..matrix.n_rows())
            .map(|i| self.predict_row(matrix.row(i)))
            .collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("prediction"));
        }
        Ok(out)
    }
}

pub fn fit_seasonal_naive(train: &FeatureMatrix) -> Result<TrainedModel> {
    let column = train
        .column_index(SEASONAL_NAIVE_COLUMN)
        .ok_or_else(|| Error::MissingChannel(SEASONAL_NAIVE_COLUMN.to_string()))?;
    Ok(TrainedModel::SeasonalNaive(SeasonalNaive {
        feature_names: train.columns.iter().map(|c| c.name.clone()).collect(),
        column,
    }))
}

fn check_finite(m: &FeatureMatrix) -> Result<()> {
    if m.data.iter().chain(&m.target).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training matrix"));
    }
    Ok(())
}

/// Fit a model of `kind`. `seed` only affects the MLP.
pub fn fit(
    kind: ModelKind,
    train: &FeatureMatrix,
    params: &ModelParams,
    seed: u64,
) -> Result<TrainedModel> {
    check_finite(train)?;
    Ok(match kind {
        ModelKind::Linear => TrainedModel::Linear(fit_linear(train)?),
        ModelKind::Gbt => TrainedModel::Gbt(fit_gbt(train, &params.gbt)?),
        ModelKind::Mlp => TrainedModel::Mlp(fit_mlp(train, &params.mlp, seed)?),
        ModelKind::SeasonalNaive => fit_seasonal_naive(train)?,
    })
}

pub const TRAIN_FRACTION: f64 = 0.8;

/// Number of training rows among `n`: `floor(0.8 n)`.
pub fn train_len(n: usize) -> usize {
    // Integer arithmetic avoids 0.8 * n rounding below an exact multiple.
    n * 4 / 5
}

/// Row indices of the chronological split, applied per household: the first
/// `floor(0.8 n)` rows of each household train, the rest test.
pub fn split_indices(m: &FeatureMatrix) -> (Vec<usize>, Vec<usize>) {
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for h in 0..m.households.len() {
        let rows: Vec<usize> = (0..m.n_rows())
            .filter(|&i| m.row_household[i] == h)
            .collect();
        let k = train_len(rows.len());
        train.extend_from_slice(&rows[..k]);
        test.extend_from_slice(&rows[k..]);
    }
    (train, test)
}

pub fn split_train_test(m: &FeatureMatrix) -> (FeatureMatrix, FeatureMatrix) {
    let (train, test) = split_indices(m);
    (m.select_rows(&train), m.select_rows(&test))
}
