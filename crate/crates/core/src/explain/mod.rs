//! Shapley attributions and their aggregation per feature group.

mod treeshap;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::{ColumnInfo, FeatureMatrix};
use crate::models::{GbtModel, TrainedModel, Tree};
use crate::schema::FeatureGroup;
use crate::{Error, Result};

pub use treeshap::{expected_value, tree_shap_into, tree_shap_row};

/// Feature count above which [`brute_force_shap`] refuses to enumerate subsets.
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapExplanation {
    pub feature_names: Vec<String>,
    /// Expected model output, kWh.
    pub base_value: f64,
    /// Row-major `n_samples x n_features` attributions, kWh.
    pub phi: Vec<f64>,
    pub predictions: Vec<f64>,
}

impl ShapExplanation {
    pub fn n_samples(&self) -> usize {
        self.predictions.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_features();
        &self.phi[i * p..(i + 1) * p]
    }

    /// Largest `|base + sum(phi) - prediction|` over samples.
    pub fn local_accuracy_error(&self) -> f64 {
        (0..self.n_samples())
            .map(|i| {
                (self.base_value + self.row(i).iter().sum::<f64>() - self.predictions[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Mean absolute attribution per feature.
    pub fn mean_abs(&self) -> Vec<f64> {
        let p = self.n_features();
        let mut out = vec![0.0; p];
        for i in 0..self.n_samples() {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += v.abs();
            }
        }
        let n = self.n_samples().max(1) as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

fn gbt_of(model: &TrainedModel) -> Result<&GbtModel> {
    match model {
        TrainedModel::Gbt(m) => Ok(m),
        other => Err(Error::Unsupported(alloc::format!(
            "tree_shap needs a gbt model, got {}; use brute_force_shap for other models",
            other.kind()
        ))),
    }
}

/// Exact attributions of a boosted-tree model for every row of `matrix`.
pub fn tree_shap(model: &TrainedModel, matrix: &FeatureMatrix) -> Result<ShapExplanation> {
    let gbt = gbt_of(model)?;
    model.check_columns(matrix)?;
    let mut phi = Vec::with_capacity(matrix.n_rows() * matrix.n_cols());
    let mut predictions = Vec::with_capacity(matrix.n_rows());
    for i in 0..matrix.n_rows() {
        let x = matrix.row(i);
        phi.extend(tree_shap_row(gbt, x));
        predictions.push(gbt.predict_row(x));
    }
    Ok(ShapExplanation {
        feature_names: gbt.feature_names.clone(),
        base_value: expected_value(gbt),
        phi,
        predictions,
    })
}

/// Reference distribution for the coalition game of [`brute_force_shap`].
#[derive(Debug, Clone, Copy)]
pub enum Baseline<'a> {
    /// Features outside the coalition take values from each background row;
    /// the game value is the mean prediction. Works for any model.
    Background(&'a FeatureMatrix),
    /// Features outside the coalition are integrated out along the tree,
    /// weighting branches by training cover. The game [`tree_shap`] solves.
    TreeCover,
}

/// Expected tree output when only features in `mask` are known.
fn cover_expectation(tree: &Tree, x: &[f64], mask: u32, node: usize) -> f64 {
    let n = &tree.nodes[node];
    match n.children {
        None => n.leaf_value,
        Some((l, r)) => {
            if mask & (1 << n.feature) != 0 {
                cover_expectation(
                    tree,
                    x,
                    mask,
                    if x[n.feature] < n.threshold { l } else { r },
                )
            } else {
                let (cl, cr) = (tree.nodes[l].cover, tree.nodes[r].cover);
                (cl * cover_expectation(tree, x, mask, l)
                    + cr * cover_expectation(tree, x, mask, r))
                    / n.cover
            }
        }
    }
}

/// Shapley values of `x` by enumerating all feature subsets.
pub fn brute_force_shap(
    model: &TrainedModel,
    x: &[f64],
    baseline: Baseline<'_>,
) -> Result<Vec<f64>> {
    let m = model.feature_names().len();
    if x.len() != m {
        return Err(Error::InvalidInput(alloc::format!(
            "row has {} values, model has {m} features",
            x.len()
        )));
    }
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyFeatures {
            limit: BRUTE_FORCE_LIMIT,
            got: m,
        });
    }
    let value: alloc::boxed::Box<dyn Fn(u32) -> f64 + '_> = match baseline {
        Baseline::Background(bg) => {
            model.check_columns(bg)?;
            if bg.n_rows() == 0 {
                return Err(Error::Empty);
            }
            alloc::boxed::Box::new(move |mask: u32| {
                let mut z = vec![0.0; m];
                let mut total = 0.0;
                for i in 0..bg.n_rows() {
                    let b = bg.row(i);
                    for j in 0..m {
                        z[j] = if mask & (1 << j) != 0 { x[j] } else { b[j] };
                    }
                    total += model.predict_row(&z);
                }
                total / bg.n_rows() as f64
            })
        }
        Baseline::TreeCover => {
            let gbt = gbt_of(model)?;
            alloc::boxed::Box::new(move |mask: u32| {
                gbt.base_score
                    + gbt
                        .trees
                        .iter()
                        .map(|t| cover_expectation(t, x, mask, 0))
                        .sum::<f64>()
            })
        }
    };
    let values: Vec<f64> = (0..1u32 << m).map(value).collect();
    let mut fact = vec![1.0f64; m + 1];
    for k in 1..=m {
        fact[k] = fact[k - 1] * k as f64;
    }
    let mut phi = vec![0.0; m];
    for (j, p) in phi.iter_mut().enumerate() {
        for s in 0..1u32 << m {
            if s & (1 << j) != 0 {
                continue;
            }
            let k = s.count_ones() as usize;
            let w = fact[k] * fact[m - k - 1] / fact[m];
            *p += w * (values[(s | (1 << j)) as usize] - values[s as usize]);
        }
    }
    Ok(phi)
}

/// Relative share of each feature group in total mean |phi|, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupContribution {
    pub domain: f64,
    pub contextual: f64,
    pub behavioral: f64,
}

impl GroupContribution {
    pub fn share(&self, g: FeatureGroup) -> f64 {
        match g {
            FeatureGroup::Domain => self.domain,
            FeatureGroup::Contextual => self.contextual,
            FeatureGroup::Behavioral => self.behavioral,
        }
    }
}

/// Aggregate per-feature mean |phi| by the group of each column. One-hot
/// columns carry their parent descriptor's group.
pub fn group_contributions(
    expl: &ShapExplanation,
    columns: &[ColumnInfo],
) -> Result<GroupContribution> {
    if columns.len() != expl.n_features()
        || columns
            .iter()
            .zip(&expl.feature_names)
            .any(|(c, n)| c.name != *n)
    {
        return Err(Error::ColumnMismatch {
            expected: expl.feature_names.clone(),
            found: columns.iter().map(|c| c.name.clone()).collect(),
        });
    }
    let mut sums = [0.0; 3];
    for (c, v) in columns.iter().zip(expl.mean_abs()) {
        sums[c.group.index()] += v;
    }
    let total: f64 = sums.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput(
            "all attributions are zero; group shares are undefined".into(),
        ));
    }
    let pct = |g: FeatureGroup| 100.0 * sums[g.index()] / total;
    Ok(GroupContribution {
        domain: pct(FeatureGroup::Domain),
        contextual: pct(FeatureGroup::Contextual),
        behavioral: pct(FeatureGroup::Behavioral),
    })
}
