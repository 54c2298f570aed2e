//! The feature-group ablation grid.
//!
//! Every household is assembled once with the full descriptor inventory so
//! all grid rows share one row set; each grid row then keeps the columns of
//! its descriptor selection. Cells are independent and can be evaluated in
//! any order or in parallel; [`AblationPlan::finish`] orders the results.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::explain::{group_contributions, tree_shap, GroupContribution, ShapExplanation};
use crate::frame::HourlyFrame;
use crate::matrix::{
    assemble_matrix_with, resolve_levels, AssembleOptions, ColumnInfo, FeatureMatrix,
};
use crate::metrics::{MetricPair, MPE_EPSILON};
use crate::models::{fit, split_indices, ModelKind, ModelParams, TrainedModel};
use crate::schema::{
    group_counts, select_features, select_raw_only, FeatureDescriptor, FeatureGroup, GroupSet,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSpec {
    /// 1-based position in the grid.
    pub index: usize,
    pub label: String,
    pub combo: GroupSet,
    pub include_submeter: bool,
    pub raw_only: bool,
}

/// Grid rows: raw-only, the seven non-empty group combinations ending with
/// all groups, and all groups without submeter features when available.
pub fn grid_rows(has_submeters: bool) -> Vec<RowSpec> {
    use FeatureGroup::*;
    let combos: [(&str, &[FeatureGroup]); 7] = [
        ("Domain", &[Domain]),
        ("Contextual", &[Contextual]),
        ("Behavioral", &[Behavioral]),
        ("Domain + Contextual", &[Domain, Contextual]),
        ("Contextual + Behavioral", &[Contextual, Behavioral]),
        ("Domain + Behavioral", &[Domain, Behavioral]),
        ("All groups", &[Domain, Contextual, Behavioral]),
    ];
    let mut rows = alloc::vec![RowSpec {
        index: 1,
        label: "Raw data only".to_string(),
        combo: GroupSet::of(&[Domain]),
        include_submeter: true,
        raw_only: true,
    }];
    for (label, groups) in combos {
        rows.push(RowSpec {
            index: rows.len() + 1,
            label: label.to_string(),
            combo: GroupSet::of(groups),
            include_submeter: true,
            raw_only: false,
        });
    }
    if has_submeters {
        rows.push(RowSpec {
            index: rows.len() + 1,
            label: "All groups without submeter data".to_string(),
            combo: GroupSet::ALL,
            include_submeter: false,
            raw_only: false,
        });
    }
    rows
}

/// Descriptors a grid row keeps.
pub fn row_descriptors(all: &[FeatureDescriptor], row: &RowSpec) -> Result<Vec<FeatureDescriptor>> {
    if row.raw_only {
        select_raw_only(all)
    } else {
        select_features(all, row.combo, row.include_submeter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellResult {
    Ok { metrics: MetricPair },
    Failed { reason: String },
}

impl CellResult {
    pub fn metrics(&self) -> Option<&MetricPair> {
        match self {
            CellResult::Ok { metrics } => Some(metrics),
            CellResult::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub spec: RowSpec,
    /// One cell per model, in [`ReportTable::models`] order.
    pub cells: Vec<CellResult>,
}

/// Feature counts and SHAP shares of one explained grid row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub variant: String,
    pub counts: GroupCounts,
    pub total: usize,
    pub shares: GroupContribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCounts {
    pub domain: usize,
    pub contextual: usize,
    pub behavioral: usize,
}

impl From<[usize; 3]> for GroupCounts {
    fn from(c: [usize; 3]) -> Self {
        GroupCounts {
            domain: c[0],
            contextual: c[1],
            behavioral: c[2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub dataset: String,
    pub models: Vec<ModelKind>,
    pub rows: Vec<AblationRow>,
    #[serde(default)]
    pub groups: Vec<GroupSummary>,
}

impl ReportTable {
    pub fn failed_cells(&self) -> Vec<(usize, ModelKind, &str)> {
        let mut out = Vec::new();
        for row in &self.rows {
            for (m, cell) in self.models.iter().zip(&row.cells) {
                if let CellResult::Failed { reason } = cell {
                    out.push((row.spec.index, *m, reason.as_str()));
                }
            }
        }
        out
    }

    pub fn cell(&self, row_index: usize, model: ModelKind) -> Option<&CellResult> {
        let m = self.models.iter().position(|k| *k == model)?;
        self.rows
            .iter()
            .find(|r| r.spec.index == row_index)?
            .cells
            .get(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AblationOptions {
    pub models: Vec<ModelKind>,
    pub params: ModelParams,
    pub seed: u64,
    pub epsilon: f64,
    pub assemble: AssembleOptions,
    /// Restrict the grid to the row with exactly this combination.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub only_combo: Option<GroupSet>,
    /// Skip SHAP group summaries.
    pub skip_explain: bool,
}

impl Default for AblationOptions {
    fn default() -> Self {
        AblationOptions {
            models: ModelKind::ALL.to_vec(),
            params: ModelParams::default(),
            seed: 0,
            epsilon: MPE_EPSILON,
            assemble: AssembleOptions::default(),
            only_combo: None,
            skip_explain: false,
        }
    }
}

/// Output of one grid cell.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub row: usize,
    pub model: usize,
    pub result: CellResult,
    /// Fitted gbt model of rows that get explained.
    pub fitted: Option<TrainedModel>,
}

/// Explanation of one grid row, as produced by [`AblationPlan::explain`].
#[derive(Debug, Clone, PartialEq)]
pub struct RowExplanation {
    pub row: usize,
    pub variant: String,
    pub columns: Vec<ColumnInfo>,
    pub counts: [usize; 3],
    pub explanation: ShapExplanation,
    pub shares: GroupContribution,
}

/// Everything needed to evaluate grid cells independently.
#[derive(Debug, Clone)]
pub struct AblationPlan {
    pub dataset: String,
    pub descriptors: Vec<FeatureDescriptor>,
    pub rows: Vec<RowSpec>,
    pub options: AblationOptions,
    /// Full-inventory matrix of all households.
    pub matrix: FeatureMatrix,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl AblationPlan {
    pub fn new(
        dataset: &str,
        frames: &[HourlyFrame],
        descriptors: &[FeatureDescriptor],
        has_submeters: bool,
        options: AblationOptions,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::Empty);
        }
        if options.models.is_empty() {
            return Err(Error::InvalidInput("no model kinds requested".into()));
        }
        let mut descriptors = descriptors.to_vec();
        resolve_levels(&mut descriptors, frames)?;
        let mut parts = Vec::with_capacity(frames.len());
        for f in frames {
            parts.push(assemble_matrix_with(f, &descriptors, &options.assemble)?);
        }
        let matrix = FeatureMatrix::concat(&parts)?;
        let (train_rows, test_rows) = split_indices(&matrix);
        let mut rows = grid_rows(has_submeters);
        if let Some(combo) = options.only_combo {
            rows.retain(|r| !r.raw_only && r.include_submeter && r.combo == combo);
            if rows.is_empty() {
                return Err(Error::InvalidInput(alloc::format!(
                    "no grid row for groups `{combo}`"
                )));
            }
        }
        Ok(AblationPlan {
            dataset: dataset.to_string(),
            descriptors,
            rows,
            options,
            matrix,
            train_rows,
            test_rows,
        })
    }

    /// `(row, model)` index pairs of every cell, in report order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        (0..self.rows.len())
            .flat_map(|r| (0..self.options.models.len()).map(move |m| (r, m)))
            .collect()
    }

    fn wants_explanation(&self, row: usize, model: usize) -> bool {
        let spec = &self.rows[row];
        !self.options.skip_explain
            && self.options.models[model] == ModelKind::Gbt
            && !spec.raw_only
            && spec.combo == GroupSet::ALL
    }

    /// Column indices of a grid row in the full matrix.
    pub fn row_columns(&self, row: usize) -> Result<Vec<usize>> {
        let selected = row_descriptors(&self.descriptors, &self.rows[row])?;
        let names: Vec<&str> = selected.iter().map(|d| d.name.as_str()).collect();
        Ok((0..self.matrix.n_cols())
            .filter(|&j| names.contains(&self.matrix.columns[j].descriptor.as_str()))
            .collect())
    }

    fn run_cell(&self, row: usize, model: usize) -> Result<(MetricPair, TrainedModel)> {
        let kind = self.options.models[model];
        // The baseline reads its lag column whatever the row selects.
        let cols = if kind == ModelKind::SeasonalNaive {
            (0..self.matrix.n_cols()).collect()
        } else {
            self.row_columns(row)?
        };
        let full = self.matrix.select_columns(&cols);
        let train = full.select_rows(&self.train_rows);
        let test = full.select_rows(&self.test_rows);
        if test.n_rows() == 0 {
            return Err(Error::TooFewRows { needed: 1, got: 0 });
        }
        let fitted = fit(kind, &train, &self.options.params, self.options.seed)?;
        let pred = fitted.predict(&test)?;
        Ok((
            MetricPair::compute(&test.target, &pred, self.options.epsilon)?,
            fitted,
        ))
    }

    pub fn evaluate(&self, row: usize, model: usize) -> CellOutcome {
        match self.run_cell(row, model) {
            Ok((metrics, fitted)) => CellOutcome {
                row,
                model,
                result: CellResult::Ok { metrics },
                fitted: self.wants_explanation(row, model).then_some(fitted),
            },
            Err(e) => CellOutcome {
                row,
                model,
                result: CellResult::Failed {
                    reason: e.to_string(),
                },
                fitted: None,
            },
        }
    }

    /// Test-split matrix of a grid row, the input to its explanation.
    pub fn test_matrix(&self, row: usize) -> Result<FeatureMatrix> {
        Ok(self
            .matrix
            .select_columns(&self.row_columns(row)?)
            .select_rows(&self.test_rows))
    }

    /// Summarise an explanation of grid row `row` computed on [`Self::test_matrix`].
    pub fn summarize(&self, row: usize, explanation: ShapExplanation) -> Result<RowExplanation> {
        let selected = row_descriptors(&self.descriptors, &self.rows[row])?;
        let columns: Vec<ColumnInfo> = self
            .row_columns(row)?
            .iter()
            .map(|&j| self.matrix.columns[j].clone())
            .collect();
        let shares = group_contributions(&explanation, &columns)?;
        let variant = if self.rows[row].include_submeter {
            "all"
        } else {
            "no_submeter"
        };
        Ok(RowExplanation {
            row,
            variant: variant.to_string(),
            columns,
            counts: group_counts(&selected),
            explanation,
            shares,
        })
    }

    /// Explain an evaluated gbt cell on the test split.
    pub fn explain(&self, outcome: &CellOutcome) -> Option<Result<RowExplanation>> {
        let model = outcome.fitted.as_ref()?;
        Some(
            self.test_matrix(outcome.row)
                .and_then(|m| tree_shap(model, &m))
                .and_then(|e| self.summarize(outcome.row, e)),
        )
    }

    /// Assemble the report from cell outcomes (any order) and explanations.
    pub fn finish(
        &self,
        mut outcomes: Vec<CellOutcome>,
        explanations: &[RowExplanation],
    ) -> ReportTable {
        outcomes.sort_by_key(|o| (o.row, o.model));
        let mut rows: Vec<AblationRow> = self
            .rows
            .iter()
            .map(|spec| AblationRow {
                spec: spec.clone(),
                cells: Vec::new(),
            })
            .collect();
        for o in outcomes {
            rows[o.row].cells.push(o.result);
        }
        let mut explanations: Vec<&RowExplanation> = explanations.iter().collect();
        explanations.sort_by_key(|e| e.row);
        ReportTable {
            dataset: self.dataset.clone(),
            models: self.options.models.clone(),
            rows,
            groups: explanations
                .iter()
                .map(|e| GroupSummary {
                    variant: e.variant.clone(),
                    counts: e.counts.into(),
                    total: e.counts.iter().sum(),
                    shares: e.shares,
                })
                .collect(),
        }
    }
}

/// Sequential grid run. Returns the report and the explanations behind its
/// group summaries.
pub fn run_ablation(
    dataset: &str,
    frames: &[HourlyFrame],
    descriptors: &[FeatureDescriptor],
    has_submeters: bool,
    options: AblationOptions,
) -> Result<(ReportTable, Vec<RowExplanation>)> {
    let plan = AblationPlan::new(dataset, frames, descriptors, has_submeters, options)?;
    let outcomes: Vec<CellOutcome> = plan
        .cells()
        .into_iter()
        .map(|(r, m)| plan.evaluate(r, m))
        .collect();
    let mut explanations = Vec::new();
    let mut failures = Vec::new();
    for o in &outcomes {
        match plan.explain(o) {
            Some(Ok(e)) => explanations.push(e),
            Some(Err(e)) => failures.push(e),
            None => {}
        }
    }
    if let Some(e) = failures.into_iter().next() {
        return Err(e);
    }
    let table = plan.finish(outcomes, &explanations);
    Ok((table, explanations))
}
