//! File formats of pipeline artefacts.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! CSV here parses back to the exact values it was rendered from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::DateTime;
use gridfeat_core::ablation::{AblationRow, CellResult, GroupSummary, ReportTable, RowSpec};
use gridfeat_core::explain::{GroupContribution, ShapExplanation};
use gridfeat_core::matrix::{ColumnInfo, FeatureMatrix};
use gridfeat_core::metrics::MetricPair;
use gridfeat_core::models::{ModelKind, ModelParams, TrainedModel};
use gridfeat_core::schema::{FeatureDescriptor, FeatureGroup, GroupSet, Taxonomy, TaxonomyNode};
use serde::{Deserialize, Serialize};

use crate::error::{read_json, write, write_json};
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "gridfeat-model/1";

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn hour_iso(hour: i64) -> String {
    DateTime::from_timestamp(hour * 3600, 0).map_or_else(
        || hour.to_string(),
        |t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
    )
}

/// Taxonomy and descriptor sets as written by `validate-schema --dump`.
pub fn write_taxonomy(path: &Path, taxonomy: &Taxonomy) -> Result<()> {
    write_json(path, taxonomy)
}

pub fn write_descriptors(path: &Path, descriptors: &[FeatureDescriptor]) -> Result<()> {
    write_json(path, &descriptors)
}

pub fn read_taxonomy(path: &Path) -> Result<Taxonomy> {
    read_json(path)
}

pub fn read_descriptors(path: &Path) -> Result<Vec<FeatureDescriptor>> {
    read_json(path)
}

/// Structural problems of a taxonomy read from disk: root arity, group
/// names, path consistency and uniqueness.
pub fn taxonomy_problems(t: &Taxonomy) -> Vec<String> {
    let mut out = Vec::new();
    let root = t.root();
    if !root.path.is_empty() {
        out.push(format!("root path must be empty, got `{}`", root.path));
    }
    let groups: Vec<&str> = root.children.iter().map(|c| c.path.as_str()).collect();
    let expected: Vec<&str> = FeatureGroup::ALL.iter().map(|g| g.as_str()).collect();
    if groups != expected {
        out.push(format!(
            "root children must be {expected:?}, got {groups:?}"
        ));
    }
    fn walk(
        n: &TaxonomyNode,
        seen: &mut std::collections::BTreeSet<String>,
        out: &mut Vec<String>,
    ) {
        if !seen.insert(n.path.clone()) {
            out.push(format!("duplicate path `{}`", n.path));
        }
        for c in &n.children {
            let slug = c.path.rsplit('/').next().unwrap_or("");
            let expect = if n.path.is_empty() {
                slug.to_string()
            } else {
                format!("{}/{slug}", n.path)
            };
            if c.path != expect || slug.is_empty() || c.path != c.path.to_ascii_lowercase() {
                out.push(format!(
                    "path `{}` is not a lowercase child of `{}`",
                    c.path, n.path
                ));
            }
            walk(c, seen, out);
        }
    }
    walk(root, &mut Default::default(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixColumnMeta {
    pub group: FeatureGroup,
    pub taxonomy_path: String,
    pub unit: String,
    pub descriptor: String,
    pub submeter: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    /// Feature columns in CSV order.
    pub order: Vec<String>,
    pub columns: BTreeMap<String, MatrixColumnMeta>,
    pub target: String,
    pub target_unit: String,
    pub rows: usize,
}

/// CSV with `household,hour_utc`, one column per feature and the target
/// (the consumption of the hour after `hour_utc`), plus a JSON sidecar
/// mapping each feature column to its group, taxonomy path and unit.
pub fn write_matrix(
    csv_path: &Path,
    json_path: &Path,
    m: &FeatureMatrix,
    descriptors: &[FeatureDescriptor],
) -> Result<()> {
    let mut out = String::from("household,hour_utc");
    for c in &m.columns {
        out.push(',');
        out.push_str(&field(&c.name));
    }
    out.push_str(",target_kwh\n");
    for i in 0..m.n_rows() {
        out.push_str(&field(&m.households[m.row_household[i]]));
        out.push(',');
        out.push_str(&hour_iso(m.row_hours[i]));
        for v in m.row(i) {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", m.target[i]);
    }
    write(csv_path, out)?;
    let mut columns = BTreeMap::new();
    for c in &m.columns {
        let d = descriptors
            .iter()
            .find(|d| d.name == c.descriptor)
            .ok_or_else(|| Error::Config(format!("column `{}` has no descriptor", c.name)))?;
        columns.insert(
            c.name.clone(),
            MatrixColumnMeta {
                group: c.group,
                taxonomy_path: d.taxonomy_path.clone(),
                unit: d.unit.clone(),
                descriptor: d.name.clone(),
                submeter: c.submeter,
            },
        );
    }
    let side = MatrixSidecar {
        order: m.columns.iter().map(|c| c.name.clone()).collect(),
        columns,
        target: "target_kwh".into(),
        target_unit: "kWh".into(),
        rows: m.n_rows(),
    };
    write_json(json_path, &side)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub seed: u64,
    pub params: ModelParams,
    pub model: TrainedModel,
}

pub fn write_model(
    path: &Path,
    model: &TrainedModel,
    params: &ModelParams,
    seed: u64,
) -> Result<()> {
    write_json(
        path,
        &ModelFile {
            format: MODEL_FORMAT.into(),
            seed,
            params: params.clone(),
            model: model.clone(),
        },
    )
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let f: ModelFile = read_json(path)?;
    if f.format != MODEL_FORMAT {
        return Err(Error::format(
            path,
            format!("unsupported format `{}`", f.format),
        ));
    }
    Ok(f)
}

/// Per-feature mean |phi| with the group of each column.
pub fn explanation_csv(expl: &ShapExplanation, columns: &[ColumnInfo]) -> String {
    let mut out = String::from("feature,descriptor,group,mean_abs_phi_kwh\n");
    for (c, v) in columns.iter().zip(expl.mean_abs()) {
        let _ = writeln!(
            out,
            "{},{},{},{v}",
            field(&c.name),
            field(&c.descriptor),
            c.group
        );
    }
    out
}

/// Group summary of one explanation: feature counts per group and shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub dataset: String,
    pub model: ModelKind,
    pub rows_explained: usize,
    pub base_value_kwh: f64,
    pub local_accuracy_max_error: f64,
    pub summary: GroupSummary,
}

/// Shares in percent summing to 100.
pub fn share_total(s: &GroupContribution) -> f64 {
    s.domain + s.contextual + s.behavioral
}

pub const REPORT_HEADER: &str =
    "row,label,domain,contextual,behavioral,include_submeter,raw_only,model,status,mse_kwh2,mpe_pct,n_samples,epsilon,reason";

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// One line per grid cell, in row then model order.
pub fn render_report_csv(table: &ReportTable) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for row in &table.rows {
        let s = &row.spec;
        for (model, cell) in table.models.iter().zip(&row.cells) {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{model},",
                s.index,
                field(&s.label),
                flag(s.combo.contains(FeatureGroup::Domain)),
                flag(s.combo.contains(FeatureGroup::Contextual)),
                flag(s.combo.contains(FeatureGroup::Behavioral)),
                flag(s.include_submeter),
                flag(s.raw_only),
            );
            match cell {
                CellResult::Ok { metrics } => {
                    let _ = writeln!(
                        out,
                        "ok,{},{},{},{},",
                        metrics.mse, metrics.mpe, metrics.n_samples, metrics.epsilon
                    );
                }
                CellResult::Failed { reason } => {
                    let _ = writeln!(out, "failed,,,,,{}", field(reason));
                }
            }
        }
    }
    out
}

/// Rebuild the grid of a report CSV. Group summaries are not part of the
/// CSV and come back empty.
pub fn parse_report_csv(dataset: &str, text: &str) -> std::result::Result<ReportTable, String> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != REPORT_HEADER {
        return Err(format!("unexpected header {headers:?}"));
    }
    let mut models: Vec<ModelKind> = Vec::new();
    let mut rows: Vec<AblationRow> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let at = |m: String| format!("line {}: {m}", k + 2);
        let bit = |i: usize| match &rec[i] {
            "1" => Ok(true),
            "0" => Ok(false),
            v => Err(at(format!("bad flag `{v}`"))),
        };
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|_| at(format!("bad number `{}`", &rec[i])))
        };
        let index: usize = rec[0].parse().map_err(|_| at("bad row".into()))?;
        let mut combo = GroupSet::EMPTY;
        for (i, g) in FeatureGroup::ALL.into_iter().enumerate() {
            if bit(2 + i)? {
                combo = combo.with(g);
            }
        }
        let spec = RowSpec {
            index,
            label: rec[1].to_string(),
            combo,
            include_submeter: bit(5)?,
            raw_only: bit(6)?,
        };
        let model: ModelKind = rec[7]
            .parse()
            .map_err(|e: gridfeat_core::Error| at(e.to_string()))?;
        let cell = match &rec[8] {
            "ok" => CellResult::Ok {
                metrics: MetricPair {
                    mse: num(9)?,
                    mpe: num(10)?,
                    n_samples: rec[11].parse().map_err(|_| at("bad n_samples".into()))?,
                    epsilon: num(12)?,
                },
            },
            "failed" => CellResult::Failed {
                reason: rec[13].to_string(),
            },
            s => return Err(at(format!("bad status `{s}`"))),
        };
        if rows.last().map(|r| r.spec.index) != Some(index) {
            rows.push(AblationRow {
                spec,
                cells: Vec::new(),
            });
        } else if rows.last().map(|r| &r.spec) != Some(&spec) {
            return Err(at(format!("row {index} changes its description")));
        }
        let first_row = rows.len() == 1;
        let row = rows.last_mut().expect("pushed above");
        if first_row {
            models.push(model);
        } else if models.get(row.cells.len()) != Some(&model) {
            return Err(at(format!("model `{model}` out of order")));
        }
        row.cells.push(cell);
    }
    if let Some(r) = rows.iter().find(|r| r.cells.len() != models.len()) {
        return Err(format!(
            "row {} has {} cells for {} models",
            r.spec.index,
            r.cells.len(),
            models.len()
        ));
    }
    Ok(ReportTable {
        dataset: dataset.to_string(),
        models,
        rows,
        groups: Vec::new(),
    })
}

pub fn read_report_csv(path: &Path, dataset: &str) -> Result<ReportTable> {
    parse_report_csv(dataset, &crate::error::read_to_string(path)?)
        .map_err(|m| Error::format(path, m))
}
