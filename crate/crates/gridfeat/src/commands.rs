//! The pipeline stages behind each subcommand.
//!
//! Every stage takes a resolved [`RunConfig`], writes its artefacts under
//! `config.output` together with the resolved configuration, and returns
//! the lines it wants printed.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gridfeat_core::ablation::{AblationPlan, GroupSummary};
use gridfeat_core::explain::{group_contributions, tree_shap};
use gridfeat_core::frame::HourlyFrame;
use gridfeat_core::matrix::{assemble_matrix_with, resolve_levels, FeatureMatrix};
use gridfeat_core::metrics::MetricPair;
use gridfeat_core::models::{fit, split_train_test, ModelKind};
use gridfeat_core::report::render_markdown;
use gridfeat_core::schema::{
    dataset_descriptor, group_counts, inventory, select_features, validate_descriptor_with,
    DatasetDescriptor, DatasetId, FeatureDescriptor, GroupSet, Taxonomy,
};
use gridfeat_core::synth::synth_household;
use serde::{Deserialize, Serialize};

use crate::cache::{read_cache, read_manifest, write_cache, Manifest};
use crate::config::{with_rolling_window, RunConfig, RESOLVED_CONFIG_FILE, RUN_CONFIG_SCHEMA};
use crate::error::{read_json, write, write_json};
use crate::export::{
    explanation_csv, read_descriptors, read_report_csv, read_taxonomy, render_report_csv,
    taxonomy_problems, write_descriptors, write_matrix, write_model, write_taxonomy, GroupReport,
};
use crate::loaders::load_dataset;
use crate::runner::run_grid;
use crate::{Error, Result};

/// Frames of one run with the descriptor of their dataset.
#[derive(Debug, Clone)]
pub struct Sourced {
    pub descriptor: DatasetDescriptor,
    pub frames: Vec<HourlyFrame>,
    /// Whether the frames came from an existing cache.
    pub from_cache: bool,
}

pub fn cache_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output.join("cache").join(cfg.dataset.as_str())
}

pub fn output_file(cfg: &RunConfig, suffix: &str) -> PathBuf {
    cfg.output.join(format!("{}_{suffix}", cfg.dataset))
}

fn echo_config(cfg: &RunConfig) -> Result<()> {
    write(&cfg.output.join(RESOLVED_CONFIG_FILE), cfg.to_json())
}

fn synthetic(cfg: &RunConfig) -> Result<Sourced> {
    let (frame, _) = synth_household(&cfg.synthetic.spec(cfg.seed))?;
    let mut descriptor = dataset_descriptor(DatasetId::Synthetic);
    descriptor.household_ids = vec![frame.household_id.clone()];
    Ok(Sourced {
        descriptor,
        frames: vec![frame],
        from_cache: false,
    })
}

fn root(cfg: &RunConfig) -> Result<&Path> {
    cfg.root.as_deref().ok_or_else(|| {
        Error::Config(format!(
            "no data root for `{}`; pass --root or set GRIDFEAT_DATA",
            cfg.dataset
        ))
    })
}

/// A cache is reused when it was built from the same root with the same
/// load options.
fn usable_cache(cfg: &RunConfig) -> Option<Manifest> {
    let m = read_manifest(&cache_dir(cfg)).ok()?;
    (m.dataset.id == cfg.dataset
        && m.source.as_deref() == cfg.root.as_deref()
        && m.load == cfg.load)
        .then_some(m)
}

fn keep_households(cfg: &RunConfig, mut s: Sourced) -> Result<Sourced> {
    if cfg.households.is_empty() {
        return Ok(s);
    }
    let have: BTreeSet<&str> = s.frames.iter().map(|f| f.household_id.as_str()).collect();
    let unknown: Vec<&str> = cfg
        .households
        .iter()
        .map(String::as_str)
        .filter(|h| !have.contains(h))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!(
            "unknown households: {}",
            unknown.join(", ")
        )));
    }
    s.frames
        .retain(|f| cfg.households.contains(&f.household_id));
    s.descriptor.household_ids = s.frames.iter().map(|f| f.household_id.clone()).collect();
    Ok(s)
}

/// Frames of the configured dataset: generated, from a matching cache, or
/// loaded from the raw files.
pub fn source(cfg: &RunConfig) -> Result<Sourced> {
    let all = if cfg.dataset == DatasetId::Synthetic {
        synthetic(cfg)?
    } else if usable_cache(cfg).is_some() {
        let (manifest, frames) = read_cache(&cache_dir(cfg))?;
        Sourced {
            descriptor: manifest.dataset,
            frames,
            from_cache: true,
        }
    } else {
        let d = load_dataset(cfg.dataset, root(cfg)?, &cfg.load)?;
        Sourced {
            descriptor: d.descriptor,
            frames: d.frames,
            from_cache: false,
        }
    };
    keep_households(cfg, all)
}

/// The dataset inventory with the configured rolling window.
pub fn all_descriptors(cfg: &RunConfig) -> Vec<FeatureDescriptor> {
    with_rolling_window(&inventory(cfg.dataset), cfg.features.rolling_window_hours)
}

/// The feature selection of `featurize`, `train` and `explain`.
pub fn selected_descriptors(
    cfg: &RunConfig,
    has_submeters: bool,
) -> Result<Vec<FeatureDescriptor>> {
    let include_submeter = has_submeters && !cfg.exclude_submeter;
    Ok(select_features(
        &all_descriptors(cfg),
        cfg.groups.unwrap_or(GroupSet::ALL),
        include_submeter,
    )?)
}

/// One matrix over every household, built from `descriptors` with levels
/// resolved over all frames.
pub fn build_matrix(
    cfg: &RunConfig,
    frames: &[HourlyFrame],
    descriptors: &mut [FeatureDescriptor],
) -> Result<FeatureMatrix> {
    resolve_levels(descriptors, frames)?;
    let opts = cfg.assemble_options();
    let parts = frames
        .iter()
        .map(|f| assemble_matrix_with(f, descriptors, &opts))
        .collect::<gridfeat_core::Result<Vec<_>>>()?;
    Ok(FeatureMatrix::concat(&parts)?)
}

pub fn ingest(cfg: &RunConfig) -> Result<Vec<String>> {
    echo_config(cfg)?;
    let dir = cache_dir(cfg);
    let s = if cfg.dataset == DatasetId::Synthetic {
        synthetic(cfg)?
    } else {
        let d = load_dataset(cfg.dataset, root(cfg)?, &cfg.load)?;
        Sourced {
            descriptor: d.descriptor,
            frames: d.frames,
            from_cache: false,
        }
    };
    let s = keep_households(cfg, s)?;
    let source = if cfg.dataset == DatasetId::Synthetic {
        None
    } else {
        cfg.root.clone()
    };
    let manifest = Manifest {
        dataset: s.descriptor.clone(),
        source,
        load: cfg.load.clone(),
        households: s.descriptor.household_ids.clone(),
    };
    write_cache(&dir, &manifest, &s.frames)?;
    let hours: usize = s.frames.iter().map(HourlyFrame::len).sum();
    Ok(vec![format!(
        "{} households, {hours} hours cached in {}",
        s.frames.len(),
        dir.display()
    )])
}

pub fn featurize(cfg: &RunConfig) -> Result<Vec<String>> {
    echo_config(cfg)?;
    let s = source(cfg)?;
    let mut descs = selected_descriptors(cfg, s.descriptor.has_submeters)?;
    let m = build_matrix(cfg, &s.frames, &mut descs)?;
    let csv = output_file(cfg, "features.csv");
    let json = output_file(cfg, "features.json");
    write_matrix(&csv, &json, &m, &descs)?;
    Ok(vec![format!(
        "{} rows x {} features written to {}",
        m.n_rows(),
        m.n_cols(),
        csv.display()
    )])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMetrics {
    pub model: ModelKind,
    pub train_rows: usize,
    #[serde(flatten)]
    pub metrics: MetricPair,
}

pub fn train(cfg: &RunConfig) -> Result<Vec<String>> {
    echo_config(cfg)?;
    let s = source(cfg)?;
    let mut descs = selected_descriptors(cfg, s.descriptor.has_submeters)?;
    let m = build_matrix(cfg, &s.frames, &mut descs)?;
    let (train, test) = split_train_test(&m);
    let mut lines = Vec::new();
    let mut all = Vec::new();
    for &kind in &cfg.models {
        let model = fit(kind, &train, &cfg.params, cfg.seed)?;
        let metrics =
            MetricPair::compute(&test.target, &model.predict(&test)?, cfg.features.epsilon)?;
        let path = output_file(cfg, &format!("{kind}.model.json"));
        write_model(&path, &model, &cfg.params, cfg.seed)?;
        lines.push(format!(
            "{kind}: MSE {:.6} kWh^2, MPE {:.2}% on {} test rows",
            metrics.mse, metrics.mpe, metrics.n_samples
        ));
        all.push(TrainMetrics {
            model: kind,
            train_rows: train.n_rows(),
            metrics,
        });
    }
    write_json(&output_file(cfg, "metrics.json"), &all)?;
    Ok(lines)
}

/// Ablation artefacts are written before failed cells are reported.
pub fn ablate(cfg: &RunConfig) -> Result<Vec<String>> {
    echo_config(cfg)?;
    let s = source(cfg)?;
    let plan = AblationPlan::new(
        cfg.dataset.as_str(),
        &s.frames,
        &all_descriptors(cfg),
        s.descriptor.has_submeters,
        cfg.ablation_options(),
    )?;
    let (table, _) = run_grid(&plan, cfg.jobs)?;
    let md = render_markdown(&table);
    write(&output_file(cfg, "ablation.md"), &md)?;
    write(&output_file(cfg, "ablation.csv"), render_report_csv(&table))?;
    write_json(&output_file(cfg, "ablation_groups.json"), &table.groups)?;
    let failed: Vec<String> = table
        .failed_cells()
        .into_iter()
        .map(|(row, model, why)| format!("row {row} {model}: {why}"))
        .collect();
    if !failed.is_empty() {
        return Err(Error::FailedCells(failed));
    }
    Ok(vec![md])
}

pub fn explain(cfg: &RunConfig, kind: ModelKind) -> Result<Vec<String>> {
    if kind != ModelKind::Gbt {
        return Err(gridfeat_core::Error::Unsupported(format!(
            "exact explanations need a tree model, not `{kind}`"
        ))
        .into());
    }
    echo_config(cfg)?;
    let s = source(cfg)?;
    let include_submeter = s.descriptor.has_submeters && !cfg.exclude_submeter;
    let mut descs = selected_descriptors(cfg, s.descriptor.has_submeters)?;
    let m = build_matrix(cfg, &s.frames, &mut descs)?;
    let (train, test) = split_train_test(&m);
    let model = fit(kind, &train, &cfg.params, cfg.seed)?;
    let expl = tree_shap(&model, &test)?;
    let shares = group_contributions(&expl, &test.columns)?;
    let counts = group_counts(&descs);
    let report = GroupReport {
        dataset: cfg.dataset.to_string(),
        model: kind,
        rows_explained: expl.n_samples(),
        base_value_kwh: expl.base_value,
        local_accuracy_max_error: expl.local_accuracy_error(),
        summary: GroupSummary {
            variant: if include_submeter {
                "all"
            } else {
                "no_submeter"
            }
            .into(),
            counts: counts.into(),
            total: counts.iter().sum(),
            shares,
        },
    };
    write(
        &output_file(cfg, "explain.csv"),
        explanation_csv(&expl, &test.columns),
    )?;
    write_json(&output_file(cfg, "explain_groups.json"), &report)?;
    Ok(vec![
        format!("Domain share: {:.2}%", shares.domain),
        format!("Contextual share: {:.2}%", shares.contextual),
        format!("Behavioral share: {:.2}%", shares.behavioral),
        format!(
            "{} test rows explained, local accuracy within {:.3e} kWh",
            expl.n_samples(),
            report.local_accuracy_max_error
        ),
    ])
}

/// Re-render the markdown report from the ablation CSV and group summary.
pub fn report(cfg: &RunConfig) -> Result<Vec<String>> {
    echo_config(cfg)?;
    let mut table = read_report_csv(&output_file(cfg, "ablation.csv"), cfg.dataset.as_str())?;
    let groups = output_file(cfg, "ablation_groups.json");
    if groups.exists() {
        table.groups = read_json(&groups)?;
    }
    let md = render_markdown(&table);
    write(&output_file(cfg, "ablation.md"), &md)?;
    Ok(vec![md])
}

/// Files checked by `validate-schema`; `None` means the embedded taxonomy
/// and every built-in inventory.
#[derive(Debug, Clone, Default)]
pub struct SchemaCheck {
    pub taxonomy: Option<PathBuf>,
    pub descriptors: Vec<PathBuf>,
    pub config: Option<PathBuf>,
    pub dump: Option<PathBuf>,
}

fn descriptor_problems(tax: &Taxonomy, set: &str, descs: &[FeatureDescriptor]) -> Vec<String> {
    let mut out = Vec::new();
    let mut names = BTreeSet::new();
    for d in descs {
        if !names.insert(d.name.as_str()) {
            out.push(format!("{set}: duplicate descriptor `{}`", d.name));
        }
        for v in validate_descriptor_with(tax, d) {
            out.push(format!("{set}: `{}`: {v}", d.name));
        }
    }
    out
}

pub fn validate_schema(check: &SchemaCheck) -> Result<Vec<String>> {
    let tax = match &check.taxonomy {
        Some(p) => read_taxonomy(p)?,
        None => Taxonomy::embedded(),
    };
    let mut problems: Vec<String> = taxonomy_problems(&tax)
        .into_iter()
        .map(|p| format!("taxonomy: {p}"))
        .collect();
    let mut lines = Vec::new();
    let sets: Vec<(String, Vec<FeatureDescriptor>)> = if check.descriptors.is_empty() {
        DatasetId::ALL
            .iter()
            .map(|&id| (id.to_string(), inventory(id)))
            .collect()
    } else {
        check
            .descriptors
            .iter()
            .map(|p| Ok((p.display().to_string(), read_descriptors(p)?)))
            .collect::<Result<_>>()?
    };
    for (name, descs) in &sets {
        problems.extend(descriptor_problems(&tax, name, descs));
        lines.push(format!("{name}: {} descriptors", descs.len()));
    }
    if let Some(p) = &check.config {
        let cfg = RunConfig::load(p)?;
        if let Err(e) = cfg.validate() {
            problems.push(format!("{}: {e}", p.display()));
        }
        lines.push(format!("{}: config parsed", p.display()));
    }
    if !problems.is_empty() {
        return Err(Error::Invalid(problems));
    }
    if let Some(dir) = &check.dump {
        write_taxonomy(&dir.join("taxonomy.json"), &tax)?;
        for id in DatasetId::ALL {
            write_descriptors(&dir.join(format!("descriptors_{id}.json")), &inventory(id))?;
        }
        write(&dir.join("run_config.schema.json"), RUN_CONFIG_SCHEMA)?;
        write(
            &dir.join(RESOLVED_CONFIG_FILE),
            RunConfig::default().to_json(),
        )?;
        lines.push(format!("schema files written to {}", dir.display()));
    }
    lines.push("ok".into());
    Ok(lines)
}
