//! Run configuration.
//!
//! A run is described by one JSON document (schema in
//! `schema/run_config.schema.json`). Unknown keys are rejected, absent keys
//! take their defaults, and the resolved document is echoed into the output
//! directory next to the results it produced.

use std::path::{Path, PathBuf};

use gridfeat_core::ablation::AblationOptions;
use gridfeat_core::calendar::ScheduleTable;
use gridfeat_core::matrix::AssembleOptions;
use gridfeat_core::metrics::MPE_EPSILON;
use gridfeat_core::models::{ModelKind, ModelParams};
use gridfeat_core::schema::{DatasetId, FeatureDescriptor, FeatureSource, GroupSet};
use gridfeat_core::synth::SynthSpec;
use serde::{Deserialize, Serialize};

use crate::error::read_to_string;
use crate::loaders::LoadOptions;
use crate::{Error, Result};

/// The published JSON schema of [`RunConfig`].
pub const RUN_CONFIG_SCHEMA: &str = include_str!("../schema/run_config.schema.json");

/// File name of the resolved configuration in the output directory.
pub const RESOLVED_CONFIG_FILE: &str = "run_config.json";

/// Rolling window of the inventory's daily statistics.
pub const DEFAULT_ROLLING_WINDOW_HOURS: u32 = 24;

/// Synthetic household settings. The generator seed is the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub days: usize,
    pub base_load_kwh: f64,
    pub daily_profile: [f64; 24],
    pub weekly_weekend_factor: f64,
    pub meal_spike_kwh: f64,
    pub noise_std_kwh: f64,
    pub level_persistence: f64,
    pub level_std: f64,
    pub household_id: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let s = SynthSpec::default();
        SynthConfig {
            days: s.days,
            base_load_kwh: s.base_load_kwh,
            daily_profile: s.daily_profile,
            weekly_weekend_factor: s.weekly_weekend_factor,
            meal_spike_kwh: s.meal_spike_kwh,
            noise_std_kwh: s.noise_std_kwh,
            level_persistence: s.level_persistence,
            level_std: s.level_std,
            household_id: s.household_id,
        }
    }
}

impl SynthConfig {
    pub fn spec(&self, seed: u64) -> SynthSpec {
        SynthSpec {
            seed,
            days: self.days,
            base_load_kwh: self.base_load_kwh,
            daily_profile: self.daily_profile,
            weekly_weekend_factor: self.weekly_weekend_factor,
            meal_spike_kwh: self.meal_spike_kwh,
            noise_std_kwh: self.noise_std_kwh,
            level_persistence: self.level_persistence,
            level_std: self.level_std,
            household_id: self.household_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureOptions {
    /// Replaces the 24 h window of rolling statistics; names follow it.
    pub rolling_window_hours: u32,
    pub schedule: ScheduleTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holiday_region: Option<String>,
    /// Denominator floor of the MPE, kWh.
    pub epsilon: f64,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            rolling_window_hours: DEFAULT_ROLLING_WINDOW_HOURS,
            schedule: ScheduleTable::default(),
            holiday_region: None,
            epsilon: MPE_EPSILON,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dataset: DatasetId,
    /// Dataset root; falls back to `$GRIDFEAT_DATA/<dataset>` on the command line.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
    /// Households to keep; empty keeps all.
    pub households: Vec<String>,
    pub synthetic: SynthConfig,
    pub load: LoadOptions,
    pub features: FeatureOptions,
    pub models: Vec<ModelKind>,
    pub params: ModelParams,
    pub seed: u64,
    /// Restricts ablation to this one combination; also the feature
    /// selection of `featurize`, `train` and `explain`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<GroupSet>,
    /// Drop submeter-derived features from `featurize`, `train` and `explain`.
    pub exclude_submeter: bool,
    /// SHAP group summaries in ablation reports.
    pub explain: bool,
    /// Parallel grid cells; absent uses every core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: DatasetId::Synthetic,
            root: None,
            households: Vec::new(),
            synthetic: SynthConfig::default(),
            load: LoadOptions::default(),
            features: FeatureOptions::default(),
            models: ModelKind::ALL.to_vec(),
            params: ModelParams::default(),
            seed: 7,
            groups: None,
            exclude_submeter: false,
            explain: true,
            jobs: None,
            output: PathBuf::from("gridfeat-out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?).map_err(|e| Error::json(path, e))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.features.rolling_window_hours;
        if !(2..=168).contains(&w) {
            return Err(Error::Config(format!(
                "rolling_window_hours must be within 2..=168, got {w}"
            )));
        }
        if !(self.features.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no models requested".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if self.groups.is_some_and(|g| g.is_empty()) {
            return Err(Error::Config("empty group selection".into()));
        }
        self.features.schedule.validate()?;
        self.params.gbt.validate()?;
        self.params.mlp.validate()?;
        if self.dataset == DatasetId::Synthetic {
            self.synthetic.spec(self.seed).validate()?;
        }
        Ok(())
    }

    /// Apply `key=value` pairs separated by spaces or commas, as in
    /// `"days=30 seed=7"`. `seed` sets the run seed; other keys are fields
    /// of [`SynthConfig`]. Selects the synthetic dataset.
    pub fn apply_synthetic(&mut self, pairs: &str) -> Result<()> {
        let mut fields =
            serde_json::to_value(&self.synthetic).expect("synthetic settings serialize");
        for pair in pairs.split([' ', ',']).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                Error::Config(format!("synthetic setting `{pair}` is not key=value"))
            })?;
            if k == "seed" {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad seed `{v}`")))?;
                continue;
            }
            let value = serde_json::from_str(v)
                .unwrap_or_else(|_| serde_json::Value::String(v.to_string()));
            fields[k] = value;
        }
        self.synthetic =
            serde_json::from_value(fields).map_err(|e| Error::Config(format!("synthetic: {e}")))?;
        self.dataset = DatasetId::Synthetic;
        Ok(())
    }

    pub fn assemble_options(&self) -> AssembleOptions {
        AssembleOptions {
            schedule: self.features.schedule,
            holiday_region: self.features.holiday_region.clone(),
        }
    }

    pub fn ablation_options(&self) -> AblationOptions {
        AblationOptions {
            models: self.models.clone(),
            params: self.params.clone(),
            seed: self.seed,
            epsilon: self.features.epsilon,
            assemble: self.assemble_options(),
            only_combo: self.groups,
            skip_explain: !self.explain,
        }
    }
}

/// Move every 24 h rolling statistic to a `window`-hour window, renaming
/// `..._24` columns to `..._<window>`.
pub fn with_rolling_window(
    descriptors: &[FeatureDescriptor],
    window: u32,
) -> Vec<FeatureDescriptor> {
    let suffix = format!("_{DEFAULT_ROLLING_WINDOW_HOURS}");
    descriptors
        .iter()
        .cloned()
        .map(|mut d| {
            if let FeatureSource::RollingMean { window: w, .. }
            | FeatureSource::RollingStd { window: w, .. } = &mut d.source
            {
                if *w == DEFAULT_ROLLING_WINDOW_HOURS && window != DEFAULT_ROLLING_WINDOW_HOURS {
                    *w = window;
                    if let Some(stem) = d.name.strip_suffix(&suffix) {
                        d.name = format!("{stem}_{window}");
                    }
                }
            }
            d
        })
        .collect()
}
