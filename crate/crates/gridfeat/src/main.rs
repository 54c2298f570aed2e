use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use gridfeat::commands::{self, SchemaCheck};
use gridfeat::config::RunConfig;
use gridfeat_core::models::ModelKind;
use gridfeat_core::schema::{DatasetId, GroupSet};

/// Feature-group ablation for hourly household electricity forecasting.
#[derive(Debug, Parser)]
#[command(name = "gridfeat", version)]
struct Cli {
    /// Run configuration (JSON); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// hue, uci, refit or synthetic.
    #[arg(long, global = true)]
    dataset: Option<DatasetId>,
    /// Raw dataset directory. Defaults to $GRIDFEAT_DATA/<dataset>.
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    /// Synthetic household settings, e.g. "days=30 seed=7".
    #[arg(long, global = true)]
    synthetic: Option<String>,
    /// Feature groups, e.g. "domain,contextual".
    #[arg(long, global = true)]
    groups: Option<String>,
    /// Comma-separated model kinds.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<ModelKind>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the ablation grid; all cores by default.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Rolling-statistics window in hours.
    #[arg(long, global = true)]
    window: Option<u32>,
    /// MPE denominator floor, kWh.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    holiday_region: Option<String>,
    /// Comma-separated household ids to keep.
    #[arg(long, global = true, value_delimiter = ',')]
    households: Option<Vec<String>>,
    /// Leave submeter-derived features out.
    #[arg(long, global = true)]
    exclude_submeter: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load raw files (or generate the synthetic household) into the frame cache.
    Ingest,
    /// Write the feature matrix with its column sidecar.
    Featurize,
    /// Fit the requested models on the chronological train split.
    Train,
    /// Run the feature-group ablation grid.
    Ablate,
    /// Exact SHAP attributions of a tree model, summarised by group.
    Explain {
        #[arg(long, default_value = "gbt")]
        model: ModelKind,
    },
    /// Re-render the markdown report from the ablation CSV.
    Report,
    /// Check taxonomy, descriptor sets and the run configuration.
    ValidateSchema {
        #[arg(long)]
        taxonomy: Option<PathBuf>,
        #[arg(long)]
        descriptors: Vec<PathBuf>,
        /// Also write the taxonomy, inventories and config schema here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = cli.dataset {
        cfg.dataset = d;
    }
    if let Some(s) = &cli.synthetic {
        cfg.apply_synthetic(s)?;
    }
    if let Some(r) = &cli.root {
        cfg.root = Some(r.clone());
    }
    if let Some(g) = &cli.groups {
        cfg.groups = Some(GroupSet::parse(g).with_context(|| format!("--groups {g}"))?);
    }
    if let Some(m) = &cli.models {
        cfg.models = m.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    if let Some(w) = cli.window {
        cfg.features.rolling_window_hours = w;
    }
    if let Some(e) = cli.epsilon {
        cfg.features.epsilon = e;
    }
    if let Some(r) = &cli.holiday_region {
        cfg.features.holiday_region = Some(r.clone());
    }
    if let Some(h) = &cli.households {
        cfg.households = h.clone();
    }
    if cli.exclude_submeter {
        cfg.exclude_submeter = true;
    }
    if cfg.root.is_none() && cfg.dataset != DatasetId::Synthetic {
        if let Some(base) = std::env::var_os("GRIDFEAT_DATA") {
            cfg.root = Some(PathBuf::from(base).join(cfg.dataset.as_str()));
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<Vec<String>> {
    if let Command::ValidateSchema {
        taxonomy,
        descriptors,
        dump,
    } = &cli.command
    {
        let check = SchemaCheck {
            taxonomy: taxonomy.clone(),
            descriptors: descriptors.clone(),
            config: cli.config.clone(),
            dump: dump.clone(),
        };
        return Ok(commands::validate_schema(&check)?);
    }
    let cfg = resolve(&cli)?;
    let lines = match cli.command {
        Command::Ingest => commands::ingest(&cfg)?,
        Command::Featurize => commands::featurize(&cfg)?,
        Command::Train => commands::train(&cfg)?,
        Command::Ablate => commands::ablate(&cfg)?,
        Command::Explain { model } => commands::explain(&cfg, model)?,
        Command::Report => commands::report(&cfg)?,
        Command::ValidateSchema { .. } => unreachable!(),
    };
    Ok(lines)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
