//! Markdown rendering of ablation reports.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::ablation::{CellResult, ReportTable};
use crate::schema::FeatureGroup;

fn group_mark(table_row: &crate::ablation::AblationRow, g: FeatureGroup) -> &'static str {
    let spec = &table_row.spec;
    if !spec.combo.contains(g) {
        ""
    } else if spec.raw_only {
        "✓*"
    } else if !spec.include_submeter && g == FeatureGroup::Domain {
        "✓†"
    } else {
        "✓"
    }
}

/// Lowest MPE per model column, ignoring failed cells.
fn best_mpe(table: &ReportTable) -> Vec<Option<f64>> {
    (0..table.models.len())
        .map(|m| {
            table
                .rows
                .iter()
                .filter_map(|r| r.cells.get(m).and_then(CellResult::metrics).map(|x| x.mpe))
                .fold(None, |best: Option<f64>, v| {
                    Some(best.map_or(v, |b| b.min(v)))
                })
        })
        .collect()
}

/// Markdown table with `2 * models + 4` columns: row number, one mark per
/// feature group, then MSE and MPE per model. The best MPE of each model is
/// set in bold.
pub fn render_markdown(table: &ReportTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Feature-group ablation: {}\n", table.dataset);
    out.push_str("| # | Domain | Contextual | Behavioral |");
    for m in &table.models {
        let _ = write!(out, " {m} MSE [kWh²] | {m} MPE [%] |");
    }
    out.push('\n');
    out.push_str("|---|:---:|:---:|:---:|");
    for _ in &table.models {
        out.push_str("---:|---:|");
    }
    out.push('\n');
    let best = best_mpe(table);
    for row in &table.rows {
        let _ = write!(out, "| {} |", row.spec.index);
        for g in FeatureGroup::ALL {
            let _ = write!(out, " {} |", group_mark(row, g));
        }
        for (m, cell) in row.cells.iter().enumerate() {
            match cell {
                CellResult::Ok { metrics } => {
                    let mpe = if best[m] == Some(metrics.mpe) {
                        alloc::format!("**{:.3}**", metrics.mpe)
                    } else {
                        alloc::format!("{:.3}", metrics.mpe)
                    };
                    let _ = write!(out, " {:.3} | {} |", metrics.mse, mpe);
                }
                CellResult::Failed { .. } => out.push_str(" failed | failed |"),
            }
        }
        out.push('\n');
    }
    if table.rows.is_empty() {
        return out;
    }
    out.push_str(
        "\n* Raw data only: measured channels lagged by one hour, no engineered features.\n",
    );
    if table.rows.iter().any(|r| !r.spec.include_submeter) {
        out.push_str("† All groups without submeter-derived features.\n");
    }
    out.push_str("MSE is in kWh² (squared error of hourly kWh).\n");
    if table
        .models
        .contains(&crate::models::ModelKind::SeasonalNaive)
    {
        out.push_str(
            "seasonal_naive repeats the consumption of the same hour one day earlier and ignores the row's \
             feature selection; it stands in for sequence models.\n",
        );
    }
    let failed = table.failed_cells();
    if !failed.is_empty() {
        out.push_str("\nFailed cells:\n");
        for (row, model, reason) in failed {
            let _ = writeln!(out, "- row {row}, {model}: {reason}");
        }
    }
    if !table.groups.is_empty() {
        out.push_str("\n## Cumulative relative SHAP contribution (gbt, test split)\n\n");
        out.push_str("| Variant | Domain | Contextual | Behavioral | Total | Domain [%] | Contextual [%] | Behavioral [%] |\n");
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|\n");
        for g in &table.groups {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {:.1} | {:.1} | {:.1} |",
                g.variant,
                g.counts.domain,
                g.counts.contextual,
                g.counts.behavioral,
                g.total,
                g.shares.domain,
                g.shares.contextual,
                g.shares.behavioral
            );
        }
    }
    out
}
