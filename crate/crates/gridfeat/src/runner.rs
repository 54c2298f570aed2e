//! Parallel evaluation of an ablation grid.
//!
//! Cells are independent and each carries its own seed, so the parallel run
//! produces the same report as [`gridfeat_core::ablation::run_ablation`].

use gridfeat_core::ablation::{AblationPlan, CellOutcome, ReportTable, RowExplanation};
use rayon::prelude::*;

use crate::{Error, Result};

/// Evaluate every cell of `plan` on `jobs` threads (all cores when `None`),
/// then explain the gbt cells that ask for it.
pub fn run_grid(
    plan: &AblationPlan,
    jobs: Option<usize>,
) -> Result<(ReportTable, Vec<RowExplanation>)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        let outcomes: Vec<CellOutcome> = plan
            .cells()
            .into_par_iter()
            .map(|(r, m)| plan.evaluate(r, m))
            .collect();
        let explained: Vec<Option<gridfeat_core::Result<RowExplanation>>> =
            outcomes.par_iter().map(|o| plan.explain(o)).collect();
        let mut explanations = Vec::new();
        for e in explained.into_iter().flatten() {
            explanations.push(e?);
        }
        let table = plan.finish(outcomes, &explanations);
        Ok((table, explanations))
    })
}
