use gridfeat::export::render_report_csv;
use gridfeat::runner::run_grid;
use gridfeat_core::ablation::{run_ablation, AblationOptions, AblationPlan};
use gridfeat_core::schema::{inventory, DatasetId};
use gridfeat_core::synth::{synth_household, SynthSpec};

#[test]
fn parallel_grid_matches_the_sequential_run() {
    let frames: Vec<_> = [3u64, 4]
        .iter()
        .map(|&seed| {
            let (mut f, _) = synth_household(&SynthSpec {
                seed,
                days: 30,
                household_id: format!("h{seed}"),
                ..SynthSpec::default()
            })
            .unwrap();
            f.household_id = format!("h{seed}");
            f
        })
        .collect();
    let descs = inventory(DatasetId::Synthetic);
    let options = AblationOptions {
        seed: 11,
        ..AblationOptions::default()
    };
    let (seq, seq_expl) =
        run_ablation("synthetic", &frames, &descs, true, options.clone()).unwrap();
    let plan = AblationPlan::new("synthetic", &frames, &descs, true, options).unwrap();
    for jobs in [Some(1), Some(3), None] {
        let (par, par_expl) = run_grid(&plan, jobs).unwrap();
        assert_eq!(par, seq, "jobs {jobs:?}");
        assert_eq!(par_expl, seq_expl);
        assert_eq!(render_report_csv(&par), render_report_csv(&seq));
    }
    assert!(seq.failed_cells().is_empty());
    assert_eq!(seq.rows.len(), 9);
    assert_eq!(seq.groups.len(), 2);
}
