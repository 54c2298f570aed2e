//! Acceptance checks, one PASS/FAIL/SKIP line per criterion.
//!
//! Runs without the test harness so the lines always reach the output.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gridfeat::config::RunConfig;
use gridfeat::loaders::{load_dataset, LoadOptions};
use gridfeat::runner::run_grid;
use gridfeat_core::ablation::{AblationPlan, CellResult, ReportTable, RowExplanation};
use gridfeat_core::explain::{brute_force_shap, tree_shap, Baseline};
use gridfeat_core::frame::{Channel, HourlyFrame};
use gridfeat_core::matrix::{assemble_matrix, resolve_levels, ColumnInfo, FeatureMatrix};
use gridfeat_core::metrics::{mpe, mse};
use gridfeat_core::models::{fit_gbt, GbtParams, ModelKind, TrainedModel};
use gridfeat_core::schema::{inventory, DatasetId, FeatureGroup, Provenance};
use gridfeat_core::solar::solar_position;
use gridfeat_core::synth::{synth_household, SynthSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Clone, Copy, PartialEq)]
enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Board {
    failed: usize,
}

impl Board {
    fn report(&mut self, n: u32, what: &str, v: Verdict, detail: String) {
        let tag = match v {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                self.failed += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
        };
        println!("{tag} {n}. {what}: {detail}");
    }

    fn check(&mut self, n: u32, what: &str, ok: bool, detail: String) {
        self.report(
            n,
            what,
            if ok { Verdict::Pass } else { Verdict::Fail },
            detail,
        );
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

// Metrics.

fn mpe_by_hand(a: &[f64], f: &[f64], eps: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let mut den = a[i].abs();
        if f[i].abs() > den {
            den = f[i].abs();
        }
        if eps > den {
            den = eps;
        }
        total += (a[i] - f[i]).abs() / den;
    }
    100.0 * total / a.len() as f64
}

fn mse_by_hand(a: &[f64], f: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let d = a[i] - f[i];
        total += d * d;
    }
    total / a.len() as f64
}

fn rel_err(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

fn metrics(board: &mut Board) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..64);
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            match rng.gen_range(0..10) {
                0 => 0.0,
                1 => rng.gen_range(0.0..1e-6),
                _ => rng.gen_range(0.0..5.0),
            }
        };
        let a: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let f: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        worst = worst.max(rel_err(mpe(&a, &f, eps).unwrap(), mpe_by_hand(&a, &f, eps)));
        worst = worst.max(rel_err(mse(&a, &f).unwrap(), mse_by_hand(&a, &f)));
    }
    let a: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
    let self_zero = mpe(&a, &a, eps).unwrap() == 0.0;
    let zero_zero = mpe(&[0.0, 0.0], &[0.0, 0.0], eps).unwrap() == 0.0;
    let t = started.elapsed();
    board.check(
        1,
        "metric correctness",
        worst <= 1e-12 && self_zero && zero_zero && within(t, Duration::from_secs(1)),
        format!("max rel err {worst:.2e} over 1000 pairs, mpe(A,A)=0 {self_zero}, 0/0 guard {zero_zero}, {t:.2?}"),
    );
}

// SHAP.

fn column(name: String) -> ColumnInfo {
    ColumnInfo {
        descriptor: name.clone(),
        name,
        group: FeatureGroup::Domain,
        provenance: Provenance::Engineered,
        submeter: false,
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> FeatureMatrix {
    let data: Vec<f64> = (0..n * p)
        .map(|_| rng.gen_range(0..8) as f64 * 0.25)
        .collect();
    let target = (0..n)
        .map(|i| {
            let r = &data[i * p..(i + 1) * p];
            r.iter()
                .enumerate()
                .map(|(j, x)| {
                    if j % 3 == 0 {
                        x * x
                    } else {
                        (j as f64 - 1.5) * x
                    }
                })
                .sum::<f64>()
                + rng.gen_range(0.0..0.3)
        })
        .collect();
    FeatureMatrix {
        columns: (0..p).map(|j| column(format!("x{j}"))).collect(),
        data,
        target,
        row_hours: (0..n as i64).collect(),
        row_household: vec![0; n],
        households: vec!["h".into()],
    }
}

fn shap(board: &mut Board, ablation: &[RowExplanation]) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = rng.gen_range(1..=10);
        let n = rng.gen_range(30..200);
        let train = random_matrix(&mut rng, n, p);
        let params = GbtParams {
            n_rounds: rng.gen_range(1..=20),
            max_depth: rng.gen_range(1..=4),
            learning_rate: rng.gen_range(0.05..1.0),
            lambda_l2: rng.gen_range(0.0..2.0),
            min_child_weight: 1.0,
        };
        let model = TrainedModel::Gbt(fit_gbt(&train, &params).unwrap());
        let samples = random_matrix(&mut rng, 100, p);
        let fast = tree_shap(&model, &samples).unwrap();
        for i in 0..samples.n_rows() {
            let brute = brute_force_shap(&model, samples.row(i), Baseline::TreeCover).unwrap();
            for (a, b) in fast.row(i).iter().zip(&brute) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    let local = ablation
        .iter()
        .map(|e| e.explanation.local_accuracy_error())
        .fold(0.0, f64::max);
    let samples: usize = ablation.iter().map(|e| e.explanation.n_samples()).sum();
    let t = started.elapsed();
    board.check(
        2,
        "SHAP exactness",
        worst <= 1e-8 && local <= 1e-9 && !ablation.is_empty() && within(t, Duration::from_secs(120)),
        format!(
            "max |tree - brute| {worst:.2e} on 50 models x 100 samples; local accuracy {local:.2e} on {samples} ablation samples; {t:.2?}"
        ),
    );
}

// Leakage.

/// A synthetic household carrying the electrical channels of the UCI inventory.
fn uci_like(seed: u64, days: usize) -> HourlyFrame {
    let (mut f, _) = synth_household(&SynthSpec {
        seed,
        days,
        ..SynthSpec::default()
    })
    .unwrap();
    f.channels.clear();
    let n = f.len();
    let load = f.target.values.clone();
    let wave = |scale: f64, phase: f64| -> Vec<f64> {
        load.iter()
            .enumerate()
            .map(|(i, v)| scale * (v + 0.3 * ((i as f64 + phase) * 0.7).sin().abs()))
            .collect()
    };
    for (name, unit, values, tag) in [
        ("reactive_power", "kWh", wave(0.1, 0.0), None),
        (
            "voltage",
            "V",
            load.iter().map(|v| 240.0 - v).collect(),
            None,
        ),
        ("intensity", "A", wave(4.0, 1.0), None),
        ("submeter_1", "kWh", wave(0.2, 2.0), Some("kitchen")),
        ("submeter_2", "kWh", wave(0.1, 3.0), Some("laundry")),
        ("submeter_3", "kWh", wave(0.3, 4.0), Some("climate")),
    ] {
        let mut c = Channel::new(name, unit, values, vec![false; n]);
        if let Some(t) = tag {
            c = c.with_tag(t);
        }
        f.channels.push(c);
    }
    f.timezone = "Europe/Paris".into();
    f.region = "france".into();
    // Inside the recorded span of the French holiday calendar: 2007-01-08.
    f.start_hour = 1_168_214_400 / 3600;
    f
}

fn leakage(board: &mut Board) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut compared = 0;
    let mut leaks = Vec::new();
    let mut trials = 0;
    while trials < 100 {
        let seed = rng.gen_range(0..1000);
        let (frame, id) = if trials % 2 == 0 {
            (
                synth_household(&SynthSpec {
                    seed,
                    days: 24,
                    ..SynthSpec::default()
                })
                .unwrap()
                .0,
                DatasetId::Synthetic,
            )
        } else {
            (uci_like(seed, 24), DatasetId::Uci)
        };
        let mut descs = inventory(id);
        resolve_levels(&mut descs, std::slice::from_ref(&frame)).unwrap();
        let before = assemble_matrix(&frame, &descs).unwrap();
        // t is drawn among hours that have a feature row.
        let hour = before.row_hours[rng.gen_range(0..before.n_rows())];
        let t = (hour - frame.start_hour) as usize;
        let mut changed = frame.clone();
        let scale = rng.gen_range(0.5..50.0);
        for i in t + 1..changed.len() {
            changed.target.values[i] = scale * (1.0 + (i % 5) as f64);
            for c in &mut changed.channels {
                c.values[i] = c.values[i] * scale + 3.0;
            }
        }
        let after = assemble_matrix(&changed, &descs).unwrap();
        let a = before.row_hours.iter().position(|h| *h == hour);
        let b = after.row_hours.iter().position(|h| *h == hour);
        match (a, b) {
            (Some(a), Some(b)) => {
                compared += 1;
                if before.row(a) != after.row(b) {
                    leaks.push(format!("{id} t={t}"));
                }
            }
            _ => leaks.push(format!("{id} t={t}: row lost after perturbation")),
        }
        trials += 1;
    }
    let t = started.elapsed();
    board.check(
        3,
        "leakage suite",
        leaks.is_empty() && compared == 100 && within(t, Duration::from_secs(30)),
        format!(
            "{compared} (frame, t) pairs compared, {} leaks {:?}; {t:.2?}",
            leaks.len(),
            leaks.first()
        ),
    );
}

// Synthetic ordering.

fn gbt_mpe(table: &ReportTable, row: usize) -> f64 {
    table
        .cell(row, ModelKind::Gbt)
        .and_then(CellResult::metrics)
        .map_or(f64::NAN, |m| m.mpe)
}

fn synthetic_grid() -> (ReportTable, Vec<RowExplanation>, Duration) {
    let started = Instant::now();
    let cfg = RunConfig {
        models: vec![ModelKind::Gbt],
        ..RunConfig::default()
    };
    let (frame, _) = synth_household(&cfg.synthetic.spec(cfg.seed)).unwrap();
    let plan = AblationPlan::new(
        "synthetic",
        &[frame],
        &inventory(DatasetId::Synthetic),
        true,
        cfg.ablation_options(),
    )
    .unwrap();
    let (table, expl) = run_grid(&plan, None).unwrap();
    (table, expl, started.elapsed())
}

fn ordering(board: &mut Board, table: &ReportTable, t: Duration) {
    let (raw, domain, contextual, all) = (
        gbt_mpe(table, 1),
        gbt_mpe(table, 2),
        gbt_mpe(table, 3),
        gbt_mpe(table, 8),
    );
    let shares = table
        .groups
        .iter()
        .find(|g| g.variant == "all")
        .map(|g| g.shares);
    let (a, b) = (all <= raw - 2.0, domain < contextual);
    let c =
        shares.is_some_and(|s| s.domain > s.contextual && s.contextual > 0.0 && s.domain > 60.0);
    board.check(
        4,
        "synthetic oracle ordering",
        a && b && c && within(t, Duration::from_secs(300)),
        format!(
            "all-groups {all:.3}% vs raw {raw:.3}% [{a}]; Domain {domain:.3}% < Contextual {contextual:.3}% [{b}]; shares D/C/B {} [{c}]; {t:.2?}",
            shares.map_or("missing".into(), |s| format!("{:.1}/{:.1}/{:.1}%", s.domain, s.contextual, s.behavioral))
        ),
    );
}

// Split protocol.

fn split(board: &mut Board) {
    let frames: Vec<HourlyFrame> = [(21, 5u64), (30, 6), (37, 7)]
        .iter()
        .map(|&(days, seed)| {
            let mut f = synth_household(&SynthSpec {
                seed,
                days,
                ..SynthSpec::default()
            })
            .unwrap()
            .0;
            f.household_id = format!("h{seed}");
            // Different calendars per household.
            f.start_hour += seed as i64 * 1000;
            f
        })
        .collect();
    let cfg = RunConfig {
        models: vec![ModelKind::Linear],
        explain: false,
        ..RunConfig::default()
    };
    let plan = AblationPlan::new(
        "split",
        &frames,
        &inventory(DatasetId::Synthetic),
        true,
        cfg.ablation_options(),
    )
    .unwrap();
    let m = &plan.matrix;
    let mut problems = Vec::new();
    let mut sizes = Vec::new();
    for (h, name) in m.households.iter().enumerate() {
        let mut hours: Vec<i64> = (0..m.n_rows())
            .filter(|&i| m.row_household[i] == h)
            .map(|i| m.row_hours[i])
            .collect();
        hours.sort_unstable();
        let n = hours.len();
        let cut = n * 4 / 5;
        let expected_test = &hours[cut..];
        let mut test: Vec<i64> = plan
            .test_rows
            .iter()
            .filter(|&&i| m.row_household[i] == h)
            .map(|&i| m.row_hours[i])
            .collect();
        let mut train: Vec<i64> = plan
            .train_rows
            .iter()
            .filter(|&&i| m.row_household[i] == h)
            .map(|&i| m.row_hours[i])
            .collect();
        test.sort_unstable();
        train.sort_unstable();
        if test != expected_test || train != hours[..cut] {
            problems.push(name.clone());
        }
        if train.last() >= test.first() {
            problems.push(format!("{name}: train reaches into test"));
        }
        sizes.push(format!("{name} {n}->{}+{}", train.len(), test.len()));
    }
    let covered = plan.train_rows.len() + plan.test_rows.len() == m.n_rows();
    board.check(
        5,
        "split protocol",
        problems.is_empty() && covered,
        format!(
            "per household train/test by timestamp: {}; problems {problems:?}",
            sizes.join(", ")
        ),
    );
}

// Solar.

#[derive(Deserialize)]
struct SolarCase {
    location: String,
    latitude: f64,
    longitude: f64,
    unix_seconds: i64,
    apparent_elevation_deg: f64,
}

#[derive(Deserialize)]
struct SolarFixture {
    tolerance_deg: f64,
    cases: Vec<SolarCase>,
}

fn solar(board: &mut Board) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/solar_reference.json");
    let fixture: SolarFixture =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let mut worst = (0.0f64, String::new());
    for c in &fixture.cases {
        let alt = solar_position(c.unix_seconds as f64, c.latitude, c.longitude).altitude;
        let err = (alt - c.apparent_elevation_deg).abs();
        if err >= worst.0 {
            worst = (err, c.location.clone());
        }
    }
    board.check(
        6,
        "solar altitude",
        fixture.cases.len() >= 5 && worst.0 <= fixture.tolerance_deg.min(0.5),
        format!(
            "{} reference instants, worst {:.4} deg at {}",
            fixture.cases.len(),
            worst.0,
            worst.1
        ),
    );
}

// Real data.

fn real_grid(id: DatasetId, root: &Path) -> Result<ReportTable, String> {
    let d = load_dataset(id, root, &LoadOptions::default()).map_err(|e| e.to_string())?;
    let cfg = RunConfig {
        dataset: id,
        models: vec![ModelKind::Gbt],
        explain: false,
        ..RunConfig::default()
    };
    let plan = AblationPlan::new(
        id.as_str(),
        &d.frames,
        &inventory(id),
        d.descriptor.has_submeters,
        cfg.ablation_options(),
    )
    .map_err(|e| e.to_string())?;
    run_grid(&plan, None)
        .map(|r| r.0)
        .map_err(|e| e.to_string())
}

fn real_data(board: &mut Board) {
    let Some(base) = std::env::var_os("GRIDFEAT_DATA").map(PathBuf::from) else {
        board.report(
            7,
            "real-data reference",
            Verdict::Skip,
            "GRIDFEAT_DATA not set".into(),
        );
        return;
    };
    let started = Instant::now();
    let reference = |id| match id {
        DatasetId::Hue => Some(24.675),
        DatasetId::Refit => Some(25.389),
        _ => None,
    };
    let mut notes = Vec::new();
    let mut ok = true;
    let mut ran = 0;
    for id in [DatasetId::Hue, DatasetId::Uci, DatasetId::Refit] {
        let root = base.join(id.as_str());
        if !root.is_dir() {
            notes.push(format!("{id}: absent"));
            continue;
        }
        let table = match real_grid(id, &root) {
            Ok(t) => t,
            Err(e) => {
                ok = false;
                notes.push(format!("{id}: {e}"));
                continue;
            }
        };
        ran += 1;
        let (raw, all) = (gbt_mpe(&table, 1), gbt_mpe(&table, 8));
        let mut line = format!("{id}: all-groups {all:.3}% raw {raw:.3}%");
        ok &= all <= raw;
        if let Some(r) = reference(id) {
            ok &= (all - r).abs() <= 6.0;
            line += &format!(" (reference {r} +/- 6)");
        }
        if matches!(id, DatasetId::Uci | DatasetId::Refit) {
            let mse = |row| {
                table
                    .cell(row, ModelKind::Gbt)
                    .and_then(CellResult::metrics)
                    .map_or(f64::NAN, |m| m.mse)
            };
            let (with, without) = (mse(8), mse(9));
            ok &= without > with;
            line += &format!(", MSE {with:.4} -> {without:.4} kWh2 without submeters");
        }
        notes.push(line);
    }
    let t = started.elapsed();
    if ran == 0 && ok {
        board.report(
            7,
            "real-data reference",
            Verdict::Skip,
            format!("no dataset under {}", base.display()),
        );
    } else {
        board.check(
            7,
            "real-data reference",
            ok && within(t, Duration::from_secs(1800)),
            format!("{}; {t:.2?}", notes.join("; ")),
        );
    }
}

// Determinism.

fn determinism(board: &mut Board) {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut reports = Vec::new();
    for d in &dirs {
        let out = Command::new(env!("CARGO_BIN_EXE_gridfeat"))
            .args(["ablate", "--seed", "7", "--out"])
            .arg(d.path())
            .output()
            .unwrap();
        if !out.status.success() {
            board.check(
                8,
                "determinism",
                false,
                String::from_utf8_lossy(&out.stderr).into_owned(),
            );
            return;
        }
        reports.push(std::fs::read(d.path().join("synthetic_ablation.csv")).unwrap());
    }
    board.check(
        8,
        "determinism",
        reports[0] == reports[1] && !reports[0].is_empty(),
        format!(
            "two full synthetic ablation runs, CSV reports of {} bytes identical: {}",
            reports[0].len(),
            reports[0] == reports[1]
        ),
    );
}

fn main() {
    let mut board = Board { failed: 0 };
    let (table, explanations, grid_time) = synthetic_grid();
    metrics(&mut board);
    shap(&mut board, &explanations);
    leakage(&mut board);
    ordering(&mut board, &table, grid_time);
    split(&mut board);
    solar(&mut board);
    real_data(&mut board);
    determinism(&mut board);
    if board.failed > 0 {
        eprintln!("{} acceptance criteria failed", board.failed);
        std::process::exit(1);
    }
}
