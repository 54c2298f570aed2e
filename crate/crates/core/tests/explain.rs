mod common;

use common::{column, matrix};
use gridfeat_core::explain::{
    brute_force_shap, group_contributions, tree_shap, tree_shap_row, Baseline, BRUTE_FORCE_LIMIT,
};
use gridfeat_core::matrix::FeatureMatrix;
use gridfeat_core::models::{
    fit, fit_gbt, split_train_test, GbtModel, GbtParams, ModelKind, ModelParams, TrainedModel,
    Tree, TreeNode,
};
use gridfeat_core::schema::FeatureGroup;
use gridfeat_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(rng: &mut ChaCha8Rng, n: usize, p: usize) -> FeatureMatrix {
    // Few distinct values per column so trees reuse thresholds and ties occur.
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..p).map(|_| rng.gen_range(0..6) as f64 * 0.5).collect())
        .collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, x)| if j % 2 == 0 { x * x } else { -x })
                .sum::<f64>()
                + rng.gen_range(0.0..0.5)
        })
        .collect();
    matrix(&rows, &y)
}

fn random_gbt(seed: u64) -> (TrainedModel, FeatureMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.gen_range(1..=10);
    let n = rng.gen_range(20..200);
    let data = random_data(&mut rng, n, p);
    let params = GbtParams {
        n_rounds: rng.gen_range(1..=20),
        max_depth: rng.gen_range(1..=4),
        learning_rate: rng.gen_range(0.1..1.0),
        lambda_l2: rng.gen_range(0.0..2.0),
        min_child_weight: 1.0,
    };
    let model = fit_gbt(&data, &params).unwrap();
    (TrainedModel::Gbt(model), data)
}

fn gbt(model: &TrainedModel) -> &GbtModel {
    match model {
        TrainedModel::Gbt(g) => g,
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn tree_shap_equals_brute_force(seed in any::<u64>()) {
        let (model, data) = random_gbt(seed);
        let expl = tree_shap(&model, &data).unwrap();
        prop_assert!(expl.local_accuracy_error() < 1e-9);
        for i in (0..data.n_rows()).step_by(7) {
            let brute = brute_force_shap(&model, data.row(i), Baseline::TreeCover).unwrap();
            for (a, b) in expl.row(i).iter().zip(&brute) {
                prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn attributions_follow_column_permutations(seed in any::<u64>(), rot in 1usize..10) {
        let (model, data) = random_gbt(seed);
        let g = gbt(&model);
        let p = data.n_cols();
        // New column k holds old column perm[k].
        let perm: Vec<usize> = (0..p).map(|k| (k + rot) % p).collect();
        let mut inverse = vec![0; p];
        for (k, &j) in perm.iter().enumerate() {
            inverse[j] = k;
        }
        let mut permuted = g.clone();
        permuted.feature_names = perm.iter().map(|&j| g.feature_names[j].clone()).collect();
        for t in &mut permuted.trees {
            for n in &mut t.nodes {
                if n.children.is_some() {
                    n.feature = inverse[n.feature];
                }
            }
        }
        for i in (0..data.n_rows()).step_by(11) {
            let x = data.row(i);
            let xp: Vec<f64> = perm.iter().map(|&j| x[j]).collect();
            let a = tree_shap_row(g, x);
            let b = tree_shap_row(&permuted, &xp);
            for k in 0..p {
                prop_assert!((b[k] - a[perm[k]]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn ensemble_attribution_is_additive() {
    let (model, data) = random_gbt(17);
    let g = gbt(&model);
    let single = |t: &Tree| GbtModel {
        trees: vec![t.clone()],
        base_score: 0.0,
        ..g.clone()
    };
    let pair = GbtModel {
        trees: g.trees[..2.min(g.trees.len())].to_vec(),
        base_score: 0.0,
        ..g.clone()
    };
    for i in 0..data.n_rows() {
        let x = data.row(i);
        let whole = tree_shap_row(&pair, x);
        let mut parts = vec![0.0; x.len()];
        for t in &pair.trees {
            for (p, v) in parts.iter_mut().zip(tree_shap_row(&single(t), x)) {
                *p += v;
            }
        }
        for (a, b) in whole.iter().zip(&parts) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn unused_feature_gets_exactly_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut data = random_data(&mut rng, 100, 3);
    // Column 2 is constant, so no split can use it.
    for i in 0..data.n_rows() {
        data.data[i * 3 + 2] = 1.0;
    }
    let model = TrainedModel::Gbt(fit_gbt(&data, &GbtParams::default()).unwrap());
    assert!(!gbt(&model).trees.iter().any(|t| t.uses_feature(2)));
    let expl = tree_shap(&model, &data).unwrap();
    assert!((0..data.n_rows()).all(|i| expl.row(i)[2] == 0.0));
}

#[test]
fn brute_force_single_feature_closed_form() {
    let xs: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
    let y: Vec<f64> = xs.iter().map(|r| (r[0] / 7.0).floor()).collect();
    let data = matrix(&xs, &y);
    let model = fit(ModelKind::Gbt, &data, &ModelParams::default(), 0).unwrap();
    let x = [13.0];
    let f = model.predict_row(&x);
    let mean_pred = (0..40).map(|i| model.predict_row(data.row(i))).sum::<f64>() / 40.0;
    let bg = brute_force_shap(&model, &x, Baseline::Background(&data)).unwrap();
    assert!((bg[0] - (f - mean_pred)).abs() < 1e-12);
    let expl = tree_shap(&model, &data).unwrap();
    let tc = brute_force_shap(&model, &x, Baseline::TreeCover).unwrap();
    assert!((tc[0] - (f - expl.base_value)).abs() < 1e-9);
}

#[test]
fn brute_force_symmetry_for_duplicated_features() {
    // Two mirrored stumps, one per feature, fed identical columns.
    let stump = |feature: usize| Tree {
        nodes: vec![
            TreeNode {
                feature,
                threshold: 1.0,
                children: Some((1, 2)),
                leaf_value: 0.0,
                cover: 30.0,
            },
            TreeNode {
                feature: 0,
                threshold: 0.0,
                children: None,
                leaf_value: -0.5,
                cover: 10.0,
            },
            TreeNode {
                feature: 0,
                threshold: 0.0,
                children: None,
                leaf_value: 0.75,
                cover: 20.0,
            },
        ],
    };
    let model = TrainedModel::Gbt(GbtModel {
        feature_names: vec!["x0".into(), "x1".into()],
        params: GbtParams::default(),
        base_score: 0.1,
        trees: vec![stump(0), stump(1)],
    });
    let xs: Vec<Vec<f64>> = (0..30)
        .map(|i| vec![i as f64 * 0.1, i as f64 * 0.1])
        .collect();
    let data = matrix(&xs, &[0.0; 30]);
    for x in [[0.5, 0.5], [2.5, 2.5]] {
        let phi = brute_force_shap(&model, &x, Baseline::Background(&data)).unwrap();
        assert_eq!(phi[0], phi[1]);
        let phi = brute_force_shap(&model, &x, Baseline::TreeCover).unwrap();
        assert_eq!(phi[0], phi[1]);
    }
}

#[test]
fn brute_force_refuses_thirteen_features() {
    let data = matrix(&vec![vec![0.0; BRUTE_FORCE_LIMIT + 1]; 20], &[1.0; 20]);
    let model = fit(ModelKind::Linear, &data, &ModelParams::default(), 0).unwrap();
    assert!(matches!(
        brute_force_shap(&model, data.row(0), Baseline::Background(&data)),
        Err(Error::TooManyFeatures { .. })
    ));
}

#[test]
fn tree_shap_rejects_other_models() {
    let (_, data) = random_gbt(3);
    let linear = fit(ModelKind::Linear, &data, &ModelParams::default(), 0).unwrap();
    match tree_shap(&linear, &data) {
        Err(Error::Unsupported(msg)) => assert!(msg.contains("brute_force_shap")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn group_shares() {
    let (model, mut data) = random_gbt(21);
    let expl = tree_shap(&model, &data).unwrap();
    let g = group_contributions(&expl, &data.columns).unwrap();
    assert_eq!((g.domain, g.contextual, g.behavioral), (100.0, 0.0, 0.0));
    let groups = [
        FeatureGroup::Domain,
        FeatureGroup::Contextual,
        FeatureGroup::Behavioral,
    ];
    for (j, c) in data.columns.iter_mut().enumerate() {
        *c = column(&c.name, groups[j % 3]);
    }
    let g = group_contributions(&expl, &data.columns).unwrap();
    assert!((g.domain + g.contextual + g.behavioral - 100.0).abs() < 1e-9);
    assert!(group_contributions(&expl, &data.columns[1..]).is_err());
}

#[test]
fn lag_only_signal_is_attributed_to_domain() {
    // AR(1) series; the target is the next value, so only the lag columns
    // carry signal. Calendar-like and flag columns are pure noise.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 2000;
    let mut s = vec![0.0; n + 1];
    for t in 1..=n {
        s[t] = 0.9 * s[t - 1] + rng.gen_range(-0.5..0.5);
    }
    let rows: Vec<Vec<f64>> = (24..n)
        .map(|t| {
            vec![
                s[t],
                s[t - 1],
                s[t - 23],
                (t % 24) as f64,
                ((t / 24) % 7) as f64,
                rng.gen_range(0..2) as f64,
            ]
        })
        .collect();
    let target: Vec<f64> = (24..n).map(|t| s[t + 1]).collect();
    let mut data = matrix(&rows, &target);
    let groups = [
        FeatureGroup::Domain,
        FeatureGroup::Domain,
        FeatureGroup::Domain,
        FeatureGroup::Contextual,
        FeatureGroup::Contextual,
        FeatureGroup::Behavioral,
    ];
    for (c, g) in data.columns.iter_mut().zip(groups) {
        *c = column(&c.name, g);
    }
    let (train, test) = split_train_test(&data);
    let model = fit(ModelKind::Gbt, &train, &ModelParams::default(), 0).unwrap();
    let expl = tree_shap(&model, &test).unwrap();
    let shares = group_contributions(&expl, &test.columns).unwrap();
    assert!(shares.domain > 80.0, "{shares:?}");
}
