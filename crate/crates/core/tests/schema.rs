use gridfeat_core::schema::{
    group_counts, inventory, select_features, unproduced_descriptors, validate_descriptor,
    DatasetId, FeatureGroup, GroupSet, Taxonomy,
};
use proptest::prelude::*;

/// First- and second-level labels of the published taxonomy figure.
const FIGURE_LABELS: &[(&str, &str)] = &[
    ("domain", "Domain Specific Features"),
    ("domain/pv", "PV power plant measurements"),
    ("domain/ev", "Electric vehicles"),
    ("domain/household", "Household Measurements"),
    ("domain/wind", "wind power plant measurements"),
    ("contextual", "Contextual Features"),
    ("contextual/weather", "weather conditions"),
    ("contextual/building", "building properties"),
    ("contextual/time", "time"),
    ("contextual/geolocation", "geolocation"),
    ("behavioral", "Behavioral Features"),
    ("behavioral/wealth_class", "wealth class"),
    ("behavioral/social_activities", "social activities"),
    ("behavioral/heating", "heating"),
    ("behavioral/age", "age"),
    ("behavioral/work_schedule", "work schedule"),
    ("behavioral/personal_hygiene", "personal hygiene"),
    ("behavioral/cooking", "cooking"),
];

const DATASETS: [DatasetId; 4] = [
    DatasetId::Hue,
    DatasetId::Uci,
    DatasetId::Refit,
    DatasetId::Synthetic,
];

#[test]
fn taxonomy_has_every_figure_label() {
    let tax = Taxonomy::embedded();
    for (path, label) in FIGURE_LABELS {
        let node = tax.lookup(path).unwrap_or_else(|| panic!("missing {path}"));
        assert_eq!(node.label, *label);
    }
    assert_eq!(tax.lookup("").unwrap().children.len(), 3);
    assert!(tax.lookup("domain/teleportation").is_none());
}

#[test]
fn selection_examples() {
    let hue = inventory(DatasetId::Hue);
    assert_eq!(hue.len(), 67);
    let domain = select_features(&hue, GroupSet::of(&[FeatureGroup::Domain]), true).unwrap();
    assert_eq!(domain.len(), 8);
    assert!(domain.iter().all(|d| d.group == FeatureGroup::Domain));
    assert_eq!(select_features(&hue, GroupSet::ALL, true).unwrap(), hue);

    let refit = inventory(DatasetId::Refit);
    let behavioral =
        select_features(&refit, GroupSet::of(&[FeatureGroup::Behavioral]), false).unwrap();
    assert_eq!(behavioral.len(), 14);
    assert!(behavioral.iter().all(|d| !d.submeter));
}

#[test]
fn hue_has_no_submeter_descriptors() {
    let hue = inventory(DatasetId::Hue);
    assert!(hue.iter().all(|d| !d.submeter));
    assert!(hue.iter().all(|d| !d.name.contains("kitchen")));
}

#[test]
fn all_descriptors_validate() {
    for id in DATASETS {
        for d in inventory(id) {
            assert!(validate_descriptor(&d).is_empty(), "{}", d.name);
        }
    }
    for d in unproduced_descriptors() {
        assert!(validate_descriptor(&d).is_empty(), "{}", d.name);
    }
}

#[test]
fn group_counts_sum_to_inventory_size() {
    for id in DATASETS {
        let all = inventory(id);
        assert_eq!(group_counts(&all).iter().sum::<usize>(), all.len());
    }
}

fn combo() -> impl Strategy<Value = GroupSet> {
    (1u8..8).prop_map(|bits| {
        let mut s = GroupSet::default();
        for (i, g) in FeatureGroup::ALL.into_iter().enumerate() {
            if bits & (1 << i) != 0 {
                s = s.with(g);
            }
        }
        s
    })
}

proptest! {
    #[test]
    fn selection_is_idempotent_and_monotone(
        id in prop::sample::select(DATASETS.to_vec()),
        a in combo(),
        b in combo(),
        sub in any::<bool>(),
    ) {
        let all = inventory(id);
        let Ok(sa) = select_features(&all, a, sub) else { return Ok(()) };
        prop_assert_eq!(select_features(&sa, a, sub).unwrap(), sa.clone());
        let union = b.iter().fold(a, |s, g| s.with(g));
        let su = select_features(&all, union, sub).unwrap();
        prop_assert!(sa.iter().all(|d| su.contains(d)));
        // Input order is preserved.
        let pos: Vec<usize> = sa.iter().map(|d| all.iter().position(|x| x == d).unwrap()).collect();
        prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
