#![allow(dead_code)]

use gridfeat_core::matrix::{ColumnInfo, FeatureMatrix};
use gridfeat_core::schema::{FeatureGroup, Provenance};

pub fn column(name: &str, group: FeatureGroup) -> ColumnInfo {
    ColumnInfo {
        name: name.into(),
        descriptor: name.into(),
        group,
        provenance: Provenance::Engineered,
        submeter: false,
    }
}

/// Single-household matrix with generic Domain columns `x0, x1, ...`.
pub fn matrix(rows: &[Vec<f64>], target: &[f64]) -> FeatureMatrix {
    let p = rows.first().map_or(0, Vec::len);
    let columns = (0..p)
        .map(|j| column(&format!("x{j}"), FeatureGroup::Domain))
        .collect();
    FeatureMatrix {
        columns,
        data: rows.concat(),
        target: target.to_vec(),
        row_hours: (0..target.len() as i64).collect(),
        row_household: vec![0; target.len()],
        households: vec!["h0".into()],
    }
}
