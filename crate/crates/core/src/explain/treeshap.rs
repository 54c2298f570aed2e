//! Exact path-dependent Shapley values for tree ensembles, polynomial in tree
//! depth.

use alloc::vec;
use alloc::vec::Vec;

use crate::models::{GbtModel, Tree};

#[derive(Debug, Clone, Copy)]
struct PathElem {
    feature: usize,
    zero: f64,
    one: f64,
    weight: f64,
}

const NO_FEATURE: usize = usize::MAX;

fn extend(path: &mut Vec<PathElem>, zero: f64, one: f64, feature: usize) {
    let l = path.len();
    path.push(PathElem {
        feature,
        zero,
        one,
        weight: if l == 0 { 1.0 } else { 0.0 },
    });
    for i in (0..l).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / (l + 1) as f64;
        path[i].weight = zero * path[i].weight * (l - i) as f64 / (l + 1) as f64;
    }
}

/// Remove element `k`, undoing its extension.
fn unwind(path: &mut Vec<PathElem>, k: usize) {
    let d = path.len() - 1;
    let (one, zero) = (path[k].one, path[k].zero);
    let mut next = path[d].weight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * (d + 1) as f64 / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (d - i) as f64 / (d + 1) as f64;
        } else {
            path[i].weight = path[i].weight * (d + 1) as f64 / (zero * (d - i) as f64);
        }
    }
    for i in k..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

/// Total weight of the path with element `k` unwound, without modifying it.
fn unwound_sum(path: &[PathElem], k: usize) -> f64 {
    let d = path.len() - 1;
    let (one, zero) = (path[k].one, path[k].zero);
    let mut next = path[d].weight;
    let mut total = 0.0;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = next * (d + 1) as f64 / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (d - i) as f64 / (d + 1) as f64;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((d - i) as f64 / (d + 1) as f64);
        }
    }
    total
}

fn recurse(
    tree: &Tree,
    x: &[f64],
    phi: &mut [f64],
    node: usize,
    parent: &[PathElem],
    zero: f64,
    one: f64,
    feature: usize,
) {
    let mut path = parent.to_vec();
    extend(&mut path, zero, one, feature);
    let n = &tree.nodes[node];
    match n.children {
        None => {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let e = path[i];
                phi[e.feature] += w * (e.one - e.zero) * n.leaf_value;
            }
        }
        Some((l, r)) => {
            let (hot, cold) = if x[n.feature] < n.threshold {
                (l, r)
            } else {
                (r, l)
            };
            let (mut iz, mut io) = (1.0, 1.0);
            if let Some(k) = (1..path.len()).find(|&k| path[k].feature == n.feature) {
                iz = path[k].zero;
                io = path[k].one;
                unwind(&mut path, k);
            }
            let cover = n.cover;
            let hz = tree.nodes[hot].cover / cover;
            let cz = tree.nodes[cold].cover / cover;
            recurse(tree, x, phi, hot, &path, iz * hz, io, n.feature);
            recurse(tree, x, phi, cold, &path, iz * cz, 0.0, n.feature);
        }
    }
}

/// Shapley values of one tree at `x`, accumulated into `phi`.
pub fn tree_shap_into(tree: &Tree, x: &[f64], phi: &mut [f64]) {
    recurse(tree, x, phi, 0, &[], 1.0, 1.0, NO_FEATURE);
}

/// Shapley values of the ensemble at `x`; they sum to the prediction minus
/// [`expected_value`].
pub fn tree_shap_row(model: &GbtModel, x: &[f64]) -> Vec<f64> {
    let mut phi = vec![0.0; x.len()];
    for t in &model.trees {
        tree_shap_into(t, x, &mut phi);
    }
    phi
}

/// Cover-weighted expected output of the ensemble.
pub fn expected_value(model: &GbtModel) -> f64 {
    model.base_score + model.trees.iter().map(Tree::expected_value).sum::<f64>()
}
