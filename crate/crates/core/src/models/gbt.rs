use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::matrix::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GbtParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Minimum hessian sum (row count under squared error) per child.
    pub min_child_weight: f64,
    pub lambda_l2: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_rounds: 100,
            learning_rate: 0.3,
            max_depth: 6,
            min_child_weight: 1.0,
            lambda_l2: 1.0,
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_rounds > 0
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.min_child_weight >= 0.0
            && self.lambda_l2 >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("gbt parameters out of range".into()))
        }
    }
}

/// Node of a tree stored in a flat arena; node 0 is the root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub feature: usize,
    pub threshold: f64,
    /// `(left, right)` child indices; `None` for leaves.
    pub children: Option<(usize, usize)>,
    pub leaf_value: f64,
    /// Training rows reaching the node.
    pub cover: f64,
}

/// A regression tree. Rows go left when `x[feature] < threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NodeJson", try_from = "NodeJson")]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

/// Nested JSON layout of a tree node.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Box<NodeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Box<NodeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaf_value: Option<f64>,
    cover: f64,
}

impl From<Tree> for NodeJson {
    fn from(t: Tree) -> Self {
        fn build(nodes: &[TreeNode], i: usize) -> NodeJson {
            let n = nodes[i];
            match n.children {
                Some((l, r)) => NodeJson {
                    feature: Some(n.feature),
                    threshold: Some(n.threshold),
                    left: Some(Box::new(build(nodes, l))),
                    right: Some(Box::new(build(nodes, r))),
                    leaf_value: None,
                    cover: n.cover,
                },
                None => NodeJson {
                    feature: None,
                    threshold: None,
                    left: None,
                    right: None,
                    leaf_value: Some(n.leaf_value),
                    cover: n.cover,
                },
            }
        }
        build(&t.nodes, 0)
    }
}

impl TryFrom<NodeJson> for Tree {
    type Error = String;

    fn try_from(root: NodeJson) -> core::result::Result<Self, String> {
        fn push(nodes: &mut Vec<TreeNode>, n: NodeJson) -> core::result::Result<usize, String> {
            let at = nodes.len();
            nodes.push(TreeNode {
                feature: 0,
                threshold: 0.0,
                children: None,
                leaf_value: 0.0,
                cover: n.cover,
            });
            match (n.feature, n.threshold, n.left, n.right, n.leaf_value) {
                (Some(f), Some(t), Some(l), Some(r), None) => {
                    let li = push(nodes, *l)?;
                    let ri = push(nodes, *r)?;
                    nodes[at].feature = f;
                    nodes[at].threshold = t;
                    nodes[at].children = Some((li, ri));
                }
                (None, None, None, None, Some(v)) => nodes[at].leaf_value = v,
                _ => return Err("tree node must be either a split or a leaf".into()),
            }
            Ok(at)
        }
        let mut nodes = Vec::new();
        push(&mut nodes, root)?;
        Ok(Tree { nodes })
    }
}

impl Tree {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            let n = &self.nodes[i];
            match n.children {
                Some((l, r)) => i = if x[n.feature] < n.threshold { l } else { r },
                None => return n.leaf_value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i].children {
                Some((l, r)) => 1 + go(nodes, l).max(go(nodes, r)),
                None => 0,
            }
        }
        go(&self.nodes, 0)
    }

    /// Cover-weighted mean output.
    pub fn expected_value(&self) -> f64 {
        let root = self.nodes[0].cover;
        self.nodes
            .iter()
            .filter(|n| n.children.is_none())
            .map(|n| n.leaf_value * n.cover / root)
            .sum()
    }

    pub fn uses_feature(&self, j: usize) -> bool {
        self.nodes
            .iter()
            .any(|n| n.children.is_some() && n.feature == j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub feature_names: Vec<String>,
    pub params: GbtParams,
    pub base_score: f64,
    pub trees: Vec<Tree>,
}

impl GbtModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict_row(x)).sum::<f64>()
    }

    /// Predictions after each number of rounds `0..=trees.len()`.
    pub fn staged_predict_row(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.trees.len() + 1);
        let mut y = self.base_score;
        out.push(y);
        for t in &self.trees {
            y += t.predict_row(x);
            out.push(y);
        }
        out
    }
}

struct Builder<'a> {
    cols: &'a [Vec<f64>],
    grad: &'a [f64],
    params: &'a GbtParams,
    nodes: Vec<TreeNode>,
    /// Scratch flag marking rows sent left by the current split.
    goes_left: Vec<bool>,
}

struct Split {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn leaf_weight(&self, g: f64, h: f64) -> f64 {
        -self.params.learning_rate * g / (h + self.params.lambda_l2)
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.lambda_l2)
    }

    fn best_split(&self, sorted: &[Vec<u32>], g_total: f64, h_total: f64) -> Option<Split> {
        let mcw = self.params.min_child_weight;
        let parent = self.score(g_total, h_total);
        let mut best: Option<Split> = None;
        for (j, order) in sorted.iter().enumerate() {
            let col = &self.cols[j];
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len().saturating_sub(1) {
                let i = order[k] as usize;
                gl += self.grad[i];
                hl += 1.0;
                let (a, b) = (col[i], col[order[k + 1] as usize]);
                if a == b {
                    continue;
                }
                let (gr, hr) = (g_total - gl, h_total - hl);
                if hl < mcw || hr < mcw {
                    continue;
                }
                let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - parent);
                if gain > best.as_ref().map_or(0.0, |s| s.gain) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold <= a {
                        threshold = b;
                    }
                    best = Some(Split {
                        gain,
                        feature: j,
                        threshold,
                    });
                }
            }
        }
        best
    }

    /// Grow the subtree over the rows in `sorted` (one presorted list per feature).
    fn grow(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let rows = &sorted[0];
        let g: f64 = rows.iter().map(|&i| self.grad[i as usize]).sum();
        let h = rows.len() as f64;
        let at = self.nodes.len();
        self.nodes.push(TreeNode {
            feature: 0,
            threshold: 0.0,
            children: None,
            leaf_value: self.leaf_weight(g, h),
            cover: h,
        });
        if depth >= self.params.max_depth {
            return at;
        }
        let Some(split) = self.best_split(&sorted, g, h) else {
            return at;
        };
        let col = &self.cols[split.feature];
        for &i in rows {
            self.goes_left[i as usize] = col[i as usize] < split.threshold;
        }
        let mut left = Vec::with_capacity(sorted.len());
        let mut right = Vec::with_capacity(sorted.len());
        for order in &sorted {
            let (l, r): (Vec<u32>, Vec<u32>) =
                order.iter().partition(|&&i| self.goes_left[i as usize]);
            left.push(l);
            right.push(r);
        }
        drop(sorted);
        let li = self.grow(left, depth + 1);
        let ri = self.grow(right, depth + 1);
        let node = &mut self.nodes[at];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.children = Some((li, ri));
        node.leaf_value = 0.0;
        at
    }
}

pub fn fit_gbt(train: &FeatureMatrix, params: &GbtParams) -> Result<GbtModel> {
    params.validate()?;
    let (n, p) = (train.n_rows(), train.n_cols());
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let cols: Vec<Vec<f64>> = (0..p).map(|j| train.column(j)).collect();
    // With no columns, a single constant column keeps the arena logic uniform.
    let cols = if p == 0 { vec![vec![0.0; n]] } else { cols };
    let presorted: Vec<Vec<u32>> = cols
        .iter()
        .map(|c| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]));
            idx
        })
        .collect();

    let base_score = train.target.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        for i in 0..n {
            grad[i] = pred[i] - train.target[i];
        }
        let mut b = Builder {
            cols: &cols,
            grad: &grad,
            params,
            nodes: Vec::new(),
            goes_left: vec![false; n],
        };
        b.grow(presorted.clone(), 0);
        let tree = Tree { nodes: b.nodes };
        for (i, p) in pred.iter_mut().enumerate() {
            *p += tree.predict_row(train.row(i));
        }
        trees.push(tree);
    }
    Ok(GbtModel {
        feature_names: train.columns.iter().map(|c| c.name.clone()).collect(),
        params: *params,
        base_score,
        trees,
    })
}
