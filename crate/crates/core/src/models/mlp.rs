use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::column_stats;
use crate::matrix::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpParams {
    pub hidden_layers: Vec<usize>,
    pub max_iterations: usize,
    pub learning_rate_init: f64,
    pub batch_size: usize,
    /// L2 penalty on weights.
    pub alpha: f64,
    /// Epochs without loss improvement before the step size is halved.
    pub patience: usize,
    /// Minimum loss decrease that counts as improvement.
    pub tol: f64,
    /// Training stops once the step size falls below this.
    pub min_learning_rate: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden_layers: vec![100],
            max_iterations: 500,
            learning_rate_init: 1e-3,
            batch_size: 200,
            alpha: 1e-4,
            patience: 5,
            tol: 1e-4,
            min_learning_rate: 1e-6,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.hidden_layers.iter().all(|&h| h > 0)
            && self.max_iterations > 0
            && self.learning_rate_init > 0.0
            && self.batch_size > 0
            && self.alpha >= 0.0
            && self.patience > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("mlp parameters out of range".into()))
        }
    }
}

/// Fully connected layer, weights row-major `inputs x outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn forward(&self, x: &[f64], out: &mut [f64], relu: bool) {
        out.copy_from_slice(&self.bias);
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            let w = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (o, wi) in out.iter_mut().zip(w) {
                *o += xi * wi;
            }
        }
        if relu {
            out.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
}

/// Multilayer perceptron with ReLU hidden layers and identity output, on
/// standardized inputs and target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub feature_names: Vec<String>,
    pub params: MlpParams,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub target_mean: f64,
    pub target_scale: f64,
    pub layers: Vec<Layer>,
    /// Epochs actually run.
    pub n_iter: usize,
    pub loss_curve: Vec<f64>,
}

impl MlpModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut a: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(j, v)| (v - self.means[j]) / self.scales[j])
            .collect();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; layer.outputs];
            layer.forward(&a, &mut out, k + 1 < self.layers.len());
            a = out;
        }
        self.target_mean + self.target_scale * a[0]
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn step(&mut self, params: &mut [&mut Vec<f64>], grads: &[Vec<f64>], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(Self::B1, self.t as f64);
        let c2 = 1.0 - libm::pow(Self::B2, self.t as f64);
        let step = lr * libm::sqrt(c2) / c1;
        for (k, p) in params.iter_mut().enumerate() {
            for ((w, g), (m, v)) in p
                .iter_mut()
                .zip(&grads[k])
                .zip(self.m[k].iter_mut().zip(self.v[k].iter_mut()))
            {
                *m = Self::B1 * *m + (1.0 - Self::B1) * g;
                *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
                *w -= step * *m / (libm::sqrt(*v) + Self::EPS);
            }
        }
    }
}

pub fn fit_mlp(train: &FeatureMatrix, params: &MlpParams, seed: u64) -> Result<MlpModel> {
    params.validate()?;
    let (n, p) = (train.n_rows(), train.n_cols());
    if n == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let (means, scales) = column_stats(train);
    let target_mean = train.target.iter().sum::<f64>() / n as f64;
    let var = train
        .target
        .iter()
        .map(|y| (y - target_mean) * (y - target_mean))
        .sum::<f64>()
        / n as f64;
    // A constant target has zero scale: the network output is multiplied
    // away and the model predicts the constant.
    let target_scale = if var > 1e-24 { libm::sqrt(var) } else { 0.0 };

    let x: Vec<f64> = (0..n)
        .flat_map(|i| {
            train
                .row(i)
                .iter()
                .enumerate()
                .map(|(j, v)| (v - means[j]) / scales[j])
                .collect::<Vec<_>>()
        })
        .collect();
    let y: Vec<f64> = train
        .target
        .iter()
        .map(|v| {
            if target_scale > 0.0 {
                (v - target_mean) / target_scale
            } else {
                0.0
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = vec![p];
    sizes.extend(&params.hidden_layers);
    sizes.push(1);
    let mut layers: Vec<Layer> = sizes
        .windows(2)
        .map(|w| {
            let bound = libm::sqrt(6.0 / (w[0] + w[1]) as f64);
            Layer {
                inputs: w[0],
                outputs: w[1],
                weights: (0..w[0] * w[1])
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
                bias: (0..w[1]).map(|_| rng.gen_range(-bound..bound)).collect(),
            }
        })
        .collect();

    let mut adam = Adam {
        m: layers
            .iter()
            .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
            .collect(),
        v: layers
            .iter()
            .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
            .collect(),
        t: 0,
    };
    let depth = layers.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut lr = params.learning_rate_init;
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut loss_curve = Vec::new();
    let mut n_iter = 0;

    // Per-sample activations, reused across batches.
    let mut acts: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
    let mut deltas: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();

    while n_iter < params.max_iterations {
        n_iter += 1;
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(params.batch_size) {
            let mut grads: Vec<Vec<f64>> = layers
                .iter()
                .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
                .collect();
            for &i in batch {
                acts[0].copy_from_slice(&x[i * p..(i + 1) * p]);
                for k in 0..depth {
                    let (head, tail) = acts.split_at_mut(k + 1);
                    layers[k].forward(&head[k], &mut tail[0], k + 1 < depth);
                }
                let err = acts[depth][0] - y[i];
                epoch_loss += 0.5 * err * err;
                deltas[depth][0] = err;
                for k in (0..depth).rev() {
                    let l = &layers[k];
                    let (gw, rest) = grads.split_at_mut(2 * k + 1);
                    let gw = &mut gw[2 * k];
                    let gb = &mut rest[0];
                    for o in 0..l.outputs {
                        gb[o] += deltas[k + 1][o];
                    }
                    for a in 0..l.inputs {
                        let xa = acts[k][a];
                        if xa != 0.0 {
                            let row = &mut gw[a * l.outputs..(a + 1) * l.outputs];
                            for (g, d) in row.iter_mut().zip(&deltas[k + 1]) {
                                *g += xa * d;
                            }
                        }
                    }
                    if k > 0 {
                        let (lo, hi) = deltas.split_at_mut(k + 1);
                        for a in 0..l.inputs {
                            let w = &l.weights[a * l.outputs..(a + 1) * l.outputs];
                            let s: f64 = w.iter().zip(&hi[0]).map(|(w, d)| w * d).sum();
                            lo[k][a] = if acts[k][a] > 0.0 { s } else { 0.0 };
                        }
                    }
                }
            }
            let b = batch.len() as f64;
            for (k, l) in layers.iter().enumerate() {
                for (g, w) in grads[2 * k].iter_mut().zip(&l.weights) {
                    *g = (*g + params.alpha * w) / b;
                }
                for g in grads[2 * k + 1].iter_mut() {
                    *g /= b;
                }
            }
            let mut refs: Vec<&mut Vec<f64>> = layers
                .iter_mut()
                .flat_map(|l| [&mut l.weights, &mut l.bias])
                .collect();
            adam.step(&mut refs, &grads, lr);
        }
        let penalty: f64 = layers
            .iter()
            .map(|l| l.weights.iter().map(|w| w * w).sum::<f64>())
            .sum();
        let loss = epoch_loss / n as f64 + 0.5 * params.alpha * penalty / n as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite("mlp training loss"));
        }
        loss_curve.push(loss);
        if loss > best - params.tol {
            stale += 1;
        } else {
            stale = 0;
        }
        best = best.min(loss);
        if stale >= params.patience {
            lr /= 2.0;
            stale = 0;
            if lr < params.min_learning_rate {
                break;
            }
        }
    }

    Ok(MlpModel {
        feature_names: train.columns.iter().map(|c| c.name.clone()).collect(),
        params: params.clone(),
        means,
        scales,
        target_mean,
        target_scale,
        layers,
        n_iter,
        loss_curve,
    })
}
