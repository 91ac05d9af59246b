//! One-vs-rest logistic regression trained by mini-batch gradient descent.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierFactory};
use crate::dataset::{SignMatrix, SparseVector};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Mini-batch size; anything >= the training-set size is full-batch.
    pub batch_size: usize,
    /// Standard deviation of the Gaussian weight initialisation.
    pub init_scale: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            lr: 0.5,
            epochs: 30,
            l2: 1e-3,
            batch_size: 16,
            init_scale: 0.5,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("classifier.lr must be > 0, got {}", self.lr)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!("classifier.l2 must be >= 0, got {}", self.l2)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("classifier.batch_size must be >= 1".into()));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::Config("classifier.init_scale must be >= 0".into()));
        }
        Ok(())
    }
}

/// K independent logistic models over a shared feature space.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsRestLogistic {
    /// Row-major K×D.
    weights: Vec<f64>,
    bias: Vec<f64>,
    dim: usize,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl OneVsRestLogistic {
    /// Random Gaussian initialisation.
    pub fn init(labels: usize, dim: usize, scale: f64, seed: u64) -> Self {
        let mut rng = rng::rng_for(seed, &[0]);
        let mut draw = |n: usize| -> Vec<f64> {
            if scale == 0.0 {
                return vec![0.0; n];
            }
            let normal = Normal::new(0.0, scale).expect("finite scale");
            (0..n).map(|_| normal.sample(&mut rng)).collect()
        };
        let weights = draw(labels * dim);
        let bias = draw(labels);
        OneVsRestLogistic { weights, bias, dim }
    }

    pub fn num_features(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.weights, &mut self.bias)
    }

    fn logit(&self, x: &SparseVector, k: usize) -> f64 {
        x.dot(&self.weights[k * self.dim..(k + 1) * self.dim]) + self.bias[k]
    }

    /// Mean logistic loss over the rows plus `l2/2 · ‖W‖²` (bias unpenalised).
    pub fn loss(&self, xs: &[&SparseVector], ys: &SignMatrix, l2: f64) -> f64 {
        let k = self.bias.len();
        let mut total = 0.0;
        for (x, y) in xs.iter().zip(ys.iter_rows()) {
            for (j, &yj) in y.iter().enumerate().take(k) {
                let z = self.logit(x, j);
                // -log σ(z) if positive, -log(1-σ(z)) if negative
                total += if yj > 0 { softplus(-z) } else { softplus(z) };
            }
        }
        let reg: f64 = self.weights.iter().map(|w| w * w).sum::<f64>() * l2 / 2.0;
        total / xs.len().max(1) as f64 + reg
    }

    /// Gradient of [`loss`](Self::loss) with respect to `(weights, bias)`.
    pub fn gradient(&self, xs: &[&SparseVector], ys: &SignMatrix, l2: f64) -> (Vec<f64>, Vec<f64>) {
        let k = self.bias.len();
        let mut gw = vec![0.0; self.weights.len()];
        let mut gb = vec![0.0; k];
        let scale = 1.0 / xs.len().max(1) as f64;
        for (x, y) in xs.iter().zip(ys.iter_rows()) {
            for (j, &yj) in y.iter().enumerate().take(k) {
                let target = if yj > 0 { 1.0 } else { 0.0 };
                let r = (sigmoid(self.logit(x, j)) - target) * scale;
                gb[j] += r;
                let row = &mut gw[j * self.dim..(j + 1) * self.dim];
                for (i, v) in x.iter() {
                    row[i] += r * v;
                }
            }
        }
        for (g, w) in gw.iter_mut().zip(&self.weights) {
            *g += l2 * w;
        }
        (gw, gb)
    }

    fn step(&mut self, xs: &[&SparseVector], ys: &SignMatrix, config: &LogisticConfig) {
        let (gw, gb) = self.gradient(xs, ys, config.l2);
        for (w, g) in self.weights.iter_mut().zip(gw) {
            *w -= config.lr * g;
        }
        for (b, g) in self.bias.iter_mut().zip(gb) {
            *b -= config.lr * g;
        }
    }
}

impl Classifier for OneVsRestLogistic {
    fn num_labels(&self) -> usize {
        self.bias.len()
    }

    fn predict_proba_into(&self, x: &SparseVector, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = sigmoid(self.logit(x, k));
        }
    }
}

/// Trains a one-vs-rest logistic model from a seed-derived random start.
pub fn fit_logistic(
    xs: &[&SparseVector],
    ys: &SignMatrix,
    feature_dim: usize,
    config: &LogisticConfig,
    seed: u64,
) -> Result<OneVsRestLogistic> {
    config.validate()?;
    if xs.len() != ys.rows() {
        return Err(Error::dim(ys.rows(), xs.len()));
    }
    if xs.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
        return Err(Error::Data(format!("training row {i} has non-finite features")));
    }
    if let Some(max) = xs.iter().filter_map(|x| x.max_index()).max() {
        if max >= feature_dim {
            return Err(Error::dim(feature_dim, max + 1));
        }
    }

    let mut model = OneVsRestLogistic::init(ys.cols(), feature_dim, config.init_scale, seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = rng::rng_for(seed, &[1]);
    let batch = config.batch_size.min(xs.len());
    let mut bx: Vec<&SparseVector> = Vec::with_capacity(batch);
    for _ in 0..config.epochs {
        if batch < xs.len() {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch) {
            bx.clear();
            bx.extend(chunk.iter().map(|&i| xs[i]));
            let by = ys.select(chunk);
            model.step(&bx, &by, config);
        }
    }
    Ok(model)
}

impl ClassifierFactory for LogisticConfig {
    fn fit(&self, xs: &[&SparseVector], ys: &SignMatrix, feature_dim: usize, seed: u64) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(fit_logistic(xs, ys, feature_dim, self, seed)?))
    }
}
