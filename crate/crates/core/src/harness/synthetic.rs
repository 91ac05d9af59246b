//! Synthetic imbalanced multi-label data.
//!
//! [`generate_base`] draws a latent-factor pool: dense Gaussian features,
//! label logits linear in the features with biases spread geometrically so
//! label frequencies are imbalanced, a few parent/child labels (a child
//! always carries its parent) and one mutually exclusive pair.
//! [`subsample_to_mean_ir`] then removes instances greedily until the pool's
//! MeanIR lands within tolerance of a target.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{MultiLabelDataset, SignMatrix, SparseVector};
use crate::error::{Error, Result};
use crate::metrics::mean_ir_from_counts;
use crate::rng::{self, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Subsample this file instead of generating a pool.
    pub base: Option<PathBuf>,
    pub instances: usize,
    pub labels: usize,
    pub feature_dim: usize,
    /// Ratio between the most and least frequent label's base rate.
    pub imbalance: f64,
    /// Scale of the label logits; larger is less noisy.
    pub signal: f64,
    pub target_mean_ir: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            base: None,
            instances: 2000,
            labels: 10,
            feature_dim: 32,
            imbalance: 30.0,
            signal: 4.0,
            target_mean_ir: 20.0,
            tolerance: 0.5,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_mean_ir >= 1.0) {
            return Err(Error::Config(format!(
                "target_mean_ir must be >= 1, got {}",
                self.target_mean_ir
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.base.is_none() {
            if self.labels < 2 || self.instances == 0 || self.feature_dim == 0 {
                return Err(Error::Config(
                    "synthetic generator needs labels >= 2, instances >= 1, feature_dim >= 1".into(),
                ));
            }
            if !(self.imbalance >= 1.0 && self.signal > 0.0) {
                return Err(Error::Config("imbalance must be >= 1 and signal > 0".into()));
            }
        }
        Ok(())
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Bias `b` with `mean(sigmoid(b + s_i)) = rate`, by bisection.
fn calibrate_bias(scores: &[f64], rate: f64) -> f64 {
    let mean = |b: f64| scores.iter().map(|s| sigmoid(b + s)).sum::<f64>() / scores.len() as f64;
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn normal(rng: &mut rng::Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws a latent-factor pool per `spec`, ignoring the MeanIR target.
#[allow(clippy::needless_range_loop)]
pub fn generate_base(spec: &SyntheticSpec) -> Result<MultiLabelDataset> {
    spec.validate()?;
    let (n, k, d) = (spec.instances, spec.labels, spec.feature_dim);
    let mut rng = rng::rng_for(spec.seed, &[stream::SYNTHETIC, 0]);

    let scale = 1.0 / (d as f64).sqrt();
    let weights: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| normal(&mut rng) * scale).collect())
        .collect();
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal(&mut rng)).collect()).collect();
    let scores: Vec<Vec<f64>> = weights
        .iter()
        .map(|w| {
            xs.iter()
                .map(|x| spec.signal * w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect();
    let bias: Vec<f64> = scores
        .iter()
        .enumerate()
        .map(|(j, s)| calibrate_bias(s, 0.4 * spec.imbalance.powf(-(j as f64) / (k - 1) as f64)))
        .collect();
    // the last third of the labels are children of the first third
    let children = if k >= 3 { k / 3 } else { 0 };
    let first_child = k - children;
    let exclusive = (k >= 4).then_some((children, children + 1));

    let mut labels = SignMatrix::new(k);
    let mut row = vec![-1i8; k];
    for i in 0..n {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = if rng.random::<f64>() < sigmoid(bias[j] + scores[j][i]) {
                1
            } else {
                -1
            };
        }
        for c in first_child..k {
            if row[c] > 0 {
                row[c - first_child] = 1;
            }
        }
        if let Some((a, b)) = exclusive {
            if row[a] > 0 && row[b] > 0 {
                let drop = if scores[a][i] + bias[a] >= scores[b][i] + bias[b] {
                    b
                } else {
                    a
                };
                row[drop] = -1;
            }
        }
        labels.push_row(&row)?;
    }
    let features = xs.iter().map(|x| SparseVector::from_dense(x)).collect();
    MultiLabelDataset::new(features, labels, d)
}

/// Greedily removes instances until the MeanIR is within `tolerance` of
/// `target`.
///
/// Instances with identical label rows are interchangeable for MeanIR, so
/// each step scores one removal per distinct row and takes the one landing
/// closest to the target, drawing the concrete instance at random. A removal
/// that would leave a label with no positives is never taken. Fails with the
/// closest MeanIR reached once no removal gets closer.
pub fn subsample_to_mean_ir(
    base: &MultiLabelDataset,
    target: f64,
    tolerance: f64,
    seed: u64,
) -> Result<MultiLabelDataset> {
    let mut counts = base.labels().positive_counts();
    let mut current = mean_ir_from_counts(&counts)
        .value
        .ok_or_else(|| Error::Data("no label has positive support".into()))?;
    if (current - target).abs() <= tolerance {
        return Ok(base.clone());
    }

    let mut groups: BTreeMap<Vec<i8>, Vec<usize>> = BTreeMap::new();
    for i in 0..base.len() {
        groups.entry(base.label_row(i).to_vec()).or_default().push(i);
    }
    let mut rng = rng::rng_for(seed, &[stream::SYNTHETIC, 1]);
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
    }

    let keys: Vec<Vec<i8>> = groups
        .keys()
        .filter(|row| row.iter().any(|&v| v > 0))
        .cloned()
        .collect();
    let mut removed = vec![false; base.len()];
    let mut trial = counts.clone();
    loop {
        let gap = (current - target).abs();
        let available = |g: usize, need: usize| groups[&keys[g]].len() >= need;
        // single removals first; pairs only when no single one helps, which
        // happens when two labels tie for the largest count
        let mut best = best_move(
            &keys,
            &counts,
            &mut trial,
            target,
            gap,
            (0..keys.len()).filter(|&g| available(g, 1)).map(|g| vec![g]),
        );
        if best.is_none() {
            let pairs = (0..keys.len()).flat_map(|a| (a..keys.len()).map(move |b| (a, b)));
            let pairs = pairs
                .filter(|&(a, b)| {
                    if a == b {
                        available(a, 2)
                    } else {
                        available(a, 1) && available(b, 1)
                    }
                })
                .map(|(a, b)| vec![a, b]);
            best = best_move(&keys, &counts, &mut trial, target, gap, pairs);
        }
        let Some((moves, m)) = best else {
            return Err(Error::UnreachableTarget {
                target,
                closest: current,
            });
        };
        for g in moves {
            let row = &keys[g];
            let i = groups.get_mut(row).and_then(Vec::pop).expect("group is non-empty");
            removed[i] = true;
            for (c, &v) in counts.iter_mut().zip(row) {
                if v > 0 {
                    *c -= 1;
                }
            }
        }
        current = m;
        if (current - target).abs() <= tolerance {
            break;
        }
    }
    let kept: Vec<usize> = (0..base.len()).filter(|&i| !removed[i]).collect();
    base.subset(&kept)
}

/// The removal among `moves` (each a list of label-row groups, one instance
/// from each) whose MeanIR lands closest to `target`, if any beats `gap`.
/// Removals that would empty a label are skipped.
fn best_move(
    keys: &[Vec<i8>],
    counts: &[usize],
    trial: &mut [usize],
    target: f64,
    gap: f64,
    moves: impl Iterator<Item = Vec<usize>>,
) -> Option<(Vec<usize>, f64)> {
    let mut best = None;
    let mut best_gap = gap;
    'moves: for mv in moves {
        trial.copy_from_slice(counts);
        for &g in &mv {
            for (t, &v) in trial.iter_mut().zip(&keys[g]) {
                if v > 0 {
                    if *t <= 1 {
                        continue 'moves;
                    }
                    *t -= 1;
                }
            }
        }
        let Some(m) = mean_ir_from_counts(trial).value else {
            continue;
        };
        let gap = (m - target).abs();
        if gap < best_gap {
            best_gap = gap;
            best = Some((mv, m));
        }
    }
    best
}

/// Base pool (loaded or generated) subsampled to the target MeanIR.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiLabelDataset> {
    spec.validate()?;
    let base = match &spec.base {
        Some(path) => MultiLabelDataset::load(path)?,
        None => generate_base(spec)?,
    };
    subsample_to_mean_ir(&base, spec.target_mean_ir, spec.tolerance, spec.seed)
}
