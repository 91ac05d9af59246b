//! Positive and negative label-correlation matrices over the labelled pool.
//!
//! `A(m,n)` is the fraction of instances carrying label `n` that also carry
//! `m`; `NegA(m,n)` is the fraction that do not. Integer counts are the
//! persistent state so incremental updates reproduce a full rebuild exactly.
//! Columns of labels never seen positive are zero off the diagonal.

use serde::{Deserialize, Serialize};

use crate::dataset::SignMatrix;
use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrices {
    /// `pos_counts[m][n]`: instances with both `m` and `n` positive.
    pos_counts: Vec<Vec<u64>>,
    /// Instances with label `n` positive.
    label_counts: Vec<u64>,
    positive: SquareMatrix,
    negative: SquareMatrix,
}

impl CorrelationMatrices {
    /// Empty counts over `k` labels.
    pub fn empty(k: usize) -> Self {
        let mut m = CorrelationMatrices {
            pos_counts: vec![vec![0; k]; k],
            label_counts: vec![0; k],
            positive: SquareMatrix::identity(k),
            negative: SquareMatrix::zeros(k),
        };
        m.recompute();
        m
    }

    pub fn build(labels: &SignMatrix) -> Self {
        let mut m = CorrelationMatrices::empty(labels.cols());
        m.accumulate(labels);
        m.recompute();
        m
    }

    /// Adds a batch of newly labelled rows.
    pub fn update(&mut self, labels: &SignMatrix) -> Result<()> {
        if labels.cols() != self.num_labels() {
            return Err(Error::dim(self.num_labels(), labels.cols()));
        }
        if labels.rows() > 0 {
            self.accumulate(labels);
            self.recompute();
        }
        Ok(())
    }

    fn accumulate(&mut self, labels: &SignMatrix) {
        let mut present = Vec::with_capacity(labels.cols());
        for row in labels.iter_rows() {
            present.clear();
            present.extend(row.iter().enumerate().filter(|(_, &v)| v > 0).map(|(k, _)| k));
            for &n in &present {
                self.label_counts[n] += 1;
                for &m in &present {
                    self.pos_counts[m][n] += 1;
                }
            }
        }
    }

    fn recompute(&mut self) {
        let k = self.num_labels();
        for n in 0..k {
            let support = self.label_counts[n];
            for m in 0..k {
                if m == n {
                    self.positive.set(m, n, 1.0);
                    self.negative.set(m, n, 0.0);
                } else if support == 0 {
                    self.positive.set(m, n, 0.0);
                    self.negative.set(m, n, 0.0);
                } else {
                    let both = self.pos_counts[m][n];
                    self.positive.set(m, n, both as f64 / support as f64);
                    self.negative.set(m, n, (support - both) as f64 / support as f64);
                }
            }
        }
    }

    pub fn num_labels(&self) -> usize {
        self.label_counts.len()
    }

    /// Positive correlation matrix `A`.
    pub fn positive(&self) -> &SquareMatrix {
        &self.positive
    }

    /// Negative correlation matrix `NegA`.
    pub fn negative(&self) -> &SquareMatrix {
        &self.negative
    }

    pub fn label_counts(&self) -> &[u64] {
        &self.label_counts
    }

    pub fn pair_count(&self, m: usize, n: usize) -> u64 {
        self.pos_counts[m][n]
    }
}

/// z-score multipliers for the pair thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdPolicy {
    /// Positive-matrix cut is `mean + asym_z · std` of the off-diagonal entries.
    pub asym_z: f64,
    /// Negative-matrix cut is `mean + excl_z · std`, clamped to 1.
    pub excl_z: f64,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy {
            asym_z: 1.0,
            excl_z: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairThresholds {
    pub asym_cut: f64,
    pub excl_cut: f64,
    /// Standard deviation of the off-diagonal entries of `A`.
    pub sigma: f64,
    /// Standard deviation of the off-diagonal entries of `NegA`.
    pub neg_sigma: f64,
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl PairThresholds {
    pub fn from_matrices(positive: &SquareMatrix, negative: &SquareMatrix, policy: ThresholdPolicy) -> Self {
        let (pm, ps) = mean_std(positive.off_diagonal());
        let (nm, ns) = mean_std(negative.off_diagonal());
        PairThresholds {
            asym_cut: pm + policy.asym_z * ps,
            excl_cut: (nm + policy.excl_z * ns).min(1.0),
            sigma: ps,
            neg_sigma: ns,
        }
    }
}

/// Ordered pairs `(m, n)` where `n`'s presence implies `m` but not the
/// reverse: `A(m,n) > cut` and `A(n,m) <= cut`. `m` is the independent label.
pub fn asymmetric_pairs_with_cut(a: &SquareMatrix, cut: f64) -> Vec<(usize, usize)> {
    let k = a.size();
    let mut pairs = Vec::new();
    for m in 0..k {
        for n in 0..k {
            if m != n && a.get(m, n) > cut && a.get(n, m) <= cut {
                pairs.push((m, n));
            }
        }
    }
    pairs
}

pub fn asymmetric_pairs(a: &SquareMatrix, policy: ThresholdPolicy) -> Vec<(usize, usize)> {
    if a.size() < 2 {
        return Vec::new();
    }
    let (mean, std) = mean_std(a.off_diagonal());
    asymmetric_pairs_with_cut(a, mean + policy.asym_z * std)
}

/// Unordered pairs `(m, n)`, `m < n`, whose negative correlation exceeds the
/// cut in both directions. When the cut sits at its ceiling of 1, entries
/// equal to 1 (labels never seen together) count as exceeding it.
pub fn exclusive_pairs_with_cut(neg: &SquareMatrix, cut: f64) -> Vec<(usize, usize)> {
    let k = neg.size();
    let cut = cut.min(1.0);
    let exceeds = |v: f64| v > cut || (cut >= 1.0 && v >= 1.0);
    let mut pairs = Vec::new();
    for m in 0..k {
        for n in m + 1..k {
            if exceeds(neg.get(m, n)) && exceeds(neg.get(n, m)) {
                pairs.push((m, n));
            }
        }
    }
    pairs
}

pub fn exclusive_pairs(neg: &SquareMatrix, policy: ThresholdPolicy) -> Vec<(usize, usize)> {
    if neg.size() < 2 {
        return Vec::new();
    }
    let (mean, std) = mean_std(neg.off_diagonal());
    exclusive_pairs_with_cut(neg, mean + policy.excl_z * std)
}
