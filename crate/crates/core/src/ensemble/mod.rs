//! Probabilistic multi-label classifiers and Bayesian ensembles over them.
//!
//! An [`Ensemble`] holds `E` independently trained members and a posterior
//! weight per member. Observing a (hypothetical) label vector `y` for an
//! instance `x` reweights the members by their likelihood of `y`:
//!
//! ```text
//! P(θ | L, (x,y)) ∝ P(θ | L) · P(y | θ, x)
//! ```
//!
//! where `P(y | θ, x)` factorises over labels as a product of Bernoullis.
//! Predictions at another point `x'` are the weighted average of member
//! probabilities under whichever weights are in force.

mod logistic;

pub use logistic::{fit_logistic, LogisticConfig, OneVsRestLogistic};

use crate::dataset::{SignMatrix, SparseVector};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rng::{self, stream};

/// A trained model producing per-label probabilities in `[0, 1]`.
pub trait Classifier: Send + Sync {
    fn num_labels(&self) -> usize;

    /// Writes one probability per label into `out` (length `num_labels`).
    fn predict_proba_into(&self, x: &SparseVector, out: &mut [f64]);

    fn predict_proba(&self, x: &SparseVector) -> Vec<f64> {
        let mut out = vec![0.0; self.num_labels()];
        self.predict_proba_into(x, &mut out);
        out
    }
}

/// Trains a fresh classifier from a seed-derived random initialisation.
pub trait ClassifierFactory: Send + Sync {
    fn fit(&self, xs: &[&SparseVector], ys: &SignMatrix, feature_dim: usize, seed: u64) -> Result<Box<dyn Classifier>>;
}

/// Member probabilities for one instance, `E × K` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberProbs {
    members: usize,
    labels: usize,
    data: Vec<f64>,
}

impl MemberProbs {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let labels = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * labels);
        for r in rows {
            assert_eq!(r.len(), labels, "ragged member probabilities");
            data.extend_from_slice(r);
        }
        MemberProbs {
            members: rows.len(),
            labels,
            data,
        }
    }

    pub fn members(&self) -> usize {
        self.members
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    #[inline]
    pub fn member(&self, e: usize) -> &[f64] {
        &self.data[e * self.labels..(e + 1) * self.labels]
    }

    #[inline]
    pub fn get(&self, e: usize, k: usize) -> f64 {
        self.data[e * self.labels + k]
    }

    /// `Σ_e w_e · p_e` into `out`.
    #[inline]
    pub fn mix_into(&self, weights: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, &w) in weights.iter().enumerate() {
            for (o, &p) in out.iter_mut().zip(self.member(e)) {
                *o += w * p;
            }
        }
        // guard against rounding just outside [0, 1]
        out.iter_mut().for_each(|o| *o = o.clamp(0.0, 1.0));
    }

    pub fn mix(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.labels];
        self.mix_into(weights, &mut out);
        out
    }

    /// `P(y | θ_e, x) = Π_k (p_e^k if y^k = +1 else 1 - p_e^k)`.
    pub fn likelihood(&self, e: usize, y: &[i8]) -> f64 {
        self.member(e)
            .iter()
            .zip(y)
            .map(|(&p, &v)| if v > 0 { p } else { 1.0 - p })
            .product()
    }
}

/// Normalises `prior_e · likelihood_e`; falls back to the prior when every
/// likelihood is zero.
pub fn normalize_posterior(prior: &[f64], likelihoods: impl Iterator<Item = f64>, out: &mut [f64]) {
    let mut total = 0.0;
    for ((o, &w), l) in out.iter_mut().zip(prior).zip(likelihoods) {
        *o = w * l;
        total += *o;
    }
    if total > 0.0 && total.is_finite() {
        out.iter_mut().for_each(|o| *o /= total);
    } else {
        out.copy_from_slice(prior);
    }
}

/// Posterior member weights after observing the full label vector `y` at the
/// instance whose member probabilities are `probs`.
pub fn reweight_posterior(prior: &[f64], probs: &MemberProbs, y: &[i8]) -> Vec<f64> {
    let mut out = vec![0.0; prior.len()];
    normalize_posterior(prior, (0..probs.members()).map(|e| probs.likelihood(e, y)), &mut out);
    out
}

/// Posterior member weights after observing only label `label` with sign `y`.
pub fn reweight_single_label(prior: &[f64], probs: &MemberProbs, label: usize, y: i8, out: &mut [f64]) {
    let lik = (0..probs.members()).map(|e| {
        let p = probs.get(e, label);
        if y > 0 {
            p
        } else {
            1.0 - p
        }
    });
    normalize_posterior(prior, lik, out);
}

/// Weighted member-probability average at `x'` under `weights`.
pub fn predictive_after(probs_at_anchor: &MemberProbs, weights: &[f64]) -> Vec<f64> {
    probs_at_anchor.mix(weights)
}

/// Sign vector `+1` where the probability strictly exceeds 0.5.
pub fn threshold_signs(p: &[f64]) -> Vec<i8> {
    p.iter().map(|&v| if v > 0.5 { 1 } else { -1 }).collect()
}

pub struct Ensemble {
    members: Vec<Box<dyn Classifier>>,
    weights: Vec<f64>,
}

impl std::fmt::Debug for Ensemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ensemble")
            .field("members", &self.members.len())
            .field("weights", &self.weights)
            .finish()
    }
}

impl Ensemble {
    /// Uniform weights over `members`.
    pub fn from_members(members: Vec<Box<dyn Classifier>>) -> Result<Self> {
        let e = members.len();
        Ensemble::with_weights(members, vec![1.0 / e as f64; e])
    }

    pub fn with_weights(members: Vec<Box<dyn Classifier>>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("ensemble needs at least one member".into()));
        }
        if weights.len() != members.len() {
            return Err(Error::dim(members.len(), weights.len()));
        }
        let k = members[0].num_labels();
        if let Some(m) = members.iter().find(|m| m.num_labels() != k) {
            return Err(Error::dim(k, m.num_labels()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::Config(format!(
                "ensemble weights must be a probability vector (sum {sum})"
            )));
        }
        Ok(Ensemble { members, weights })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn num_labels(&self) -> usize {
        self.members[0].num_labels()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn members(&self) -> &[Box<dyn Classifier>] {
        &self.members
    }

    pub fn member_probs(&self, x: &SparseVector) -> MemberProbs {
        let k = self.num_labels();
        let mut data = vec![0.0; self.size() * k];
        for (m, chunk) in self.members.iter().zip(data.chunks_mut(k)) {
            m.predict_proba_into(x, chunk);
        }
        MemberProbs {
            members: self.size(),
            labels: k,
            data,
        }
    }

    pub fn member_probs_batch(&self, xs: &[&SparseVector], exec: Execution) -> Vec<MemberProbs> {
        exec.map(xs, |x| self.member_probs(x))
    }

    /// `P(y | x, L) ≈ Σ_e w_e · P(y | x, θ_e)`.
    pub fn posterior_predictive(&self, x: &SparseVector) -> Vec<f64> {
        self.member_probs(x).mix(&self.weights)
    }

    /// Thresholded ensemble predictions, one row per instance.
    pub fn pseudo_labels(&self, xs: &[&SparseVector], exec: Execution) -> SignMatrix {
        let rows = exec.map(xs, |x| threshold_signs(&self.posterior_predictive(x)));
        SignMatrix::from_rows(self.num_labels(), &rows).expect("threshold_signs yields ±1 rows of width K")
    }
}

/// Trains `size` members on the full labelled set, each from its own
/// seed-derived initialisation; weights are uniform.
pub fn train_ensemble(
    xs: &[&SparseVector],
    ys: &SignMatrix,
    feature_dim: usize,
    size: usize,
    factory: &dyn ClassifierFactory,
    seed: u64,
    exec: Execution,
) -> Result<Ensemble> {
    if size == 0 {
        return Err(Error::Config("ensemble.size must be >= 1".into()));
    }
    if xs.is_empty() {
        return Err(Error::Training("labeled pool is empty".into()));
    }
    let members = exec.map_range(size, |e| {
        factory.fit(xs, ys, feature_dim, rng::derive_seed(seed, &[stream::MEMBER, e as u64]))
    });
    Ensemble::from_members(members.into_iter().collect::<Result<Vec<_>>>()?)
}
