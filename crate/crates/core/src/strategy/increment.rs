//! Expected score increments at anchor points.
//!
//! For a candidate `x` and anchor `x'` the increment is
//!
//! ```text
//! E_{y ~ P(y|L,x)} [ S_AB(P(·|L,(x,y),x'), y') - S_AB(P(·|L,x'), y') ]
//! ```
//!
//! with the ensemble reweighted by the hypothetical label `y` of `x`, and
//! `y'` the anchor's pseudo label. In per-label mode each label of `x` is
//! toggled on its own and weighted by its marginal predictive probability;
//! the contributions are summed over labels. Joint mode enumerates all `2^K`
//! label vectors under the ensemble's joint predictive.

use crate::dataset::SparseVector;
use crate::ensemble::{normalize_posterior, reweight_single_label, threshold_signs, Ensemble, MemberProbs};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scoring::{ab_score_unchecked, AttentionMatrix, BetaLoss};

/// Largest label space accepted for joint enumeration.
pub const MAX_JOINT_LABELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementMode {
    PerLabel,
    Joint,
}

/// One candidate's increments, one entry per anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub index: usize,
    pub increments: Vec<f64>,
}

/// Anchors with everything that does not depend on the candidate
/// precomputed: member probabilities, prior predictive, pseudo-label
/// targets and the prior score.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    indices: Vec<usize>,
    probs: Vec<MemberProbs>,
    targets: Vec<Vec<i8>>,
    before: Vec<f64>,
}

impl AnchorSet {
    pub fn new(
        ensemble: &Ensemble,
        indices: Vec<usize>,
        features: &[&SparseVector],
        attention: &AttentionMatrix,
        loss: &BetaLoss,
        exec: Execution,
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Config("anchor set is empty".into()));
        }
        if indices.len() != features.len() {
            return Err(Error::dim(indices.len(), features.len()));
        }
        let probs = ensemble.member_probs_batch(features, exec);
        Ok(AnchorSet::from_probs(
            indices,
            probs,
            ensemble.weights(),
            attention,
            loss,
        ))
    }

    /// Builds the set from member probabilities directly.
    pub fn from_probs(
        indices: Vec<usize>,
        probs: Vec<MemberProbs>,
        prior: &[f64],
        attention: &AttentionMatrix,
        loss: &BetaLoss,
    ) -> Self {
        let mut targets = Vec::with_capacity(probs.len());
        let mut before = Vec::with_capacity(probs.len());
        for p in &probs {
            let q = p.mix(prior);
            let y = threshold_signs(&q);
            before.push(ab_score_unchecked(&q, &y, attention.column_weights(), loss));
            targets.push(y);
        }
        AnchorSet {
            indices,
            probs,
            targets,
            before,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn targets(&self) -> &[Vec<i8>] {
        &self.targets
    }
}

struct Scratch {
    weights: Vec<f64>,
    q: Vec<f64>,
}

/// Increment vector of one candidate over `anchors`.
///
/// `candidate_index` is the candidate's dataset index; an anchor that is the
/// candidate itself contributes 0.
pub fn expected_score_increment(
    candidate: &MemberProbs,
    candidate_index: usize,
    prior: &[f64],
    anchors: &AnchorSet,
    attention: &AttentionMatrix,
    loss: &BetaLoss,
    mode: IncrementMode,
) -> Result<Vec<f64>> {
    if anchors.is_empty() {
        return Err(Error::Config("anchor set is empty".into()));
    }
    let k = candidate.labels();
    if attention.size() != k {
        return Err(Error::dim(k, attention.size()));
    }
    let weights_col = attention.column_weights();
    let mut out = vec![0.0; anchors.len()];
    let mut scratch = Scratch {
        weights: vec![0.0; prior.len()],
        q: vec![0.0; k],
    };
    // an unchanged posterior leaves every anchor score as it was
    let mut add = |mass: f64, w: &[f64], q: &mut [f64]| {
        if w == prior || mass == 0.0 {
            return;
        }
        for (a, o) in out.iter_mut().enumerate() {
            anchors.probs[a].mix_into(w, q);
            let after = ab_score_unchecked(q, &anchors.targets[a], weights_col, loss);
            *o += mass * (after - anchors.before[a]);
        }
    };

    match mode {
        IncrementMode::PerLabel => {
            let marginal = candidate.mix(prior);
            for (j, &pj) in marginal.iter().enumerate() {
                for (v, mass) in [(1i8, pj), (-1i8, 1.0 - pj)] {
                    reweight_single_label(prior, candidate, j, v, &mut scratch.weights);
                    add(mass, &scratch.weights, &mut scratch.q);
                }
            }
        }
        IncrementMode::Joint => {
            if k > MAX_JOINT_LABELS {
                return Err(Error::Config(format!(
                    "joint label enumeration supports K <= {MAX_JOINT_LABELS}, got {k}"
                )));
            }
            let mut y = vec![-1i8; k];
            let mut lik = vec![0.0; prior.len()];
            for mask in 0u32..(1u32 << k) {
                for (j, v) in y.iter_mut().enumerate() {
                    *v = if mask >> j & 1 == 1 { 1 } else { -1 };
                }
                for (e, l) in lik.iter_mut().enumerate() {
                    *l = candidate.likelihood(e, &y);
                }
                // P(y | L, x) = Σ_e w_e P(y | θ_e, x)
                let mass: f64 = prior.iter().zip(&lik).map(|(w, l)| w * l).sum();
                normalize_posterior(prior, lik.iter().copied(), &mut scratch.weights);
                add(mass, &scratch.weights, &mut scratch.q);
            }
        }
    }
    for (o, &a) in out.iter_mut().zip(&anchors.indices) {
        if a == candidate_index {
            *o = 0.0;
        }
    }
    Ok(out)
}

/// Scores every candidate against the same anchors. Output order follows
/// `candidates`.
#[allow(clippy::too_many_arguments)]
pub fn score_candidates(
    ensemble: &Ensemble,
    candidates: &[usize],
    features: &[&SparseVector],
    anchors: &AnchorSet,
    attention: &AttentionMatrix,
    loss: &BetaLoss,
    mode: IncrementMode,
    exec: Execution,
) -> Result<Vec<ScoreVector>> {
    if candidates.len() != features.len() {
        return Err(Error::dim(candidates.len(), features.len()));
    }
    let prior = ensemble.weights();
    exec.map_range(candidates.len(), |i| {
        let probs = ensemble.member_probs(features[i]);
        expected_score_increment(&probs, candidates[i], prior, anchors, attention, loss, mode).map(|increments| {
            ScoreVector {
                index: candidates[i],
                increments,
            }
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::scoring::{ab_score, BetaParams};

    fn loss() -> BetaLoss {
        BetaLoss::new(BetaParams::default()).unwrap()
    }

    fn anchors(rows: &[Vec<Vec<f64>>], prior: &[f64], att: &AttentionMatrix) -> AnchorSet {
        let probs = rows.iter().map(|r| MemberProbs::from_rows(r)).collect();
        AnchorSet::from_probs((100..100 + rows.len()).collect(), probs, prior, att, &loss())
    }

    #[test]
    fn single_member_gives_zero() {
        let att = AttentionMatrix::identity(2);
        let set = anchors(&[vec![vec![0.3, 0.8]]], &[1.0], &att);
        let cand = MemberProbs::from_rows(&[vec![0.6, 0.2]]);
        for mode in [IncrementMode::PerLabel, IncrementMode::Joint] {
            let inc = expected_score_increment(&cand, 0, &[1.0], &set, &att, &loss(), mode).unwrap();
            assert_eq!(inc, vec![0.0]);
        }
    }

    #[test]
    fn per_label_matches_brute_force() {
        let att = AttentionMatrix::identity(2);
        let prior = [0.5, 0.5];
        let anchor = vec![vec![0.2, 0.9], vec![0.7, 0.4]];
        let set = anchors(std::slice::from_ref(&anchor), &prior, &att);
        let cand = MemberProbs::from_rows(&[vec![0.9, 0.1], vec![0.3, 0.6]]);
        let l = loss();
        let params = BetaParams::default();

        let mix = |w: &[f64]| -> Vec<f64> { (0..2).map(|k| w[0] * anchor[0][k] + w[1] * anchor[1][k]).collect() };
        let before = mix(&prior);
        let target = threshold_signs(&before);
        let s0 = ab_score(&before, &target, &att, params).unwrap();
        let c = [[0.9, 0.1], [0.3, 0.6]];
        let mut want = 0.0;
        for j in 0..2 {
            let pj = 0.5 * c[0][j] + 0.5 * c[1][j];
            for (v, mass) in [(1, pj), (-1, 1.0 - pj)] {
                let lik: Vec<f64> = (0..2).map(|e| if v == 1 { c[e][j] } else { 1.0 - c[e][j] }).collect();
                let z = 0.5 * lik[0] + 0.5 * lik[1];
                let w = [0.5 * lik[0] / z, 0.5 * lik[1] / z];
                want += mass * (ab_score(&mix(&w), &target, &att, params).unwrap() - s0);
            }
        }
        let got = expected_score_increment(&cand, 0, &prior, &set, &att, &l, IncrementMode::PerLabel).unwrap();
        assert!((got[0] - want).abs() < 1e-12, "{} vs {want}", got[0]);
    }

    #[test]
    fn candidate_anchor_is_zeroed() {
        let att = AttentionMatrix::identity(2);
        let prior = [0.5, 0.5];
        let row = vec![vec![0.9, 0.1], vec![0.2, 0.7]];
        let set = anchors(&[row.clone(), row.clone()], &prior, &att);
        let cand = MemberProbs::from_rows(&row);
        let inc = expected_score_increment(&cand, 100, &prior, &set, &att, &loss(), IncrementMode::Joint).unwrap();
        assert_eq!(inc[0], 0.0);
        assert!(inc[1] != 0.0);
    }

    #[test]
    fn joint_rejects_wide_label_space() {
        let k = MAX_JOINT_LABELS + 1;
        let att = AttentionMatrix::identity(k);
        let set = anchors(&[vec![vec![0.5; k]]], &[1.0], &att);
        let cand = MemberProbs::from_rows(&[vec![0.5; k]]);
        assert!(matches!(
            expected_score_increment(&cand, 0, &[1.0], &set, &att, &loss(), IncrementMode::Joint),
            Err(Error::Config(_))
        ));
    }
}
