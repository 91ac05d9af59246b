//! Correlation-based refinement of the unlabelled pool.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::seq::IndexedRandom;

use super::{Decay, QueryBudget};
use crate::dataset::SignMatrix;
use crate::rng::{self, stream};

/// Drops the dependent label `n` from every row carrying both `m` and `n`,
/// for each asymmetric pair `(m, n)` in list order.
pub fn refine_pseudo_labels(pseudo: &SignMatrix, pairs: &[(usize, usize)]) -> SignMatrix {
    let mut out = pseudo.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        for &(m, n) in pairs {
            if row[m] > 0 && row[n] > 0 {
                row[n] = -1;
            }
        }
    }
    out
}

/// Uniform draw of up to `n` items, returned in ascending order.
fn draw_sorted(items: &[usize], n: usize, rng: &mut rng::Rng) -> Vec<usize> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut picked: Vec<usize> = items.choose_multiple(rng, n).copied().collect();
    picked.sort_unstable();
    picked
}

/// For each label, up to `per_label` uniformly drawn candidates whose refined
/// pseudo label is positive there. Rows of `refined` align with `candidates`.
/// The result is the per-label draws in label order with repeats removed.
pub fn sample_label_wise(candidates: &[usize], refined: &SignMatrix, per_label: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::rng_for(seed, &[stream::LABEL_WISE]);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for k in 0..refined.cols() {
        let eligible: Vec<usize> = candidates
            .iter()
            .enumerate()
            .filter(|(r, _)| refined.get(*r, k) > 0)
            .map(|(_, &i)| i)
            .collect();
        for i in draw_sorted(&eligible, per_label, &mut rng) {
            if seen.insert(i) {
                out.push(i);
            }
        }
    }
    out
}

fn has_conflict(row: &[i8], pairs: &[(usize, usize)]) -> bool {
    pairs.iter().any(|&(m, n)| row[m] > 0 && row[n] > 0)
}

/// Candidates whose pseudo labels switch on both members of an exclusive
/// pair, uniformly subsampled to at most `cap`.
pub fn sample_negative_conflicts(
    candidates: &[usize],
    pseudo: &SignMatrix,
    pairs: &[(usize, usize)],
    cap: usize,
    seed: u64,
) -> Vec<usize> {
    if pairs.is_empty() {
        return Vec::new();
    }
    let eligible: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(r, _)| has_conflict(pseudo.row(*r), pairs))
        .map(|(_, &i)| i)
        .collect();
    draw_sorted(&eligible, cap, &mut rng::rng_for(seed, &[stream::CONFLICT]))
}

/// Hard-to-learn budget at iteration `t` of `total`.
pub fn decay_size(z0: usize, t: usize, total: usize, decay: Decay, power: f64) -> usize {
    if total == 0 {
        return if t == 0 { z0 } else { 0 };
    }
    let frac = t.min(total) as f64 / total as f64;
    let factor = match decay {
        Decay::Polynomial => (1.0 - frac).powf(power),
        Decay::Linear => 1.0 - frac,
        Decay::Cosine => (1.0 + (PI * frac).cos()) / 2.0,
    };
    (z0 as f64 * factor).round() as usize
}

/// Up to `size` uniformly drawn candidates whose pseudo-label row is all
/// negative.
pub fn sample_hard(candidates: &[usize], pseudo: &SignMatrix, size: usize, seed: u64) -> Vec<usize> {
    if size == 0 {
        return Vec::new();
    }
    let eligible: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(r, _)| pseudo.row(*r).iter().all(|&v| v < 0))
        .map(|(_, &i)| i)
        .collect();
    draw_sorted(&eligible, size, &mut rng::rng_for(seed, &[stream::HARD]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    LabelWise,
    NegativeConflict,
    Hard,
    /// All three samplers came back empty and the whole pool was used.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPool {
    pub indices: Vec<usize>,
    pub provenance: Vec<Provenance>,
}

impl RefinedPool {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn count(&self, tag: Provenance) -> usize {
        self.provenance.iter().filter(|&&p| p == tag).count()
    }
}

/// Union of the label-wise, negative-conflict and hard-to-learn draws, with
/// the first provenance kept for repeated indices. Falls back to the whole
/// candidate list when the union is empty.
#[allow(clippy::too_many_arguments)]
pub fn build_refined_pool(
    candidates: &[usize],
    pseudo: &SignMatrix,
    asymmetric: &[(usize, usize)],
    exclusive: &[(usize, usize)],
    budget: &QueryBudget,
    iteration: usize,
    seed: u64,
) -> RefinedPool {
    let refined = refine_pseudo_labels(pseudo, asymmetric);
    let label_wise = sample_label_wise(candidates, &refined, budget.per_label, seed);
    let conflicts = sample_negative_conflicts(candidates, pseudo, exclusive, budget.per_label * pseudo.cols(), seed);
    let z = decay_size(
        budget.hard0,
        iteration,
        budget.iterations,
        budget.decay,
        budget.decay_power,
    );
    let hard = sample_hard(candidates, pseudo, z, seed);

    let mut seen = HashSet::new();
    let mut pool = RefinedPool {
        indices: Vec::new(),
        provenance: Vec::new(),
    };
    for (group, tag) in [
        (label_wise, Provenance::LabelWise),
        (conflicts, Provenance::NegativeConflict),
        (hard, Provenance::Hard),
    ] {
        for i in group {
            if seen.insert(i) {
                pool.indices.push(i);
                pool.provenance.push(tag);
            }
        }
    }
    if pool.is_empty() {
        log::warn!("refined pool is empty; scoring the full candidate list");
        pool.indices = candidates.to_vec();
        pool.provenance = vec![Provenance::Fallback; candidates.len()];
    }
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signs(rows: &[&[i8]]) -> SignMatrix {
        SignMatrix::from_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn refinement_drops_dependent_label() {
        let y = signs(&[&[1, 1], &[-1, 1], &[1, -1]]);
        let r = refine_pseudo_labels(&y, &[(0, 1)]);
        assert_eq!(r.row(0), &[1, -1]);
        assert_eq!(r.row(1), &[-1, 1]);
        assert_eq!(r.row(2), &[1, -1]);
        assert_eq!(refine_pseudo_labels(&y, &[]), y);
    }

    #[test]
    fn label_wise_one_per_label() {
        let y = signs(&[&[1, -1], &[-1, 1]]);
        let picked = sample_label_wise(&[10, 20], &y, 1, 3);
        assert_eq!(picked, vec![10, 20]);
        let none = signs(&[&[1, -1], &[1, -1]]);
        assert_eq!(sample_label_wise(&[10, 20], &none, 5, 3), vec![10, 20]);
    }

    #[test]
    fn label_wise_caps_per_label() {
        let rows: Vec<[i8; 2]> = (0..30).map(|_| [1, -1]).collect();
        let y = SignMatrix::from_rows(2, &rows).unwrap();
        let cands: Vec<usize> = (100..130).collect();
        let picked = sample_label_wise(&cands, &y, 7, 1);
        assert_eq!(picked.len(), 7);
        assert!(picked.iter().all(|i| cands.contains(i)));
    }

    #[test]
    fn conflicts() {
        let y = signs(&[&[1, 1, -1], &[1, -1, -1], &[-1, 1, 1]]);
        assert_eq!(sample_negative_conflicts(&[5, 6, 7], &y, &[(0, 1)], 10, 0), vec![5]);
        assert!(sample_negative_conflicts(&[5, 6, 7], &y, &[], 10, 0).is_empty());
        assert_eq!(
            sample_negative_conflicts(&[5, 6, 7], &y, &[(0, 1), (1, 2)], 1, 0).len(),
            1
        );
    }

    #[test]
    fn decay_boundaries() {
        for d in [Decay::Polynomial, Decay::Linear, Decay::Cosine] {
            assert_eq!(decay_size(300, 0, 10, d, 2.0), 300);
            assert_eq!(decay_size(300, 10, 10, d, 2.0), 0);
        }
        assert_eq!(decay_size(300, 5, 10, Decay::Polynomial, 2.0), 75);
        assert_eq!(decay_size(300, 5, 10, Decay::Linear, 2.0), 150);
        assert_eq!(decay_size(300, 5, 10, Decay::Cosine, 2.0), 150);
        assert_eq!(decay_size(40, 0, 0, Decay::Linear, 2.0), 40);
        assert_eq!(decay_size(40, 1, 0, Decay::Linear, 2.0), 0);
    }

    #[test]
    fn hard_samples() {
        let y = signs(&[&[-1, -1], &[1, -1], &[-1, -1]]);
        assert_eq!(sample_hard(&[0, 1, 2], &y, 10, 0), vec![0, 2]);
        assert!(sample_hard(&[0, 1, 2], &y, 0, 0).is_empty());
        assert_eq!(sample_hard(&[0, 1, 2], &y, 1, 0).len(), 1);
    }

    #[test]
    fn refined_pool_union_and_fallback() {
        let budget = QueryBudget {
            per_label: 1,
            hard0: 0,
            ..QueryBudget::default()
        };
        let none = signs(&[&[-1, -1], &[-1, -1]]);
        let pool = build_refined_pool(&[3, 4], &none, &[], &[], &budget, 0, 1);
        assert_eq!(pool.indices, vec![3, 4]);
        assert_eq!(pool.count(Provenance::Fallback), 2);

        // row 0 is label-wise and conflicting; row 2 is hard
        let budget = QueryBudget {
            per_label: 5,
            hard0: 5,
            ..QueryBudget::default()
        };
        let y = signs(&[&[1, 1], &[-1, 1], &[-1, -1]]);
        let pool = build_refined_pool(&[0, 1, 2], &y, &[], &[(0, 1)], &budget, 0, 1);
        assert_eq!(pool.indices, vec![0, 1, 2]);
        assert_eq!(
            pool.provenance,
            vec![Provenance::LabelWise, Provenance::LabelWise, Provenance::Hard]
        );
    }
}
