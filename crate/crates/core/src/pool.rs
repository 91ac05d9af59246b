//! Labelled / unlabelled / validation split for the acquisition loop.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{self, stream};

/// Mutable pool partition owned by one acquisition loop.
///
/// `unlabeled` and `validation` are kept sorted; `labeled` keeps acquisition
/// order (initial pool first, then each batch as it was annotated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    labeled: Vec<usize>,
    unlabeled: Vec<usize>,
    validation: Vec<usize>,
    pub iteration: usize,
}

impl PoolState {
    /// Uniform random disjoint split of `0..n`, deterministic under `seed`.
    pub fn split(n: usize, init_labeled: usize, validation: usize, seed: u64) -> Result<Self> {
        if init_labeled + validation > n {
            return Err(Error::Config(format!(
                "initial labeled ({init_labeled}) + validation ({validation}) exceeds dataset size {n}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::rng_for(seed, &[stream::SPLIT]));
        let mut labeled = order[..init_labeled].to_vec();
        let mut val = order[init_labeled..init_labeled + validation].to_vec();
        let mut unlabeled = order[init_labeled + validation..].to_vec();
        labeled.sort_unstable();
        val.sort_unstable();
        unlabeled.sort_unstable();
        Ok(PoolState {
            labeled,
            unlabeled,
            validation: val,
            iteration: 0,
        })
    }

    /// Explicit partition; fails if any index appears twice.
    pub fn from_parts(labeled: Vec<usize>, mut unlabeled: Vec<usize>, mut validation: Vec<usize>) -> Result<Self> {
        unlabeled.sort_unstable();
        validation.sort_unstable();
        let mut all: Vec<usize> = labeled.iter().chain(&unlabeled).chain(&validation).copied().collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("index {} appears in more than one pool", w[0])));
        }
        Ok(PoolState {
            labeled,
            unlabeled,
            validation,
            iteration: 0,
        })
    }

    pub fn labeled(&self) -> &[usize] {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &[usize] {
        &self.unlabeled
    }

    pub fn validation(&self) -> &[usize] {
        &self.validation
    }

    pub fn is_unlabeled(&self, index: usize) -> bool {
        self.unlabeled.binary_search(&index).is_ok()
    }

    /// Moves `indices` from the unlabelled to the labelled pool. The call is
    /// atomic: on error nothing moves. The iteration counter is left alone.
    pub fn annotate(&mut self, indices: &[usize]) -> Result<()> {
        let mut positions = Vec::with_capacity(indices.len());
        for &i in indices {
            let pos = self.unlabeled.binary_search(&i).map_err(|_| Error::InvalidQuery(i))?;
            positions.push(pos);
        }
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidQuery(self.unlabeled[w[0]]));
        }
        for &pos in sorted.iter().rev() {
            self.unlabeled.remove(pos);
        }
        self.labeled.extend_from_slice(indices);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn split_cardinalities() {
        let p = PoolState::split(10, 2, 3, 7).unwrap();
        assert_eq!(p.labeled().len(), 2);
        assert_eq!(p.unlabeled().len(), 5);
        assert_eq!(p.validation().len(), 3);
        let mut all: Vec<_> = p
            .labeled()
            .iter()
            .chain(p.unlabeled())
            .chain(p.validation())
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_deterministic() {
        assert_eq!(
            PoolState::split(10, 2, 3, 7).unwrap(),
            PoolState::split(10, 2, 3, 7).unwrap()
        );
        assert_ne!(
            PoolState::split(100, 10, 10, 7).unwrap(),
            PoolState::split(100, 10, 10, 8).unwrap()
        );
    }

    #[test]
    fn split_at_benchmark_scale() {
        let p = PoolState::split(24_891, 100, 1000, 1).unwrap();
        assert_eq!(p.unlabeled().len(), 23_791);
    }

    #[test]
    fn split_rejects_oversized_counts() {
        assert!(matches!(PoolState::split(10, 8, 3, 1), Err(Error::Config(_))));
    }

    #[test]
    fn annotate_moves_indices() {
        let mut p = PoolState::from_parts(vec![0], vec![1, 3, 5, 7], vec![]).unwrap();
        p.annotate(&[3, 5]).unwrap();
        assert_eq!(p.labeled(), &[0, 3, 5]);
        assert_eq!(p.unlabeled(), &[1, 7]);
    }

    #[test]
    fn annotate_empty_is_identity() {
        let mut p = PoolState::from_parts(vec![0], vec![1, 3], vec![2]).unwrap();
        let before = p.clone();
        p.annotate(&[]).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn annotate_rejects_labeled_index() {
        let mut p = PoolState::from_parts(vec![0], vec![1, 3], vec![]).unwrap();
        let before = p.clone();
        assert!(matches!(p.annotate(&[1, 0]), Err(Error::InvalidQuery(0))));
        assert_eq!(p, before);
        assert!(matches!(p.annotate(&[1, 1]), Err(Error::InvalidQuery(1))));
    }

    proptest! {
        #[test]
        fn partition_survives_annotation(
            n in 5usize..60, seed in any::<u64>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..6),
        ) {
            let mut p = PoolState::split(n, 1, 1, seed).unwrap();
            for pick in picks {
                if p.unlabeled().is_empty() { break; }
                let i = p.unlabeled()[pick.index(p.unlabeled().len())];
                p.annotate(&[i]).unwrap();
            }
            let mut all: Vec<_> = p.labeled().iter().chain(p.unlabeled()).chain(p.validation()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
