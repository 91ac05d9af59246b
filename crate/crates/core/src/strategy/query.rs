//! Query rounds: CRAB, the BESRA-style baseline and random sampling.

use rand::seq::IndexedRandom;

use super::increment::{score_candidates, AnchorSet, IncrementMode};
use super::kmeans::{select_batch_with, KMeansOptions};
use super::refine::{build_refined_pool, RefinedPool};
use super::AcquisitionConfig;
use crate::correlation::{asymmetric_pairs, exclusive_pairs, CorrelationMatrices};
use crate::dataset::MultiLabelDataset;
use crate::ensemble::{train_ensemble, ClassifierFactory, Ensemble};
use crate::error::{Error, Result};
use crate::pool::PoolState;
use crate::rng::{self, stream};
use crate::scoring::{AttentionMatrix, BetaLoss};

/// Seed shared by every random draw of one round.
fn round_seed(seed: u64, iteration: usize) -> u64 {
    rng::derive_seed(seed, &[iteration as u64])
}

fn sample_sorted(items: &[usize], n: usize, seed: u64, tag: u64) -> Vec<usize> {
    if n >= items.len() {
        return items.to_vec();
    }
    let mut rng = rng::rng_for(seed, &[tag]);
    let mut out: Vec<usize> = items.choose_multiple(&mut rng, n).copied().collect();
    out.sort_unstable();
    out
}

/// Candidates scored when refinement is off: all of `unlabeled`, or a
/// uniform subsample of `pool_size` when that is nonzero.
pub fn draw_candidates(unlabeled: &[usize], pool_size: usize, seed: u64) -> Vec<usize> {
    if pool_size == 0 {
        return unlabeled.to_vec();
    }
    sample_sorted(unlabeled, pool_size, seed, stream::CANDIDATES)
}

/// Uniform subsample of `n` anchor points, ascending.
pub fn draw_anchors(unlabeled: &[usize], n: usize, seed: u64) -> Vec<usize> {
    sample_sorted(unlabeled, n, seed, stream::ANCHORS)
}

/// Outcome of one selection round.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Dataset indices to annotate, in selection order.
    pub batch: Vec<usize>,
    /// The refined pool, when refinement ran.
    pub refined: Option<RefinedPool>,
}

fn score_and_select(
    dataset: &MultiLabelDataset,
    ensemble: &Ensemble,
    candidates: &[usize],
    anchors: Vec<usize>,
    attention: &AttentionMatrix,
    config: &AcquisitionConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    if candidates.is_empty() || config.budget.batch == 0 {
        return Ok(Vec::new());
    }
    let exec = config.execution;
    let loss = BetaLoss::new(config.scoring.params())?;
    let anchor_features = dataset.feature_rows(&anchors);
    let anchors = AnchorSet::new(ensemble, anchors, &anchor_features, attention, &loss, exec)?;
    let mode = if config.strategy.joint_labels {
        IncrementMode::Joint
    } else {
        IncrementMode::PerLabel
    };
    let features = dataset.feature_rows(candidates);
    let scores = score_candidates(ensemble, candidates, &features, &anchors, attention, &loss, mode, exec)?;
    let vectors: Vec<Vec<f64>> = scores.into_iter().map(|s| s.increments).collect();
    let picked = select_batch_with(&vectors, config.budget.batch, seed, KMeansOptions::default(), exec);
    Ok(picked.into_iter().map(|p| candidates[p]).collect())
}

fn check_round(state: &PoolState, dataset: &MultiLabelDataset, ensemble: &Ensemble) -> Result<()> {
    if ensemble.num_labels() != dataset.num_labels() {
        return Err(Error::dim(dataset.num_labels(), ensemble.num_labels()));
    }
    if state.labeled().is_empty() {
        return Err(Error::Training("labeled pool is empty".into()));
    }
    Ok(())
}

/// One CRAB selection against a trained ensemble and the current
/// correlation matrices. Does not touch the pools.
pub fn crab_select(
    state: &PoolState,
    dataset: &MultiLabelDataset,
    ensemble: &Ensemble,
    matrices: &CorrelationMatrices,
    config: &AcquisitionConfig,
    seed: u64,
) -> Result<Selection> {
    config.validate()?;
    check_round(state, dataset, ensemble)?;
    let seed = round_seed(seed, state.iteration);
    let unlabeled = state.unlabeled();
    if unlabeled.is_empty() {
        return Ok(Selection {
            batch: Vec::new(),
            refined: None,
        });
    }
    let k = dataset.num_labels();
    let attention = if config.strategy.attention {
        AttentionMatrix::from_positive(matrices.positive(), config.scoring.gamma)?
    } else {
        AttentionMatrix::identity(k)
    };
    let (candidates, refined) = if config.strategy.refinement {
        let pseudo = ensemble.pseudo_labels(&dataset.feature_rows(unlabeled), config.execution);
        let asym = asymmetric_pairs(matrices.positive(), config.correlation);
        let excl = exclusive_pairs(matrices.negative(), config.correlation);
        let pool = build_refined_pool(unlabeled, &pseudo, &asym, &excl, &config.budget, state.iteration, seed);
        let mut indices = pool.indices.clone();
        indices.sort_unstable();
        (indices, Some(pool))
    } else {
        (draw_candidates(unlabeled, config.strategy.candidate_pool, seed), None)
    };
    let anchors = draw_anchors(unlabeled, config.strategy.anchors, seed);
    let batch = score_and_select(dataset, ensemble, &candidates, anchors, &attention, config, seed)?;
    Ok(Selection { batch, refined })
}

/// Scores the unrefined candidate pool with identity attention and no
/// correlation information.
pub fn besra_style_query(
    state: &PoolState,
    dataset: &MultiLabelDataset,
    ensemble: &Ensemble,
    config: &AcquisitionConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    config.validate()?;
    check_round(state, dataset, ensemble)?;
    let seed = round_seed(seed, state.iteration);
    let unlabeled = state.unlabeled();
    if unlabeled.is_empty() {
        return Ok(Vec::new());
    }
    let candidates = draw_candidates(unlabeled, config.strategy.candidate_pool, seed);
    let anchors = draw_anchors(unlabeled, config.strategy.anchors, seed);
    let attention = AttentionMatrix::identity(dataset.num_labels());
    score_and_select(dataset, ensemble, &candidates, anchors, &attention, config, seed)
}

/// Uniform draw of `n` unlabelled indices, ascending.
pub fn random_query(state: &PoolState, n: usize, seed: u64) -> Vec<usize> {
    sample_sorted(
        state.unlabeled(),
        n,
        round_seed(seed, state.iteration),
        stream::RANDOM_QUERY,
    )
}

/// Full CRAB round: trains the ensemble on the labelled pool, selects,
/// annotates, folds the new labels into `matrices` and advances the
/// iteration counter.
pub fn crab_iteration(
    state: &mut PoolState,
    dataset: &MultiLabelDataset,
    matrices: &mut CorrelationMatrices,
    factory: &dyn ClassifierFactory,
    ensemble_size: usize,
    config: &AcquisitionConfig,
    seed: u64,
) -> Result<Selection> {
    let labeled = state.labeled().to_vec();
    let ensemble = train_ensemble(
        &dataset.feature_rows(&labeled),
        &dataset.label_matrix(&labeled),
        dataset.feature_dim(),
        ensemble_size,
        factory,
        rng::derive_seed(seed, &[stream::ENSEMBLE, state.iteration as u64]),
        config.execution,
    )?;
    let selection = crab_select(state, dataset, &ensemble, matrices, config, seed)?;
    state.annotate(&selection.batch)?;
    matrices.update(&dataset.label_matrix(&selection.batch))?;
    state.iteration += 1;
    Ok(selection)
}
