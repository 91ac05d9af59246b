//! Acquisition strategies.
//!
//! One CRAB round: train the ensemble on the labelled pool, refresh the
//! correlation matrices, pseudo-label the unlabelled pool, refine it into a
//! candidate subset (label-wise, negatively conflicted and hard-to-learn
//! instances), score every candidate by its expected attention-weighted
//! score increment at a set of anchor points, and keep the candidates
//! nearest the k-means centres of those increment vectors.
//!
//! The BESRA-style baseline runs the same scoring and clustering with identity
//! attention and no refinement; the random baseline samples uniformly.

mod increment;
mod kmeans;
mod query;
mod refine;

pub use increment::{expected_score_increment, score_candidates, AnchorSet, IncrementMode, ScoreVector};
pub use kmeans::{select_batch, select_batch_with, KMeansOptions};
pub use query::{
    besra_style_query, crab_iteration, crab_select, draw_anchors, draw_candidates, random_query, Selection,
};
pub use refine::{
    build_refined_pool, decay_size, refine_pseudo_labels, sample_hard, sample_label_wise, sample_negative_conflicts,
    Provenance, RefinedPool,
};

use serde::{Deserialize, Serialize};

use crate::correlation::ThresholdPolicy;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scoring::{BetaParams, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Decay {
    #[default]
    Polynomial,
    Linear,
    Cosine,
}

impl std::str::FromStr for Decay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polynomial" => Ok(Decay::Polynomial),
            "linear" => Ok(Decay::Linear),
            "cosine" => Ok(Decay::Cosine),
            other => Err(Error::Config(format!("unknown decay {other:?}"))),
        }
    }
}

/// Query sizes for one campaign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryBudget {
    /// Batch size per iteration.
    #[serde(rename = "N")]
    pub batch: usize,
    /// Per-label draw size for label-wise sampling.
    #[serde(rename = "N_label")]
    pub per_label: usize,
    /// Initial hard-to-learn draw size.
    #[serde(rename = "Z0")]
    pub hard0: usize,
    /// Total iterations.
    #[serde(rename = "T")]
    pub iterations: usize,
    pub decay: Decay,
    pub decay_power: f64,
}

impl Default for QueryBudget {
    fn default() -> Self {
        QueryBudget {
            batch: 20,
            per_label: 10,
            hard0: 50,
            iterations: 10,
            decay: Decay::Polynomial,
            decay_power: 2.0,
        }
    }
}

impl QueryBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay_power > 0.0 && self.decay_power.is_finite()) {
            return Err(Error::Config(format!(
                "budget.decay_power must be > 0, got {}",
                self.decay_power
            )));
        }
        Ok(())
    }
}

/// Switches and sizes of the scoring pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyOptions {
    /// Anchor points drawn from the unlabelled pool.
    pub anchors: usize,
    /// Correlation attention in the score; off means identity attention.
    pub attention: bool,
    /// Correlation-based pool refinement; off means every candidate from
    /// [`draw_candidates`] is scored.
    pub refinement: bool,
    /// Exact enumeration over joint label vectors instead of per-label toggles.
    pub joint_labels: bool,
    /// Candidate subsample when refinement is off; 0 scores the whole pool.
    pub candidate_pool: usize,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        StrategyOptions {
            anchors: 64,
            attention: true,
            refinement: true,
            joint_labels: false,
            candidate_pool: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringOptions {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        ScoringOptions {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
        }
    }
}

impl ScoringOptions {
    pub fn params(&self) -> BetaParams {
        BetaParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

/// Everything an acquisition round needs besides data and the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcquisitionConfig {
    pub budget: QueryBudget,
    pub strategy: StrategyOptions,
    pub scoring: ScoringOptions,
    pub correlation: ThresholdPolicy,
    pub execution: Execution,
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        self.scoring.params().validate()?;
        if !(self.scoring.gamma > 0.0) {
            return Err(Error::Config(format!(
                "scoring.gamma must be > 0, got {}",
                self.scoring.gamma
            )));
        }
        if self.strategy.anchors == 0 {
            return Err(Error::Config("strategy.anchors must be >= 1".into()));
        }
        Ok(())
    }
}
