//! Contrastive re-ranking and fused-score selection of trigger candidates.
//!
//! A [`RankScorer`] is trained with a margin hinge objective to score gold
//! trigger texts above incorrect beam candidates of the same context. At
//! inference, rank scores and beam scores are each softmaxed over the
//! candidate list, mixed with weight `alpha`, and every candidate whose fused
//! score exceeds `theta` is kept.

mod fusion;
mod loss;
mod scorer;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fusion::{
    fuse, fuse_and_select, fused_scores, score_candidates, select_scored, softmax, Selection,
};
pub use loss::hinge_loss;
pub use scorer::{ContrastiveExample, HashedLinearScorer, RankScorer, SparseVec};
pub use train::{
    negative_pool, positive_texts, sample_negatives, sample_negatives_with, train_selector,
    SelectorSample, TrainReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorTrainConfig {
    /// Hinge margin, within [-1, 1].
    pub margin: f64,
    /// Negatives sampled per context.
    pub negatives_k: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SelectorTrainConfig {
    fn default() -> Self {
        SelectorTrainConfig {
            margin: 0.5,
            negatives_k: 5,
            learning_rate: 0.005,
            epochs: 10,
            seed: 0,
        }
    }
}

impl SelectorTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.margin) {
            return Err(Error::Config(format!(
                "selector.margin {} outside [-1, 1]",
                self.margin
            )));
        }
        if self.negatives_k == 0 {
            return Err(Error::Config("selector.negatives_k must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(
                "selector.learning_rate must be positive".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::Config("selector.epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Weight of the rank-score distribution; `1 - alpha` goes to beam scores.
    pub alpha: f64,
    pub theta: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            alpha: 0.4,
            theta: 0.2,
        }
    }
}

impl SelectionConfig {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        let cfg = SelectionConfig { alpha, theta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!(
                "selection alpha={} theta={} must lie in [0, 1]",
                self.alpha, self.theta
            )));
        }
        Ok(())
    }
}
