use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{self, CodecConfig};
use crate::error::{Error, Result};
use crate::event_model::{ContextInstance, Trigger};
use crate::generation::CandidateList;

use super::{ContrastiveExample, RankScorer, SelectorTrainConfig};

/// Gold triggers of one training context alongside its generated candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorSample {
    pub context: String,
    pub gold: Vec<Trigger>,
    pub candidates: CandidateList,
}

impl SelectorSample {
    pub fn new(instance: &ContextInstance, candidates: CandidateList) -> Self {
        SelectorSample {
            context: instance.context().to_string(),
            gold: instance.gold_triggers(),
            candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Summed pre-update hinge loss per epoch.
    pub epoch_losses: Vec<f64>,
    pub trained_instances: usize,
    /// Contexts with no incorrect candidate to contrast against.
    pub skipped_instances: usize,
}

/// Candidate texts usable as negatives: candidates sharing no trigger with
/// gold. For a context without gold events the explicit "no event"
/// candidate is correct, so only candidates with triggers qualify.
pub fn negative_pool<'a>(candidates: &'a CandidateList, gold: &[Trigger]) -> Vec<&'a str> {
    candidates
        .candidates
        .iter()
        .filter(|c| {
            if gold.is_empty() {
                !c.is_empty()
            } else {
                !c.triggers.iter().any(|t| gold.contains(t))
            }
        })
        .map(|c| c.raw_text.as_str())
        .collect()
}

/// Uniformly samples up to `k` negatives without replacement, returned in
/// candidate order.
pub fn sample_negatives_with(
    candidates: &CandidateList,
    gold: &[Trigger],
    k: usize,
    rng: &mut impl Rng,
) -> Vec<String> {
    let pool = negative_pool(candidates, gold);
    if pool.len() <= k {
        return pool.into_iter().map(str::to_string).collect();
    }
    let mut picked = rand::seq::index::sample(rng, pool.len(), k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| pool[i].to_string()).collect()
}

pub fn sample_negatives(
    candidates: &CandidateList,
    gold: &[Trigger],
    k: usize,
    seed: u64,
) -> Vec<String> {
    sample_negatives_with(candidates, gold, k, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Gold triggers in candidate-text form; the empty token for a context
/// without events.
pub fn positive_texts(gold: &[Trigger], codec_cfg: &CodecConfig) -> Vec<String> {
    if gold.is_empty() {
        return vec![codec_cfg.empty_token.clone()];
    }
    let mut out: Vec<String> = Vec::with_capacity(gold.len());
    for t in gold {
        let text = codec::encode_trigger(t);
        if !out.contains(&text) {
            out.push(text);
        }
    }
    out
}

/// Trains `scorer` with the contrastive hinge objective, one subgradient step
/// per context per epoch, visiting contexts in a freshly shuffled order each
/// epoch.
pub fn train_selector(
    scorer: &mut dyn RankScorer,
    data: &[SelectorSample],
    cfg: &SelectorTrainConfig,
    codec_cfg: &CodecConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    let trainable: Vec<usize> = (0..data.len())
        .filter(|&i| !negative_pool(&data[i].candidates, &data[i].gold).is_empty())
        .collect();
    if trainable.is_empty() {
        return Err(Error::UntrainableDataset);
    }
    let positives: Vec<Vec<String>> = data
        .iter()
        .map(|s| positive_texts(&s.gold, codec_cfg))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = trainable.clone();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let sample = &data[i];
            let negatives =
                sample_negatives_with(&sample.candidates, &sample.gold, cfg.negatives_k, &mut rng);
            let batch: Vec<ContrastiveExample> = positives[i]
                .iter()
                .map(|p| ContrastiveExample {
                    context: sample.context.clone(),
                    positive: p.clone(),
                    negatives: negatives.clone(),
                })
                .collect();
            total += scorer.train_step(&batch, cfg.margin, cfg.learning_rate);
        }
        epoch_losses.push(total);
    }
    Ok(TrainReport {
        epoch_losses,
        trained_instances: trainable.len(),
        skipped_instances: data.len() - trainable.len(),
    })
}
