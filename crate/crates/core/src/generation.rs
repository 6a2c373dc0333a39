//! Sequence-to-sequence backends and trigger candidate generation.
//!
//! The core never runs a neural decoder itself. A [`Seq2SeqBackend`] supplies
//! scored top-k hypotheses (beam search) and greedy outputs; this module turns
//! them into parsed, deduplicated [`CandidateList`]s and argument frames.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{self, CodecConfig, Decoded};
use crate::corpus::TrainingPair;
use crate::error::{Error, Result};
use crate::event_model::{is_none_marker, ArgumentPair, ContextInstance, EventFrame, Trigger};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    /// Number of beam hypotheses kept per context.
    pub beam_width: usize,
    pub max_input_len: usize,
    pub max_output_len: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            beam_width: 10,
            max_input_len: 650,
            max_output_len: 200,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 || self.max_input_len == 0 || self.max_output_len == 0 {
            return Err(Error::Config(
                "generation: beam_width and sequence lengths must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Fine-tuning hyperparameters handed through to a backend adapter. The core
/// does not interpret them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FineTuneParams {
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub batch_size: usize,
    pub max_input_len: usize,
    pub max_output_len: usize,
    pub seed: u64,
}

impl Default for FineTuneParams {
    fn default() -> Self {
        FineTuneParams {
            learning_rate: 1e-4,
            lr_decay: 1e-5,
            batch_size: 8,
            max_input_len: 650,
            max_output_len: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub text: String,
    /// Log-scale, higher is better.
    pub score: f64,
}

impl Hypothesis {
    pub fn new(text: impl Into<String>, score: f64) -> Self {
        Hypothesis {
            text: text.into(),
            score,
        }
    }
}

/// An encoder-decoder generator.
///
/// `generate_topk` must return at most `k` hypotheses sorted by score,
/// descending, with finite scores, and must be deterministic for a fixed
/// state.
pub trait Seq2SeqBackend: Send + Sync {
    fn fit(&mut self, pairs: &[TrainingPair], params: &FineTuneParams) -> Result<()>;
    fn generate_topk(&self, input: &str, k: usize) -> Result<Vec<Hypothesis>>;
    fn generate_greedy(&self, input: &str) -> Result<String>;
}

/// Scripted backend: input string to an ordered hypothesis list.
pub type Script = BTreeMap<String, Vec<(String, f64)>>;

/// Test double that replays a script.
///
/// `fit` memorizes training targets for inputs the script does not cover
/// (score 0.0, in pair order), so a toy run can still answer on its own
/// training data.
#[derive(Debug, Clone, Default)]
pub struct ToyBackend {
    script: Script,
    learned: Script,
}

impl ToyBackend {
    pub fn new(mut script: Script) -> Self {
        for hyps in script.values_mut() {
            hyps.sort_by(|a, b| b.1.total_cmp(&a.1));
        }
        ToyBackend {
            script,
            learned: Script::new(),
        }
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Ok(Self::new(crate::jsonl::read_json(path)?))
    }

    fn lookup(&self, input: &str) -> Option<&Vec<(String, f64)>> {
        self.script.get(input).or_else(|| self.learned.get(input))
    }
}

impl Seq2SeqBackend for ToyBackend {
    fn fit(&mut self, pairs: &[TrainingPair], _params: &FineTuneParams) -> Result<()> {
        for pair in pairs {
            if self.script.contains_key(&pair.input) {
                continue;
            }
            let hyps = self.learned.entry(pair.input.clone()).or_default();
            if !hyps.iter().any(|(t, _)| *t == pair.target) {
                hyps.push((pair.target.clone(), 0.0));
            }
        }
        Ok(())
    }

    fn generate_topk(&self, input: &str, k: usize) -> Result<Vec<Hypothesis>> {
        Ok(self
            .lookup(input)
            .map(|hyps| {
                hyps.iter()
                    .take(k)
                    .map(|(t, s)| Hypothesis::new(t.clone(), *s))
                    .collect()
            })
            .unwrap_or_default())
    }

    fn generate_greedy(&self, input: &str) -> Result<String> {
        Ok(self
            .lookup(input)
            .and_then(|hyps| hyps.first())
            .map(|(t, _)| t.clone())
            .unwrap_or_default())
    }
}

pub fn toy_backend(script: Script) -> ToyBackend {
    ToyBackend::new(script)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerCandidate {
    pub raw_text: String,
    pub triggers: Vec<Trigger>,
    pub beam_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fused_score: Option<f64>,
}

impl TriggerCandidate {
    /// The explicit "no event" hypothesis.
    pub fn is_empty(&self) -> bool {
        self.triggers.is_empty()
    }

    fn multiset_key(&self) -> Vec<&Trigger> {
        let mut key: Vec<&Trigger> = self.triggers.iter().collect();
        key.sort();
        key
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateList {
    pub doc_id: String,
    pub context: String,
    pub candidates: Vec<TriggerCandidate>,
    /// Greedy argument output per candidate trigger word, so selection can be
    /// re-run without touching the backend.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arguments: BTreeMap<String, Vec<ArgumentPair>>,
}

impl CandidateList {
    pub fn has_rank_scores(&self) -> bool {
        self.candidates.iter().all(|c| c.rank_score.is_some())
    }

    /// Assembles frames for `triggers`, taking arguments from the cache.
    pub fn frames_for(&self, triggers: &[Trigger]) -> Vec<EventFrame> {
        triggers
            .iter()
            .map(|t| {
                let args = self.arguments.get(t.word()).cloned().unwrap_or_default();
                EventFrame::new(t.clone(), args)
            })
            .collect()
    }
}

/// Beam-searches trigger candidates for one context.
///
/// Hypotheses that parse to no trigger are dropped, except an exact
/// empty-token hypothesis, which survives as the "no event" candidate.
/// Candidates with identical trigger multisets are merged, keeping the best
/// beam score.
pub fn generate_trigger_candidates(
    backend: &dyn Seq2SeqBackend,
    instance: &ContextInstance,
    cfg: &GenerationConfig,
    codec_cfg: &CodecConfig,
) -> Result<(CandidateList, Vec<String>)> {
    let doc_id = instance.doc_id();
    let prompt =
        codec::build_trigger_prompt(instance.context(), codec_cfg).map_err(|e| e.in_doc(doc_id))?;
    let mut hyps = backend
        .generate_topk(&prompt, cfg.beam_width)
        .map_err(|e| e.in_doc(doc_id))?;
    if let Some(bad) = hyps.iter().find(|h| !h.score.is_finite()) {
        return Err(
            Error::Backend(format!("non-finite beam score for {:?}", bad.text)).in_doc(doc_id),
        );
    }
    hyps.sort_by(|a, b| b.score.total_cmp(&a.score));
    hyps.truncate(cfg.beam_width);

    let mut warnings = Vec::new();
    let mut candidates: Vec<TriggerCandidate> = Vec::with_capacity(hyps.len());
    for hyp in hyps {
        let explicit_none = is_none_marker(hyp.text.trim());
        let Decoded { items, warnings: w } = codec::decode_trigger_candidate(&hyp.text, codec_cfg);
        warnings.extend(w.into_iter().map(|m| format!("{doc_id}: {m}")));
        if items.is_empty() && !explicit_none {
            continue;
        }
        let candidate = TriggerCandidate {
            raw_text: hyp.text.trim().to_string(),
            triggers: items,
            beam_score: hyp.score,
            rank_score: None,
            fused_score: None,
        };
        let key = candidate.multiset_key();
        if candidates.iter().any(|c| c.multiset_key() == key) {
            continue;
        }
        candidates.push(candidate);
    }
    Ok((
        CandidateList {
            doc_id: doc_id.to_string(),
            context: instance.context().to_string(),
            candidates,
            arguments: BTreeMap::new(),
        },
        warnings,
    ))
}

/// Greedy argument generation for one trigger. Only the trigger word goes
/// into the prompt; the event type is attached downstream.
pub fn generate_arguments(
    backend: &dyn Seq2SeqBackend,
    context: &str,
    trigger: &Trigger,
    codec_cfg: &CodecConfig,
) -> Result<Decoded<ArgumentPair>> {
    let prompt = codec::build_argument_prompt(context, trigger.word(), codec_cfg)?;
    let text = backend.generate_greedy(&prompt)?;
    Ok(codec::decode_argument_output(&text, codec_cfg))
}

/// Runs argument generation once per distinct candidate trigger word and
/// stores the results in `list.arguments`.
pub fn cache_arguments(
    backend: &dyn Seq2SeqBackend,
    list: &mut CandidateList,
    codec_cfg: &CodecConfig,
) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let triggers: Vec<Trigger> = list
        .candidates
        .iter()
        .flat_map(|c| c.triggers.iter().cloned())
        .collect();
    for trigger in triggers {
        if list.arguments.contains_key(trigger.word()) {
            continue;
        }
        let decoded = generate_arguments(backend, &list.context, &trigger, codec_cfg)
            .map_err(|e| e.in_doc(&list.doc_id))?;
        warnings.extend(
            decoded
                .warnings
                .into_iter()
                .map(|m| format!("{} [{}]: {m}", list.doc_id, trigger.word())),
        );
        list.arguments
            .insert(trigger.word().to_string(), decoded.items);
    }
    Ok(warnings)
}

/// Candidate generation (and optionally argument caching) for a whole split.
/// Instances are processed in parallel; output order follows input order.
pub fn generate_split(
    backend: &dyn Seq2SeqBackend,
    instances: &[ContextInstance],
    cfg: &GenerationConfig,
    codec_cfg: &CodecConfig,
    with_arguments: bool,
) -> Result<(Vec<CandidateList>, Vec<String>)> {
    let results: Vec<(CandidateList, Vec<String>)> = instances
        .par_iter()
        .map(|instance| {
            let (mut list, mut warnings) =
                generate_trigger_candidates(backend, instance, cfg, codec_cfg)?;
            if with_arguments {
                warnings.extend(cache_arguments(backend, &mut list, codec_cfg)?);
            }
            Ok((list, warnings))
        })
        .collect::<Result<_>>()?;
    let mut lists = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for (list, w) in results {
        lists.push(list);
        warnings.extend(w);
    }
    Ok((lists, warnings))
}
