//! Template-free generative event extraction: a seq2seq generator proposes
//! trigger candidates, a contrastively trained ranker re-scores them, and a
//! fused score decides which survive. Arguments are generated per selected
//! trigger.

pub mod codec;
pub mod corpus;
pub mod error;
pub mod event_model;
pub mod generation;
pub mod jsonl;
pub mod metrics;
pub mod run;
pub mod selector;
pub mod synthetic;
pub mod tuning;

pub use codec::CodecConfig;
pub use error::{Error, Result};
pub use event_model::{ArgumentPair, ContextInstance, EventFrame, Ontology, Trigger};
pub use generation::{
    CandidateList, GenerationConfig, Seq2SeqBackend, ToyBackend, TriggerCandidate,
};
pub use metrics::{EvalReport, Subtask};
pub use selector::{HashedLinearScorer, RankScorer, SelectionConfig, SelectorTrainConfig};
