//! JSON-lines corpus ingestion and construction of generator training pairs.
//!
//! One object per line:
//!
//! ```json
//! {"doc_id":"d1","context":"He went home .","events":[{"trigger":{"word":"went","type":"Movement_Transport"},"arguments":[{"role":"Destination","entity":"home"}]}]}
//! ```
//!
//! `events` may be omitted for a context without events.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{self, CodecConfig};
use crate::error::{Error, Result};
use crate::event_model::{ContextInstance, EventFrame, Ontology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Trigger,
    Argument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub input: String,
    pub target: String,
    pub task: Task,
    pub doc_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairOptions {
    /// Also emit one trigger pair whose target joins every trigger with `[and]`.
    pub multi_trigger_target: bool,
    /// Emit a `[none]` trigger pair for contexts without events.
    pub include_empty: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions {
            multi_trigger_target: false,
            include_empty: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub path: String,
    pub lines_read: usize,
    pub loaded: usize,
    /// Lines that could not be turned into an instance.
    pub skipped: Vec<LineIssue>,
    /// Loaded instances with suspicious content (e.g. trigger words missing
    /// from the context).
    pub warnings: Vec<LineIssue>,
}

#[derive(Deserialize)]
struct RawInstance {
    doc_id: String,
    context: String,
    #[serde(default)]
    events: Vec<EventFrame>,
}

#[derive(Serialize)]
struct InstanceRecord<'a> {
    doc_id: &'a str,
    context: &'a str,
    events: &'a [EventFrame],
}

/// Reads a corpus file. Bad lines are reported, never fatal; only an
/// unreadable file is an error.
pub fn load_corpus(path: &Path) -> Result<(Vec<ContextInstance>, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut report = LoadReport {
        path: path.display().to_string(),
        ..Default::default()
    };
    let mut instances = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        report.lines_read += 1;
        let parsed = serde_json::from_str::<RawInstance>(&line)
            .map_err(|e| e.to_string())
            .and_then(|raw| {
                ContextInstance::new(raw.doc_id, &raw.context, raw.events)
                    .map_err(|e| e.to_string())
            });
        match parsed {
            Ok(instance) => {
                for message in instance.unanchored_triggers() {
                    report.warnings.push(LineIssue {
                        line: line_no,
                        message: format!("{}: {message}", instance.doc_id()),
                    });
                }
                instances.push(instance);
            }
            Err(message) => report.skipped.push(LineIssue {
                line: line_no,
                message,
            }),
        }
    }
    report.loaded = instances.len();
    Ok((instances, report))
}

pub fn write_corpus(path: &Path, instances: &[ContextInstance]) -> Result<()> {
    crate::jsonl::write(
        path,
        instances.iter().map(|i| InstanceRecord {
            doc_id: i.doc_id(),
            context: i.context(),
            events: i.gold_frames(),
        }),
    )
}

/// Splits one context into per-event generator samples: a trigger pair and
/// an argument pair for each gold frame, in frame order.
pub fn make_training_pairs(
    instance: &ContextInstance,
    ontology: &Ontology,
    cfg: &CodecConfig,
    opts: PairOptions,
) -> Result<Vec<TrainingPair>> {
    let doc_id = instance.doc_id();
    for frame in instance.gold_frames() {
        let event_type = frame.trigger().event_type();
        if !ontology.contains_type(event_type) {
            return Err(Error::TypeNotInOntology(event_type.to_string()).in_doc(doc_id));
        }
    }
    let trigger_input =
        codec::build_trigger_prompt(instance.context(), cfg).map_err(|e| e.in_doc(doc_id))?;
    let pair = |input: String, target: String, task| TrainingPair {
        input,
        target,
        task,
        doc_id: doc_id.to_string(),
    };

    let frames = instance.gold_frames();
    if frames.is_empty() {
        return Ok(if opts.include_empty {
            vec![pair(trigger_input, cfg.empty_token.clone(), Task::Trigger)]
        } else {
            Vec::new()
        });
    }

    let mut pairs = Vec::with_capacity(2 * frames.len() + 1);
    for frame in frames {
        pairs.push(pair(
            trigger_input.clone(),
            codec::encode_trigger(frame.trigger()),
            Task::Trigger,
        ));
        let arg_input =
            codec::build_argument_prompt(instance.context(), frame.trigger().word(), cfg)
                .map_err(|e| e.in_doc(doc_id))?;
        let arg_target =
            codec::encode_argument_target(frame, ontology, cfg).map_err(|e| e.in_doc(doc_id))?;
        pairs.push(pair(arg_input, arg_target, Task::Argument));
    }
    if opts.multi_trigger_target {
        pairs.push(pair(
            trigger_input,
            codec::encode_trigger_target(frames, cfg),
            Task::Trigger,
        ));
    }
    Ok(pairs)
}

pub fn make_corpus_pairs(
    instances: &[ContextInstance],
    ontology: &Ontology,
    cfg: &CodecConfig,
    opts: PairOptions,
) -> Result<Vec<TrainingPair>> {
    let per_instance: Vec<Vec<TrainingPair>> = instances
        .par_iter()
        .map(|i| make_training_pairs(i, ontology, cfg, opts))
        .collect::<Result<_>>()?;
    Ok(per_instance.into_iter().flatten().collect())
}
