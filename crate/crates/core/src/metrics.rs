//! Trigger/argument identification and classification F1.
//!
//! Matching is by surface string, per context, as multisets: a key predicted
//! `m` times against `n` gold occurrences earns `min(m, n)` hits. Counts are
//! summed over the corpus before computing precision and recall (micro
//! averaging).
//!
//! | subtask | key |
//! |---------|-----|
//! | Trig-I  | trigger word |
//! | Trig-C  | trigger word, event type |
//! | Arg-I   | entity, event type |
//! | Arg-C   | entity, role, event type |

use std::collections::{HashMap, HashSet};
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_model::{ContextInstance, EventFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subtask {
    #[serde(rename = "Trig-I")]
    TriggerIdentification,
    #[serde(rename = "Trig-C")]
    TriggerClassification,
    #[serde(rename = "Arg-I")]
    ArgumentIdentification,
    #[serde(rename = "Arg-C")]
    ArgumentClassification,
}

impl Subtask {
    pub const ALL: [Subtask; 4] = [
        Subtask::TriggerIdentification,
        Subtask::TriggerClassification,
        Subtask::ArgumentIdentification,
        Subtask::ArgumentClassification,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Subtask::TriggerIdentification => "Trig-I",
            Subtask::TriggerClassification => "Trig-C",
            Subtask::ArgumentIdentification => "Arg-I",
            Subtask::ArgumentClassification => "Arg-C",
        }
    }

    fn keys(self, frames: &[EventFrame]) -> Vec<[&str; 3]> {
        let mut out = Vec::new();
        for f in frames {
            let t = f.trigger();
            match self {
                Subtask::TriggerIdentification => out.push([t.word(), "", ""]),
                Subtask::TriggerClassification => out.push([t.word(), t.event_type(), ""]),
                Subtask::ArgumentIdentification => out.extend(
                    f.arguments()
                        .iter()
                        .map(|a| [a.entity(), t.event_type(), ""]),
                ),
                Subtask::ArgumentClassification => out.extend(
                    f.arguments()
                        .iter()
                        .map(|a| [a.entity(), a.role(), t.event_type()]),
                ),
            }
        }
        out
    }
}

impl std::str::FromStr for Subtask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "trig_i" => Ok(Subtask::TriggerIdentification),
            "trig_c" => Ok(Subtask::TriggerClassification),
            "arg_i" => Ok(Subtask::ArgumentIdentification),
            "arg_c" => Ok(Subtask::ArgumentClassification),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_correct: usize,
    pub n_pred: usize,
    pub n_gold: usize,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.n_correct += rhs.n_correct;
        self.n_pred += rhs.n_pred;
        self.n_gold += rhs.n_gold;
    }
}

/// Multiset match of one context's predicted frames against its gold frames.
pub fn match_counts(pred: &[EventFrame], gold: &[EventFrame], subtask: Subtask) -> Counts {
    let pred_keys = subtask.keys(pred);
    let gold_keys = subtask.keys(gold);
    let mut gold_count: HashMap<[&str; 3], usize> = HashMap::new();
    for k in &gold_keys {
        *gold_count.entry(*k).or_default() += 1;
    }
    let mut pred_count: HashMap<[&str; 3], usize> = HashMap::new();
    for k in &pred_keys {
        *pred_count.entry(*k).or_default() += 1;
    }
    let n_correct = pred_count
        .iter()
        .map(|(k, &n)| n.min(gold_count.get(k).copied().unwrap_or(0)))
        .sum();
    Counts {
        n_correct,
        n_pred: pred_keys.len(),
        n_gold: gold_keys.len(),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SubtaskScore {
    pub n_gold: usize,
    pub n_pred: usize,
    pub n_correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// `(precision, recall, f1)`, with every ratio defined as 0 when its
/// denominator is 0.
pub fn f1_from_counts(n_correct: usize, n_pred: usize, n_gold: usize) -> Result<(f64, f64, f64)> {
    if n_correct > n_pred.min(n_gold) {
        return Err(Error::InvalidCounts {
            n_correct,
            n_pred,
            n_gold,
        });
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let p = ratio(n_correct, n_pred);
    let r = ratio(n_correct, n_gold);
    let f1 = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    Ok((p, r, f1))
}

impl SubtaskScore {
    pub fn from_counts(c: Counts) -> Result<Self> {
        let (precision, recall, f1) = f1_from_counts(c.n_correct, c.n_pred, c.n_gold)?;
        Ok(SubtaskScore {
            n_gold: c.n_gold,
            n_pred: c.n_pred,
            n_correct: c.n_correct,
            precision,
            recall,
            f1,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(rename = "Trig-I")]
    pub trig_i: SubtaskScore,
    #[serde(rename = "Trig-C")]
    pub trig_c: SubtaskScore,
    #[serde(rename = "Arg-I")]
    pub arg_i: SubtaskScore,
    #[serde(rename = "Arg-C")]
    pub arg_c: SubtaskScore,
}

impl EvalReport {
    pub fn get(&self, subtask: Subtask) -> &SubtaskScore {
        match subtask {
            Subtask::TriggerIdentification => &self.trig_i,
            Subtask::TriggerClassification => &self.trig_c,
            Subtask::ArgumentIdentification => &self.arg_i,
            Subtask::ArgumentClassification => &self.arg_c,
        }
    }

    fn get_mut(&mut self, subtask: Subtask) -> &mut SubtaskScore {
        match subtask {
            Subtask::TriggerIdentification => &mut self.trig_i,
            Subtask::TriggerClassification => &mut self.trig_c,
            Subtask::ArgumentIdentification => &mut self.arg_i,
            Subtask::ArgumentClassification => &mut self.arg_c,
        }
    }

    /// Micro-averaged report over `(predicted, gold)` frame lists, one per
    /// context.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a [EventFrame], &'a [EventFrame])>,
    ) -> Result<Self> {
        let mut totals = [Counts::default(); 4];
        for (pred, gold) in pairs {
            for (total, subtask) in totals.iter_mut().zip(Subtask::ALL) {
                *total += match_counts(pred, gold, subtask);
            }
        }
        let mut report = EvalReport::default();
        for (total, subtask) in totals.into_iter().zip(Subtask::ALL) {
            *report.get_mut(subtask) = SubtaskScore::from_counts(total)?;
        }
        Ok(report)
    }
}

/// Scores predictions against a gold corpus. Contexts without a prediction
/// count as predicting nothing.
pub fn evaluate_corpus(
    predictions: &[(String, Vec<EventFrame>)],
    gold: &[ContextInstance],
) -> Result<EvalReport> {
    let mut by_doc: HashMap<&str, &[EventFrame]> = HashMap::new();
    for instance in gold {
        if by_doc.insert(instance.doc_id(), &[]).is_some() {
            return Err(Error::DuplicateDocId(instance.doc_id().to_string()));
        }
    }
    let mut seen: HashSet<&str> = HashSet::new();
    for (doc_id, frames) in predictions {
        let slot = by_doc
            .get_mut(doc_id.as_str())
            .ok_or_else(|| Error::UnknownDocId(doc_id.clone()))?;
        if !seen.insert(doc_id.as_str()) {
            return Err(Error::DuplicateDocId(doc_id.clone()));
        }
        *slot = frames.as_slice();
    }
    EvalReport::from_pairs(gold.iter().map(|g| (by_doc[g.doc_id()], g.gold_frames())))
}
