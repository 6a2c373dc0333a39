use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One gold trigger text against sampled incorrect candidates of the same
/// context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveExample {
    pub context: String,
    pub positive: String,
    pub negatives: Vec<String>,
}

/// Relevance of a candidate trigger text to its context.
pub trait RankScorer: Send + Sync {
    fn score(&self, context: &str, candidate: &str) -> f64;

    /// One subgradient step on the hinge objective of `batch`; returns the
    /// batch loss measured before the update.
    fn train_step(&mut self, batch: &[ContrastiveExample], margin: f64, learning_rate: f64) -> f64;
}

/// Sorted, duplicate-free sparse vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec(pub Vec<(u32, f64)>);

impl SparseVec {
    fn from_unsorted(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        SparseVec(merged)
    }

    fn add_scaled(&mut self, other: &SparseVec, scale: f64) {
        let mut entries = std::mem::take(&mut self.0);
        entries.extend(other.0.iter().map(|&(i, v)| (i, v * scale)));
        *self = SparseVec::from_unsorted(entries);
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|e| e.0)
    }

    pub fn get(&self, index: u32) -> f64 {
        self.0
            .binary_search_by_key(&index, |e| e.0)
            .map(|pos| self.0[pos].1)
            .unwrap_or(0.0)
    }
}

const FORMAT_TAG: &str = "evex.hashed-linear";
const FORMAT_VERSION: u32 = 1;
const SEPARATOR: &str = "</s>";

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Linear model over hashed word uni/bigrams and character n-grams of
/// `context </s> candidate`, trained by stochastic subgradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct HashedLinearScorer {
    bits: u32,
    char_ngram: usize,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StoredModel {
    format: String,
    version: u32,
    bits: u32,
    char_ngram: usize,
    /// Nonzero weights, ascending index.
    weights: Vec<(u32, f64)>,
}

impl Default for HashedLinearScorer {
    fn default() -> Self {
        Self::new(18, 3)
    }
}

impl HashedLinearScorer {
    /// `bits` sets the feature space to `2^bits` slots.
    pub fn new(bits: u32, char_ngram: usize) -> Self {
        assert!((1..=30).contains(&bits), "feature bits must be in 1..=30");
        HashedLinearScorer {
            bits,
            char_ngram,
            weights: vec![0.0; 1 << bits],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, index: u32) -> f64 {
        self.weights[index as usize]
    }

    pub fn set_weight(&mut self, index: u32, value: f64) {
        self.weights[index as usize] = value;
    }

    fn slot(&self, kind: u8, text: &str) -> u32 {
        let mut bytes = Vec::with_capacity(text.len() + 1);
        bytes.push(kind);
        bytes.extend_from_slice(text.as_bytes());
        (fnv1a(&bytes) & ((1u64 << self.bits) - 1)) as u32
    }

    pub fn features(&self, context: &str, candidate: &str) -> SparseVec {
        let joined = format!("{context} {SEPARATOR} {candidate}");
        let tokens: Vec<&str> = joined.split_whitespace().collect();
        let mut entries = Vec::with_capacity(tokens.len() * 2 + joined.len());
        for tok in &tokens {
            entries.push((self.slot(b'w', tok), 1.0));
        }
        for pair in tokens.windows(2) {
            entries.push((self.slot(b'b', &format!("{} {}", pair[0], pair[1])), 1.0));
        }
        if self.char_ngram > 0 {
            let chars: Vec<char> = joined.chars().collect();
            for gram in chars.windows(self.char_ngram) {
                let s: String = gram.iter().collect();
                entries.push((self.slot(b'c', &s), 1.0));
            }
        }
        SparseVec::from_unsorted(entries)
    }

    fn dot(&self, x: &SparseVec) -> f64 {
        x.0.iter().map(|&(i, v)| self.weights[i as usize] * v).sum()
    }

    /// Hinge objective of `batch` and its subgradient with respect to the
    /// weights. The subgradient of an inactive (or exactly tied) term is zero.
    pub fn loss_and_gradient(&self, batch: &[ContrastiveExample], margin: f64) -> (f64, SparseVec) {
        let mut loss = 0.0;
        let mut grad = SparseVec::default();
        for ex in batch {
            let pos = self.features(&ex.context, &ex.positive);
            let pos_score = self.dot(&pos);
            for neg_text in &ex.negatives {
                let neg = self.features(&ex.context, neg_text);
                let term = margin - pos_score + self.dot(&neg);
                if term > 0.0 {
                    loss += term;
                    grad.add_scaled(&neg, 1.0);
                    grad.add_scaled(&pos, -1.0);
                }
            }
        }
        (loss, grad)
    }

    pub fn to_json(&self) -> Result<String> {
        let stored = StoredModel {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            bits: self.bits,
            char_ngram: self.char_ngram,
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i as u32, *w))
                .collect(),
        };
        Ok(serde_json::to_string(&stored)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let stored: StoredModel = serde_json::from_str(text)?;
        if stored.format != FORMAT_TAG || stored.version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "{} v{}",
                stored.format, stored.version
            )));
        }
        if !(1..=30).contains(&stored.bits) {
            return Err(Error::ModelFormat(format!("bits={}", stored.bits)));
        }
        let mut scorer = HashedLinearScorer::new(stored.bits, stored.char_ngram);
        for (i, w) in stored.weights {
            let slot = scorer
                .weights
                .get_mut(i as usize)
                .ok_or_else(|| Error::ModelFormat(format!("weight index {i} out of range")))?;
            *slot = w;
        }
        Ok(scorer)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

impl RankScorer for HashedLinearScorer {
    fn score(&self, context: &str, candidate: &str) -> f64 {
        self.dot(&self.features(context, candidate))
    }

    fn train_step(&mut self, batch: &[ContrastiveExample], margin: f64, learning_rate: f64) -> f64 {
        let (loss, grad) = self.loss_and_gradient(batch, margin);
        for &(i, g) in &grad.0 {
            self.weights[i as usize] -= learning_rate * g;
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selector::hinge_loss;

    fn example(pos: &str, negs: &[&str]) -> ContrastiveExample {
        ContrastiveExample {
            context: "Troops attacked the bridge .".into(),
            positive: pos.into(),
            negatives: negs.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn zero_model_zero_margin_has_zero_loss() {
        let mut s = HashedLinearScorer::new(12, 3);
        let batch = [example(
            "attacked [Conflict_Attack]",
            &["bridge [Life_Die]"],
        )];
        assert_eq!(s.train_step(&batch, 0.0, 0.1), 0.0);
        // nothing moved: the subgradient at a tie is zero
        assert!(s.weights.iter().all(|w| *w == 0.0));
        // with a positive margin the same batch is active
        assert_eq!(s.train_step(&batch, 0.5, 0.1), 0.5);
        assert!(
            s.score(&batch[0].context, "attacked [Conflict_Attack]")
                > s.score(&batch[0].context, "bridge [Life_Die]")
        );
    }

    #[test]
    fn batch_loss_matches_hinge_loss() {
        let mut s = HashedLinearScorer::new(14, 3);
        for i in 0..200u32 {
            s.set_weight(i * 7 % (1 << 14), (i as f64).sin());
        }
        let ex = example(
            "attacked [Conflict_Attack]",
            &["bridge [Life_Die]", "the [Movement_Transport]"],
        );
        let pos = [s.score(&ex.context, &ex.positive)];
        let neg: Vec<f64> = ex
            .negatives
            .iter()
            .map(|n| s.score(&ex.context, n))
            .collect();
        let expected = hinge_loss(&pos, &neg, 0.5).unwrap();
        let (loss, _) = s.loss_and_gradient(std::slice::from_ref(&ex), 0.5);
        assert!((loss - expected).abs() < 1e-12);
    }

    #[test]
    fn features_are_deterministic_and_sorted() {
        let s = HashedLinearScorer::default();
        let a = s.features("He went home .", "went [Movement_Transport]");
        let b = s.features("He went home .", "went [Movement_Transport]");
        assert_eq!(a, b);
        assert!(a.0.windows(2).all(|w| w[0].0 < w[1].0));
        assert_ne!(a, s.features("He went home .", "went [Life_Die]"));
    }

    #[test]
    fn json_roundtrip_preserves_scores() {
        let mut s = HashedLinearScorer::new(10, 2);
        let batch = [example(
            "attacked [Conflict_Attack]",
            &["bridge [Life_Die]"],
        )];
        for _ in 0..3 {
            s.train_step(&batch, 0.5, 0.013);
        }
        let back = HashedLinearScorer::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(HashedLinearScorer::from_json(
            r#"{"format":"other","version":1,"bits":4,"char_ngram":3,"weights":[]}"#
        )
        .is_err());
        assert!(HashedLinearScorer::from_json(r#"{"format":"evex.hashed-linear","version":1,"bits":4,"char_ngram":3,"weights":[[99,1.0]]}"#).is_err());
    }
}
