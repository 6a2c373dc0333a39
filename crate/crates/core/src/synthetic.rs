//! Deterministic synthetic corpora with scripted generator outputs.
//!
//! Contexts combine zero to two templated event clauses over three event
//! types, optionally padded with an event-free clause. Two script regimes are
//! available: [`Regime::Oracle`] ranks the complete gold answer far above every
//! distractor, while [`Regime::Noisy`] draws gold and distractor beam scores
//! from overlapping ranges so the top beam is often wrong.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{self, CodecConfig};
use crate::error::Result;
use crate::event_model::{ArgumentPair, ContextInstance, EventFrame, Ontology, Trigger};
use crate::generation::Script;
use crate::run::{CorpusPaths, RunConfig, SelectionMode};
use crate::{corpus, jsonl};

type ScoreFn<R> = fn(&mut R) -> f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Oracle,
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub regime: Regime,
}

impl SyntheticConfig {
    /// About fifty contexts, exact backend.
    pub fn oracle() -> Self {
        SyntheticConfig {
            seed: 7,
            train: 30,
            dev: 10,
            test: 10,
            regime: Regime::Oracle,
        }
    }

    pub fn noisy() -> Self {
        SyntheticConfig {
            seed: 11,
            train: 300,
            dev: 100,
            test: 100,
            regime: Regime::Noisy,
        }
    }
}

struct EventKind {
    name: &'static str,
    roles: [&'static str; 3],
    verbs: [&'static str; 5],
}

const KINDS: [EventKind; 3] = [
    EventKind {
        name: "Movement_Transport",
        roles: ["Artifact", "Destination", "Origin"],
        verbs: ["went", "traveled", "drove", "flew", "sailed"],
    },
    EventKind {
        name: "Life_Die",
        roles: ["Agent", "Victim", "Place"],
        verbs: ["killed", "murdered", "executed", "slew", "assassinated"],
    },
    EventKind {
        name: "Conflict_Attack",
        roles: ["Attacker", "Target", "Place"],
        verbs: ["attacked", "bombed", "struck", "raided", "shelled"],
    },
];

const PEOPLE: [&str; 10] = [
    "the soldier",
    "the minister",
    "a farmer",
    "the rebels",
    "the pilot",
    "the doctor",
    "the merchant",
    "the general",
    "the envoy",
    "the guard",
];

const PLACES: [&str; 8] = [
    "baghdad",
    "the capital",
    "the village",
    "kabul",
    "the harbor",
    "the border",
    "cairo",
    "the market",
];

const TARGETS: [&str; 6] = [
    "the convoy",
    "the bridge",
    "the embassy",
    "a checkpoint",
    "the depot",
    "the station",
];

const FILLERS: [&str; 6] = [
    "the weather stayed calm in {place}",
    "officials met quietly on monday",
    "reporters waited outside the hall",
    "prices rose slightly in {place}",
    "the council opened a new school",
    "farmers harvested wheat near {place}",
];

/// Roles per event type, in slot order.
pub fn synthetic_ontology() -> Ontology {
    Ontology::from_listing(KINDS.iter().map(|k| (k.name, k.roles.to_vec())))
        .expect("static ontology is valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub config: SyntheticConfig,
    pub train: Vec<ContextInstance>,
    pub dev: Vec<ContextInstance>,
    pub test: Vec<ContextInstance>,
    pub script: Script,
}

impl SyntheticCorpus {
    pub fn generate(config: &SyntheticConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let codec_cfg = CodecConfig::default();
        let ontology = synthetic_ontology();
        let mut script = Script::new();
        let mut split = |name: &str, n: usize, rng: &mut ChaCha8Rng| -> Vec<ContextInstance> {
            (0..n)
                .map(|i| {
                    let (context, frames) = sample_context(rng);
                    let instance = ContextInstance::new(format!("{name}-{i:04}"), &context, frames)
                        .expect("generated contexts are nonempty");
                    add_script_entries(
                        &mut script,
                        &instance,
                        config.regime,
                        &ontology,
                        &codec_cfg,
                        rng,
                    );
                    instance
                })
                .collect()
        };
        let train = split("train", config.train, &mut rng);
        let dev = split("dev", config.dev, &mut rng);
        let test = split("test", config.test, &mut rng);
        SyntheticCorpus {
            config: config.clone(),
            train,
            dev,
            test,
            script,
        }
    }

    pub fn split(&self, name: &str) -> Option<&[ContextInstance]> {
        match name {
            "train" => Some(&self.train),
            "dev" => Some(&self.dev),
            "test" => Some(&self.test),
            _ => None,
        }
    }

    /// Run config for the files written by [`SyntheticCorpus::write`], with
    /// paths relative to that directory and selection tuned on dev.
    pub fn run_config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(CorpusPaths {
            train: "train.jsonl".into(),
            dev: "dev.jsonl".into(),
            test: "test.jsonl".into(),
        });
        cfg.backend.script = Some("script.json".into());
        cfg.selection = SelectionMode::Tune;
        cfg.seed = self.config.seed;
        cfg
    }

    /// Writes `train.jsonl`, `dev.jsonl`, `test.jsonl`, `script.json` and
    /// `config.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
        corpus::write_corpus(&dir.join("train.jsonl"), &self.train)?;
        corpus::write_corpus(&dir.join("dev.jsonl"), &self.dev)?;
        corpus::write_corpus(&dir.join("test.jsonl"), &self.test)?;
        jsonl::write_json(&dir.join("script.json"), &self.script)?;
        jsonl::write_json(&dir.join("config.json"), &self.run_config())
    }
}

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().expect("nonempty lexicon")
}

fn pick_distinct<'a, R: Rng>(rng: &mut R, items: &[&'a str], avoid: &str) -> &'a str {
    loop {
        let item = pick(rng, items);
        if item != avoid {
            return item;
        }
    }
}

fn sample_event<R: Rng>(rng: &mut R, kind: &EventKind, verb: &str) -> (String, EventFrame) {
    let trigger = Trigger::new(verb, kind.name).expect("static trigger");
    let arg = |role: &str, entity: &str| ArgumentPair::new(role, entity).expect("static argument");
    let with_place = rng.gen_bool(0.6);
    let (clause, args) = match kind.name {
        "Movement_Transport" => {
            let who = pick(rng, &PEOPLE);
            let dest = pick(rng, &PLACES);
            if with_place {
                let origin = pick_distinct(rng, &PLACES, dest);
                (
                    format!("{who} {verb} from {origin} to {dest}"),
                    vec![
                        arg("Artifact", who),
                        arg("Origin", origin),
                        arg("Destination", dest),
                    ],
                )
            } else {
                (
                    format!("{who} {verb} to {dest}"),
                    vec![arg("Artifact", who), arg("Destination", dest)],
                )
            }
        }
        "Life_Die" => {
            let agent = pick(rng, &PEOPLE);
            let victim = pick_distinct(rng, &PEOPLE, agent);
            let mut args = vec![arg("Agent", agent), arg("Victim", victim)];
            let mut clause = format!("{agent} {verb} {victim}");
            if with_place {
                let place = pick(rng, &PLACES);
                clause.push_str(&format!(" in {place}"));
                args.push(arg("Place", place));
            }
            (clause, args)
        }
        _ => {
            let attacker = pick(rng, &PEOPLE);
            let target = pick(rng, &TARGETS);
            let mut args = vec![arg("Attacker", attacker), arg("Target", target)];
            let mut clause = format!("{attacker} {verb} {target}");
            if with_place {
                let place = pick(rng, &PLACES);
                clause.push_str(&format!(" near {place}"));
                args.push(arg("Place", place));
            }
            (clause, args)
        }
    };
    (clause, EventFrame::new(trigger, args))
}

fn sample_context<R: Rng>(rng: &mut R) -> (String, Vec<EventFrame>) {
    let n_events = match rng.gen_range(0..20) {
        0..=4 => 0,
        5..=13 => 1,
        _ => 2,
    };
    let mut clauses = Vec::new();
    let mut frames = Vec::new();
    let mut used_verbs: Vec<&str> = Vec::new();
    for _ in 0..n_events {
        let kind = KINDS.choose(rng).expect("nonempty");
        let verb = loop {
            let v = pick(rng, &kind.verbs);
            if !used_verbs.contains(&v) {
                break v;
            }
        };
        used_verbs.push(verb);
        let (clause, frame) = sample_event(rng, kind, verb);
        clauses.push(clause);
        frames.push(frame);
    }
    if n_events == 0 || rng.gen_bool(0.3) {
        let filler = pick(rng, &FILLERS).replace("{place}", pick(rng, &PLACES));
        let at = rng.gen_range(0..=clauses.len());
        clauses.insert(at, filler);
    }
    (format!("{} .", clauses.join(" , and ")), frames)
}

/// Context words usable as wrong trigger words: anything that is not a
/// gold trigger and not a function word.
fn distractor_words<'a>(context: &'a str, gold: &[Trigger]) -> Vec<&'a str> {
    const STOP: [&str; 9] = ["the", "a", "and", "in", "to", "from", "on", "near", "new"];
    let mut words: Vec<&str> = context
        .split_whitespace()
        .filter(|w| w.len() > 2 && !STOP.contains(w) && !gold.iter().any(|t| t.word() == *w))
        .collect();
    words.sort_unstable();
    words.dedup();
    words
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn all_none_slots(kind: &EventKind, cfg: &CodecConfig) -> String {
    kind.roles
        .iter()
        .map(|r| format!("<{r}> {} </{r}>", cfg.none_token))
        .collect::<Vec<_>>()
        .join(" ")
}

fn add_script_entries<R: Rng>(
    script: &mut Script,
    instance: &ContextInstance,
    regime: Regime,
    ontology: &Ontology,
    cfg: &CodecConfig,
    rng: &mut R,
) {
    let context = instance.context();
    let gold = instance.gold_triggers();

    for frame in instance.gold_frames() {
        let prompt = codec::build_argument_prompt(context, frame.trigger().word(), cfg)
            .expect("valid prompt");
        let target = codec::encode_argument_target(frame, ontology, cfg).expect("type in ontology");
        script.insert(prompt, vec![(target, 0.0)]);
    }

    let mut hyps: Vec<(String, f64)> = Vec::new();
    let (gold_score, distractor_score): (ScoreFn<R>, ScoreFn<R>) = match regime {
        Regime::Oracle => (|_| 0.0, |r| -9.0 - r.gen_range(0.0..3.0)),
        Regime::Noisy => (|r| -r.gen_range(0.0..2.0), |r| -r.gen_range(0.2..2.4)),
    };

    match regime {
        Regime::Oracle => hyps.push((codec::encode_triggers(&gold, cfg), gold_score(rng))),
        Regime::Noisy if gold.is_empty() => hyps.push((cfg.empty_token.clone(), gold_score(rng))),
        Regime::Noisy => {
            for t in &gold {
                hyps.push((codec::encode_trigger(t), gold_score(rng)));
            }
            hyps.push((cfg.empty_token.clone(), distractor_score(rng)));
        }
    }

    if regime == Regime::Oracle && !gold.is_empty() {
        hyps.push((cfg.empty_token.clone(), distractor_score(rng)));
    }
    for t in &gold {
        let wrong = KINDS
            .iter()
            .filter(|k| k.name != t.event_type())
            .collect::<Vec<_>>()
            .choose(rng)
            .map(|k| k.name)
            .expect("three kinds");
        let text = codec::encode_trigger(&Trigger::new(t.word(), wrong).expect("valid"));
        hyps.push((text, distractor_score(rng)));
    }
    let mut pool = distractor_words(context, &gold);
    pool.shuffle(rng);
    let wanted = rng
        .gen_range(3..=6usize)
        .min(10 - hyps.len())
        .min(pool.len());
    for word in &pool[..wanted] {
        let kind = KINDS.choose(rng).expect("nonempty");
        let text = codec::encode_trigger(&Trigger::new(word, kind.name).expect("valid"));
        hyps.push((text, distractor_score(rng)));
        let prompt = codec::build_argument_prompt(context, word, cfg).expect("valid prompt");
        script
            .entry(prompt)
            .or_insert_with(|| vec![(all_none_slots(kind, cfg), 0.0)]);
    }

    let mut merged: BTreeMap<String, f64> = BTreeMap::new();
    for (text, score) in hyps {
        merged.entry(text).or_insert(round4(score));
    }
    let mut list: Vec<(String, f64)> = merged.into_iter().collect();
    list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let prompt = codec::build_trigger_prompt(context, cfg).expect("valid prompt");
    script.insert(prompt, list);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a = SyntheticCorpus::generate(&SyntheticConfig::oracle());
        let b = SyntheticCorpus::generate(&SyntheticConfig::oracle());
        assert_eq!(a, b);
        let mut other = SyntheticConfig::oracle();
        other.seed += 1;
        assert_ne!(a.train, SyntheticCorpus::generate(&other).train);
    }

    #[test]
    fn corpus_shape() {
        let c = SyntheticCorpus::generate(&SyntheticConfig::oracle());
        let all: Vec<&ContextInstance> = c.train.iter().chain(&c.dev).chain(&c.test).collect();
        assert_eq!(all.len(), 50);
        assert!(all.iter().any(|i| i.gold_frames().is_empty()));
        assert!(all.iter().any(|i| i.gold_frames().len() == 2));
        assert!(all.iter().all(|i| i.gold_frames().len() <= 2));
        assert!(all.iter().all(|i| i.unanchored_triggers().is_empty()));
        let ontology = synthetic_ontology();
        for inst in &all {
            for f in inst.gold_frames() {
                assert!(crate::event_model::validate_frame(f, &ontology).is_empty());
            }
        }
        let types: std::collections::BTreeSet<&str> = all
            .iter()
            .flat_map(|i| i.gold_frames().iter().map(|f| f.trigger().event_type()))
            .collect();
        assert_eq!(types.len(), 3);
    }

    #[test]
    fn oracle_script_puts_gold_first() {
        let c = SyntheticCorpus::generate(&SyntheticConfig::oracle());
        let cfg = CodecConfig::default();
        for inst in c.train.iter().chain(&c.test) {
            let prompt = codec::build_trigger_prompt(inst.context(), &cfg).unwrap();
            let hyps = &c.script[&prompt];
            assert_eq!(
                hyps[0].0,
                codec::encode_trigger_target(inst.gold_frames(), &cfg)
            );
            assert!(hyps[1..].iter().all(|h| h.1 <= -9.0));
            assert!(hyps.len() >= 4 && hyps.len() <= 10, "{}", hyps.len());
        }
    }

    #[test]
    fn noisy_script_often_ranks_a_distractor_first() {
        let c = SyntheticCorpus::generate(&SyntheticConfig::noisy());
        let cfg = CodecConfig::default();
        let mut wrong_top = 0;
        for inst in &c.dev {
            let prompt = codec::build_trigger_prompt(inst.context(), &cfg).unwrap();
            let hyps = &c.script[&prompt];
            assert!(hyps.len() <= 10);
            let gold: Vec<String> = if inst.gold_frames().is_empty() {
                vec![cfg.empty_token.clone()]
            } else {
                inst.gold_triggers()
                    .iter()
                    .map(codec::encode_trigger)
                    .collect()
            };
            for g in &gold {
                assert!(hyps.iter().any(|h| &h.0 == g));
            }
            if !gold.contains(&hyps[0].0) {
                wrong_top += 1;
            }
        }
        assert!(wrong_top > 20, "{wrong_top}");
    }
}
