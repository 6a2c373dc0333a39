//! Pipeline stages over a run directory.
//!
//! Every stage reads its inputs from, and writes its outputs to, one run
//! directory. Artifacts carry the hash of the config that produced them;
//! timestamps live only in `run.log`.
//!
//! | stage            | reads                                   | writes |
//! |------------------|-----------------------------------------|--------|
//! | `preprocess`     | train corpus                            | `pairs.jsonl`, `ontology.json`, `load_report.json` |
//! | `gen-candidates` | `pairs.jsonl`, split corpus             | `candidates.{split}.jsonl` |
//! | `train-selector` | `candidates.train.jsonl`                | `selector.model`, `selector_report.json` |
//! | `tune`           | `candidates.dev.jsonl`, `selector.model`| `tuning.csv`, `selection.json` |
//! | `predict`        | `candidates.{split}.jsonl`              | `predictions.jsonl` |
//! | `evaluate`       | `predictions.jsonl`, split corpus       | `report.json` |
//! | `report`         | dev and split candidates                | `sweep_theta.csv`, `sweep_alpha.csv`, `ablation.json` |
//!
//! Predictions and reports for a split other than `test` get the split name
//! in the file name, e.g. `predictions.dev.jsonl`.

mod config;

use std::collections::HashMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use config::{
    BackendConfig, CorpusPaths, Overrides, RunConfig, SelectionMode, SelectorSection, TuningConfig,
};

use crate::corpus::{self, LoadReport, TrainingPair};
use crate::error::{Error, Result};
use crate::event_model::{ontology_from_corpus, ContextInstance, EventFrame, Ontology};
use crate::generation::{self, CandidateList, Seq2SeqBackend, ToyBackend};
use crate::jsonl;
use crate::metrics::{evaluate_corpus, EvalReport};
use crate::selector::{
    score_candidates, select_scored, train_selector, HashedLinearScorer, SelectionConfig,
    SelectorSample, TrainReport,
};
use crate::tuning::{grid_search, GridResult, ScoreTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!(
                "unknown split {other:?} (train, dev, test)"
            ))),
        }
    }
}

/// Process exit status for a failed command: 2 config, 3 missing artifact,
/// 4 data.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::MissingArtifact { .. } => 3,
        Error::Document { source, .. } => exit_code(source),
        _ => 4,
    }
}

/// An artifact record tagged with the hash of the producing config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub config_hash: String,
    #[serde(flatten)]
    pub record: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub events: Vec<EventFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub alpha: f64,
    pub theta: f64,
    pub metric: crate::metrics::Subtask,
    pub dev_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: Split,
    pub alpha: f64,
    pub theta: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub split: Split,
    pub selected: SplitReport,
    /// Beam scores only, with theta tuned on dev.
    pub beam_only: SplitReport,
    /// Trig-C F1 difference, selected minus beam-only.
    pub trig_c_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessSummary {
    pub pairs: usize,
    pub event_types: usize,
    pub load_report: LoadReport,
}

#[derive(Serialize, Deserialize)]
struct OntologyRecord {
    ontology: Ontology,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    model: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct ConfigRecord {
    config: RunConfig,
}

pub struct Run {
    config: RunConfig,
    dir: PathBuf,
    hash: String,
}

impl Run {
    pub fn open(config: RunConfig, dir: impl Into<PathBuf>) -> Result<Self> {
        config.validate()?;
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let hash = config.hash();
        Ok(Run { config, dir, hash })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn candidates_path(&self, split: Split) -> PathBuf {
        self.path(&format!("candidates.{split}.jsonl"))
    }

    pub fn predictions_path(&self, split: Split) -> PathBuf {
        match split {
            Split::Test => self.path("predictions.jsonl"),
            other => self.path(&format!("predictions.{other}.jsonl")),
        }
    }

    pub fn report_path(&self, split: Split) -> PathBuf {
        match split {
            Split::Test => self.path("report.json"),
            other => self.path(&format!("report.{other}.json")),
        }
    }

    /// Appends a timestamped line to `run.log`.
    pub fn log(&self, stage: &str, message: &str) {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        if let Ok(mut f) = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.path("run.log"))
        {
            let _ = writeln!(f, "{secs} [{stage}] {message}");
        }
    }

    fn log_warnings(&self, stage: &str, warnings: &[String]) {
        for w in warnings {
            self.log(stage, &format!("warning: {w}"));
        }
        if !warnings.is_empty() {
            eprintln!(
                "{stage}: {} warnings (see {})",
                warnings.len(),
                self.path("run.log").display()
            );
        }
    }

    fn require(&self, path: PathBuf, hint: &str) -> Result<PathBuf> {
        if path.exists() {
            Ok(path)
        } else {
            Err(Error::MissingArtifact {
                artifact: path,
                hint: hint.to_string(),
            })
        }
    }

    fn check_hash(&self, path: &Path, hash: &str) {
        if hash != self.hash {
            let msg = format!(
                "{} was produced by config {}, current config is {}",
                path.display(),
                short(hash),
                short(&self.hash)
            );
            eprintln!("warning: {msg}");
            self.log("provenance", &msg);
        }
    }

    fn stamp<T>(&self, record: T) -> Stamped<T> {
        Stamped {
            config_hash: self.hash.clone(),
            record,
        }
    }

    fn write_records<T: Serialize>(
        &self,
        path: &Path,
        records: impl IntoIterator<Item = T>,
    ) -> Result<()> {
        jsonl::write(path, records.into_iter().map(|r| self.stamp(r)))
    }

    fn read_records<T: DeserializeOwned>(&self, path: &Path) -> Result<Vec<T>> {
        let stamped: Vec<Stamped<T>> = jsonl::read(path)?;
        if let Some(other) = stamped.iter().find(|s| s.config_hash != self.hash) {
            self.check_hash(path, &other.config_hash);
        }
        Ok(stamped.into_iter().map(|s| s.record).collect())
    }

    fn write_doc<T: Serialize>(&self, path: &Path, record: T) -> Result<()> {
        jsonl::write_json(path, &self.stamp(record))
    }

    fn read_doc<T: DeserializeOwned>(&self, path: &Path) -> Result<T> {
        let stamped: Stamped<T> = jsonl::read_json(path)?;
        self.check_hash(path, &stamped.config_hash);
        Ok(stamped.record)
    }

    fn corpus_path(&self, split: Split) -> &Path {
        match split {
            Split::Train => &self.config.corpus.train,
            Split::Dev => &self.config.corpus.dev,
            Split::Test => &self.config.corpus.test,
        }
    }

    pub fn load_split(&self, split: Split) -> Result<(Vec<ContextInstance>, LoadReport)> {
        let path = self.corpus_path(split);
        let (instances, report) = corpus::load_corpus(path)?;
        for issue in &report.skipped {
            self.log(
                "load",
                &format!(
                    "{}:{}: skipped: {}",
                    path.display(),
                    issue.line,
                    issue.message
                ),
            );
        }
        for issue in &report.warnings {
            self.log(
                "load",
                &format!("{}:{}: {}", path.display(), issue.line, issue.message),
            );
        }
        if instances.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok((instances, report))
    }

    pub fn preprocess(&self) -> Result<PreprocessSummary> {
        self.log("preprocess", "start");
        self.write_doc(
            &self.path("config.json"),
            ConfigRecord {
                config: self.config.clone(),
            },
        )?;
        let (train, load_report) = self.load_split(Split::Train)?;
        let ontology = ontology_from_corpus(&train)?;
        let pairs =
            corpus::make_corpus_pairs(&train, &ontology, &self.config.codec, self.config.pairs)?;
        self.write_records(&self.path("pairs.jsonl"), &pairs)?;
        self.write_doc(
            &self.path("ontology.json"),
            OntologyRecord {
                ontology: ontology.clone(),
            },
        )?;
        self.write_doc(&self.path("load_report.json"), &load_report)?;
        self.log(
            "preprocess",
            &format!(
                "{} contexts, {} pairs, {} event types",
                train.len(),
                pairs.len(),
                ontology.len()
            ),
        );
        Ok(PreprocessSummary {
            pairs: pairs.len(),
            event_types: ontology.len(),
            load_report,
        })
    }

    /// Builds the configured backend and fine-tunes it on `pairs.jsonl`.
    pub fn backend(&self) -> Result<Box<dyn Seq2SeqBackend>> {
        let pairs_path = self.require(self.path("pairs.jsonl"), "run preprocess first")?;
        let pairs: Vec<TrainingPair> = self.read_records(&pairs_path)?;
        let mut backend = match self.config.backend.id.as_str() {
            "toy" => match &self.config.backend.script {
                Some(script) => ToyBackend::from_file(script).map_err(|e| {
                    Error::Config(format!("backend.script {}: {e}", script.display()))
                })?,
                None => ToyBackend::default(),
            },
            other => return Err(Error::Config(format!("unknown backend id {other:?}"))),
        };
        let params = generation::FineTuneParams {
            seed: self.config.seed,
            ..self.config.backend.params.clone()
        };
        backend.fit(&pairs, &params)?;
        Ok(Box::new(backend))
    }

    pub fn gen_candidates(&self, splits: &[Split]) -> Result<()> {
        let backend = self.backend()?;
        let scorer = self.load_scorer_if_present()?;
        for &split in splits {
            self.log("gen-candidates", &format!("start {split}"));
            let (instances, _) = self.load_split(split)?;
            let (mut lists, warnings) = generation::generate_split(
                backend.as_ref(),
                &instances,
                &self.config.generation,
                &self.config.codec,
                true,
            )?;
            self.log_warnings("gen-candidates", &warnings);
            if let Some(scorer) = &scorer {
                for list in &mut lists {
                    score_candidates(list, scorer);
                }
            }
            self.write_records(&self.candidates_path(split), &lists)?;
            let n: usize = lists.iter().map(|l| l.candidates.len()).sum();
            self.log(
                "gen-candidates",
                &format!("{split}: {} contexts, {n} candidates", lists.len()),
            );
        }
        Ok(())
    }

    fn hint_gen(split: Split) -> String {
        format!("run gen-candidates on {split} first")
    }

    pub fn read_candidates(&self, split: Split) -> Result<Vec<CandidateList>> {
        let path = self.require(self.candidates_path(split), &Self::hint_gen(split))?;
        self.read_records(&path)
    }

    fn load_scorer_if_present(&self) -> Result<Option<HashedLinearScorer>> {
        let path = self.path("selector.model");
        if !path.exists() {
            return Ok(None);
        }
        let record: ModelRecord = self.read_doc(&path)?;
        Ok(Some(HashedLinearScorer::from_json(
            &record.model.to_string(),
        )?))
    }

    pub fn load_scorer(&self) -> Result<HashedLinearScorer> {
        self.require(self.path("selector.model"), "run train-selector first")?;
        Ok(self.load_scorer_if_present()?.expect("checked above"))
    }

    /// Gold instances paired with their candidate lists, rank scores filled
    /// in when `need_rank` is set.
    pub fn scored_split(
        &self,
        split: Split,
        need_rank: bool,
    ) -> Result<Vec<(ContextInstance, CandidateList)>> {
        let mut lists = self.read_candidates(split)?;
        if need_rank && lists.iter().any(|l| !l.has_rank_scores()) {
            let scorer = self.load_scorer()?;
            for list in lists.iter_mut().filter(|l| !l.has_rank_scores()) {
                score_candidates(list, &scorer);
            }
        }
        let (instances, _) = self.load_split(split)?;
        let mut by_doc: HashMap<String, CandidateList> =
            lists.into_iter().map(|l| (l.doc_id.clone(), l)).collect();
        instances
            .into_iter()
            .map(|inst| {
                let list = by_doc.remove(inst.doc_id()).ok_or_else(|| {
                    Error::Malformed(format!(
                        "{} has no entry for {}; run gen-candidates on {split} again",
                        self.candidates_path(split).display(),
                        inst.doc_id()
                    ))
                })?;
                Ok((inst, list))
            })
            .collect()
    }

    pub fn train_selector(&self) -> Result<TrainReport> {
        self.log("train-selector", "start");
        let train = self.scored_split(Split::Train, false)?;
        let samples: Vec<SelectorSample> = train
            .into_iter()
            .map(|(inst, list)| SelectorSample::new(&inst, list))
            .collect();
        let mut scorer = HashedLinearScorer::new(
            self.config.selector.feature_bits,
            self.config.selector.char_ngram,
        );
        let report = train_selector(
            &mut scorer,
            &samples,
            &self.config.selector_train_config(),
            &self.config.codec,
        )?;
        let model: serde_json::Value = serde_json::from_str(&scorer.to_json()?)?;
        self.write_doc(&self.path("selector.model"), ModelRecord { model })?;
        self.write_doc(&self.path("selector_report.json"), &report)?;
        self.log(
            "train-selector",
            &format!(
                "{} contexts trained, {} skipped, final epoch loss {:.4}",
                report.trained_instances,
                report.skipped_instances,
                report.epoch_losses.last().copied().unwrap_or(0.0)
            ),
        );
        for split in Split::ALL {
            let path = self.candidates_path(split);
            if !path.exists() {
                continue;
            }
            let mut lists: Vec<CandidateList> = self.read_records(&path)?;
            for list in &mut lists {
                score_candidates(list, &scorer);
            }
            self.write_records(&path, &lists)?;
        }
        Ok(report)
    }

    pub fn tune(&self) -> Result<GridResult> {
        self.log("tune", "start");
        let dev = self.scored_split(Split::Dev, true)?;
        let t = &self.config.tuning;
        let result = grid_search(&dev, &t.alpha_grid, &t.theta_grid, t.metric)?;
        std::fs::write(
            self.path("tuning.csv"),
            result.table.to_csv_stamped(&self.hash)?,
        )
        .map_err(|e| Error::io(self.path("tuning.csv"), e))?;
        self.write_doc(
            &self.path("selection.json"),
            SelectionRecord {
                alpha: result.alpha,
                theta: result.theta,
                metric: result.metric,
                dev_score: result.best,
            },
        )?;
        self.log(
            "tune",
            &format!(
                "alpha={} theta={} dev {}={:.4}",
                result.alpha,
                result.theta,
                result.metric.label(),
                result.best
            ),
        );
        Ok(result)
    }

    /// The `(alpha, theta)` that `predict` and `report` use.
    pub fn selection(&self) -> Result<SelectionConfig> {
        match self.config.selection {
            SelectionMode::Fixed(c) => Ok(c),
            SelectionMode::Tune => {
                let path = self.require(self.path("selection.json"), "run tune first")?;
                let r: SelectionRecord = self.read_doc(&path)?;
                SelectionConfig::new(r.alpha, r.theta)
            }
        }
    }

    pub fn predict(&self, split: Split) -> Result<Vec<Prediction>> {
        let cfg = self.selection()?;
        self.log(
            "predict",
            &format!("{split} alpha={} theta={}", cfg.alpha, cfg.theta),
        );
        let lists = self.scored_split(split, cfg.alpha != 0.0)?;
        let predictions = lists
            .iter()
            .map(|(_, list)| {
                let selection = select_scored(list, &cfg)?;
                if selection.tied_at_threshold {
                    self.log(
                        "predict",
                        &format!("{}: every candidate tied at theta", list.doc_id),
                    );
                }
                Ok(Prediction {
                    doc_id: list.doc_id.clone(),
                    events: list.frames_for(&selection.triggers),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        self.write_records(&self.predictions_path(split), &predictions)?;
        Ok(predictions)
    }

    pub fn evaluate(&self, split: Split) -> Result<SplitReport> {
        let path = self.require(
            self.predictions_path(split),
            &format!("run predict on {split} first"),
        )?;
        let predictions: Vec<Prediction> = self.read_records(&path)?;
        let (gold, _) = self.load_split(split)?;
        let pairs: Vec<(String, Vec<EventFrame>)> = predictions
            .into_iter()
            .map(|p| (p.doc_id, p.events))
            .collect();
        let report = evaluate_corpus(&pairs, &gold)?;
        let cfg = self.selection()?;
        let out = SplitReport {
            split,
            alpha: cfg.alpha,
            theta: cfg.theta,
            report,
        };
        self.write_doc(&self.report_path(split), &out)?;
        self.log(
            "evaluate",
            &format!(
                "{split}: Trig-I {:.4} Trig-C {:.4} Arg-I {:.4} Arg-C {:.4}",
                report.trig_i.f1, report.trig_c.f1, report.arg_i.f1, report.arg_c.f1
            ),
        );
        Ok(out)
    }

    /// Writes the theta sweep (at the selected alpha), the alpha sweep (at
    /// the selected theta) and the beam-only comparison for `split`.
    pub fn report(&self, split: Split) -> Result<Ablation> {
        let cfg = self.selection()?;
        let t = &self.config.tuning;
        let eval = self.scored_split(split, true)?;
        let dev = self.scored_split(Split::Dev, true)?;

        let sweep_theta = ScoreTable::evaluate(&eval, &[cfg.alpha], &t.theta_grid)?;
        let sweep_alpha = ScoreTable::evaluate(&eval, &t.alpha_grid, &[cfg.theta])?;
        for (name, table) in [
            ("sweep_theta.csv", &sweep_theta),
            ("sweep_alpha.csv", &sweep_alpha),
        ] {
            std::fs::write(self.path(name), table.to_csv_stamped(&self.hash)?)
                .map_err(|e| Error::io(self.path(name), e))?;
        }

        let beam = grid_search(&dev, &[0.0], &t.theta_grid, t.metric)?;
        let beam_cfg = beam.selection();
        let selected = crate::tuning::evaluate_selection(&eval, &cfg)?;
        let beam_only = crate::tuning::evaluate_selection(&eval, &beam_cfg)?;
        let ablation = Ablation {
            split,
            selected: SplitReport {
                split,
                alpha: cfg.alpha,
                theta: cfg.theta,
                report: selected,
            },
            beam_only: SplitReport {
                split,
                alpha: 0.0,
                theta: beam_cfg.theta,
                report: beam_only,
            },
            trig_c_gain: selected.trig_c.f1 - beam_only.trig_c.f1,
        };
        self.write_doc(&self.path("ablation.json"), &ablation)?;
        self.log(
            "report",
            &format!(
                "{split}: selected Trig-C {:.4}, beam-only Trig-C {:.4}",
                selected.trig_c.f1, beam_only.trig_c.f1
            ),
        );
        Ok(ablation)
    }

    /// Every stage in order: preprocess, candidates for all splits, selector
    /// training, tuning, prediction, evaluation and the sweeps, all on test.
    pub fn pipeline(&self) -> Result<SplitReport> {
        self.preprocess()?;
        self.gen_candidates(&Split::ALL)?;
        self.train_selector()?;
        self.tune()?;
        self.predict(Split::Test)?;
        let report = self.evaluate(Split::Test)?;
        self.report(Split::Test)?;
        Ok(report)
    }
}

fn short(hash: &str) -> &str {
    &hash[..hash.len().min(12)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        let missing = Error::MissingArtifact {
            artifact: "a".into(),
            hint: "run gen-candidates on dev first".into(),
        };
        assert!(missing
            .to_string()
            .contains("run gen-candidates on dev first"));
        assert_eq!(exit_code(&missing), 3);
        assert_eq!(exit_code(&Error::EmptyCorpus), 4);
        assert_eq!(exit_code(&Error::Config("x".into()).in_doc("d")), 2);
    }

    #[test]
    fn split_names() {
        for s in Split::ALL {
            assert_eq!(s.name().parse::<Split>().unwrap(), s);
        }
        assert!("validation".parse::<Split>().is_err());
    }

    #[test]
    fn stamped_flattens() {
        let p = Stamped {
            config_hash: "h".into(),
            record: Prediction {
                doc_id: "d".into(),
                events: vec![],
            },
        };
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"{"config_hash":"h","doc_id":"d","events":[]}"#);
        assert_eq!(
            serde_json::from_str::<Stamped<Prediction>>(&text).unwrap(),
            p
        );
    }
}
