use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codec::CodecConfig;
use crate::corpus::PairOptions;
use crate::error::{Error, Result};
use crate::generation::{FineTuneParams, GenerationConfig};
use crate::metrics::Subtask;
use crate::selector::{SelectionConfig, SelectorTrainConfig};
use crate::tuning::{default_alpha_grid, default_theta_grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusPaths {
    pub train: PathBuf,
    pub dev: PathBuf,
    pub test: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub id: String,
    /// Replay script for the `toy` backend.
    pub script: Option<PathBuf>,
    pub params: FineTuneParams,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            id: "toy".into(),
            script: None,
            params: FineTuneParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorSection {
    #[serde(flatten)]
    pub train: SelectorTrainConfig,
    pub feature_bits: u32,
    pub char_ngram: usize,
}

impl Default for SelectorSection {
    fn default() -> Self {
        SelectorSection {
            train: SelectorTrainConfig::default(),
            feature_bits: 18,
            char_ngram: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Keyword {
    Tune,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum SelectionRepr {
    Keyword(Keyword),
    Fixed(SelectionConfig),
}

/// Either fixed `(alpha, theta)` or `"tune"` to take them from the dev grid
/// search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "SelectionRepr", into = "SelectionRepr")]
pub enum SelectionMode {
    Tune,
    Fixed(SelectionConfig),
}

impl Default for SelectionMode {
    fn default() -> Self {
        SelectionMode::Fixed(SelectionConfig::default())
    }
}

impl From<SelectionRepr> for SelectionMode {
    fn from(r: SelectionRepr) -> Self {
        match r {
            SelectionRepr::Keyword(Keyword::Tune) => SelectionMode::Tune,
            SelectionRepr::Fixed(c) => SelectionMode::Fixed(c),
        }
    }
}

impl From<SelectionMode> for SelectionRepr {
    fn from(m: SelectionMode) -> Self {
        match m {
            SelectionMode::Tune => SelectionRepr::Keyword(Keyword::Tune),
            SelectionMode::Fixed(c) => SelectionRepr::Fixed(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuningConfig {
    pub alpha_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    pub metric: Subtask,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            alpha_grid: default_alpha_grid(),
            theta_grid: default_theta_grid(),
            metric: Subtask::TriggerClassification,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: CorpusPaths,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default)]
    pub codec: CodecConfig,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default)]
    pub selector: SelectorSection,
    #[serde(default)]
    pub selection: SelectionMode,
    #[serde(default)]
    pub tuning: TuningConfig,
    #[serde(default)]
    pub pairs: PairOptions,
    #[serde(default)]
    pub seed: u64,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub theta: Option<f64>,
    pub backend: Option<String>,
}

impl RunConfig {
    pub fn new(corpus: CorpusPaths) -> Self {
        RunConfig {
            corpus,
            backend: BackendConfig::default(),
            codec: CodecConfig::default(),
            generation: GenerationConfig::default(),
            selector: SelectorSection::default(),
            selection: SelectionMode::default(),
            tuning: TuningConfig::default(),
            pairs: PairOptions::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus.train);
        fix(&mut self.corpus.dev);
        fix(&mut self.corpus.test);
        if let Some(script) = &mut self.backend.script {
            fix(script);
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(id) = &o.backend {
            self.backend.id = id.clone();
        }
        if o.alpha.is_some() || o.theta.is_some() {
            let base = match self.selection {
                SelectionMode::Fixed(c) => c,
                SelectionMode::Tune => SelectionConfig::default(),
            };
            self.selection = SelectionMode::Fixed(SelectionConfig::new(
                o.alpha.unwrap_or(base.alpha),
                o.theta.unwrap_or(base.theta),
            )?);
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.codec.validate()?;
        self.generation.validate()?;
        self.selector.train.validate()?;
        if !(1..=30).contains(&self.selector.feature_bits) {
            return Err(Error::Config(
                "selector.feature_bits must be in 1..=30".into(),
            ));
        }
        if let SelectionMode::Fixed(c) = self.selection {
            c.validate()?;
        }
        for (name, grid) in [
            ("alpha_grid", &self.tuning.alpha_grid),
            ("theta_grid", &self.tuning.theta_grid),
        ] {
            if grid.is_empty() || grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Config(format!(
                    "tuning.{name} must be nonempty with values in [0, 1]"
                )));
            }
        }
        if self.backend.id != "toy" {
            return Err(Error::Config(format!(
                "unknown backend id {:?} (available: toy)",
                self.backend.id
            )));
        }
        Ok(())
    }

    /// Selector training settings; the selector seed is offset by the run seed.
    pub fn selector_train_config(&self) -> SelectorTrainConfig {
        SelectorTrainConfig {
            seed: self.selector.train.seed.wrapping_add(self.seed),
            ..self.selector.train
        }
    }

    /// SHA-256 of the canonical JSON form (object keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
