//! Staged command bodies. Stages communicate only through files in the run
//! directory, so any stage can be re-run on its own.

mod commands;
mod labels;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::ClassifyError;
use crate::corpus::CorpusError;
use crate::evaluate::EvaluateError;
use crate::evolve::{EvolutionConfig, EvolveError};
use crate::features::FeatureError;
use crate::lexicons::LexiconError;
use crate::mood::MoodError;
use crate::preprocess::PreprocessError;

pub use commands::{
    cmd_evaluate, cmd_featurize, cmd_ingest, cmd_label, cmd_report, cmd_score, cmd_train, EvaluateSummary,
    FeaturizeSummary, IngestSummary, LabelSummary, ReportSummary, ScoreSummary, TrainSummary,
};
pub use labels::{
    label_session, labels_to_csv, load_labels, pending_sentences, read_labels, save_labels, training_labels,
    validate_records, LabelRecord, SessionSummary, GUIDANCE, MODEL_RATER,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Evolve(#[from] EvolveError),
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
    #[error(transparent)]
    Mood(#[from] MoodError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{} not found; run `chatmood {command}` first", path.display())]
    MissingArtifact { path: PathBuf, command: &'static str },
    #[error("labels: {0}")]
    Labels(String),
    #[error(
        "labeling needs an interactive terminal; to label without one, write CSV rows \
         `sentence_id,class,rater,round,labeled_at` to {}",
        labels.display()
    )]
    NotInteractive { labels: PathBuf },
    #[error("{} exists: another command is using this run directory (delete the file if no command is running)", .0.display())]
    Locked(PathBuf),
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    #[default]
    Zulip,
    Jsonl,
}

impl FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "zulip" => Ok(SourceFormat::Zulip),
            "jsonl" => Ok(SourceFormat::Jsonl),
            _ => Err(format!("unknown corpus format `{s}` (expected zulip or jsonl)")),
        }
    }
}

/// Which labels feed a mood report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    Labels,
    Predicted,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            LabelSource::Labels => "labels",
            LabelSource::Predicted => "predicted",
        }
    }
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "labels" => Ok(LabelSource::Labels),
            "predicted" => Ok(LabelSource::Predicted),
            _ => Err(format!("unknown label source `{s}` (expected labels or predicted)")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputPaths {
    pub corpus: Option<PathBuf>,
    pub format: SourceFormat,
    /// Merged in order; a scored entry beats a class-only one.
    pub polarity: Vec<PathBuf>,
    pub emoticons: Option<PathBuf>,
    pub formality: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
    /// Names to pseudonymize in message text, one per line.
    pub roster: Option<PathBuf>,
    /// Defaults to `labels.csv` in the run directory.
    pub labels: Option<PathBuf>,
}

/// Optional overrides of [`EvolutionConfig`]; the seed always comes from
/// the run config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionOverrides {
    pub population_size: Option<usize>,
    pub generations: Option<usize>,
    pub tournament_size: Option<usize>,
    pub elitism_count: Option<usize>,
    pub mutation_rate: Option<f64>,
    pub crossover_rate: Option<f64>,
    pub fitness_splits: Option<usize>,
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run_dir: PathBuf,
    pub seed: u64,
    pub timezone_offset_minutes: i32,
    /// Freeze embedded wall-clock timestamps.
    pub deterministic: bool,
    /// Restrict ground truth to this rater's labels.
    pub rater: Option<String>,
    /// Repeated splits in `evaluate`.
    pub repeats: usize,
    /// Test share of every split.
    pub test_fraction: f64,
    pub inputs: InputPaths,
    pub evolution: EvolutionOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run_dir: PathBuf::from("run"),
            seed: 42,
            timezone_offset_minutes: 0,
            deterministic: false,
            rater: None,
            repeats: 20,
            test_fraction: 0.1,
            inputs: InputPaths::default(),
            evolution: EvolutionOverrides::default(),
        }
    }
}

impl RunConfig {
    /// Parses TOML; relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(config.resolved(base))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml(&text, base).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    pub fn resolved(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.run_dir);
        let i = &mut self.inputs;
        for p in i
            .corpus
            .iter_mut()
            .chain(i.polarity.iter_mut())
            .chain(i.emoticons.iter_mut())
            .chain(i.formality.iter_mut())
            .chain(i.dictionary.iter_mut())
            .chain(i.abbreviations.iter_mut())
            .chain(i.roster.iter_mut())
            .chain(i.labels.iter_mut())
        {
            fix(p);
        }
        self
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        let d = EvolutionConfig::default();
        let o = &self.evolution;
        EvolutionConfig {
            population_size: o.population_size.unwrap_or(d.population_size),
            generations: o.generations.unwrap_or(d.generations),
            tournament_size: o.tournament_size.unwrap_or(d.tournament_size),
            elitism_count: o.elitism_count.unwrap_or(d.elitism_count),
            mutation_rate: o.mutation_rate.unwrap_or(d.mutation_rate),
            crossover_rate: o.crossover_rate.unwrap_or(d.crossover_rate),
            fitness_splits: o.fitness_splits.unwrap_or(d.fitness_splits),
            test_fraction: o.test_fraction.unwrap_or(self.test_fraction),
            seed: self.seed,
        }
    }

    pub fn paths(&self) -> RunPaths {
        RunPaths {
            dir: self.run_dir.clone(),
            labels: self.inputs.labels.clone().unwrap_or_else(|| self.run_dir.join("labels.csv")),
        }
    }

    /// Wall-clock time for label records, or the epoch when deterministic.
    pub fn timestamp(&self) -> String {
        if self.deterministic {
            "1970-01-01T00:00:00Z".to_string()
        } else {
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        }
    }
}

/// File layout of a run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub dir: PathBuf,
    pub labels: PathBuf,
}

impl RunPaths {
    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }
    pub fn corpus(&self) -> PathBuf {
        self.file("corpus.json")
    }
    pub fn sentences(&self) -> PathBuf {
        self.file("sentences.json")
    }
    pub fn pseudonyms(&self) -> PathBuf {
        self.file("pseudonyms.json")
    }
    pub fn features(&self) -> PathBuf {
        self.file("features.json")
    }
    pub fn labeled_set(&self) -> PathBuf {
        self.file("labeled_set.json")
    }
    pub fn model(&self) -> PathBuf {
        self.file("model.json")
    }
    pub fn history(&self) -> PathBuf {
        self.file("history.json")
    }
    pub fn evaluation(&self) -> PathBuf {
        self.file("evaluation.json")
    }
    pub fn report(&self) -> PathBuf {
        self.file("report.json")
    }
    pub fn predictions(&self) -> PathBuf {
        self.file("predictions.csv")
    }
    pub fn mood(&self, source: LabelSource, ext: &str) -> PathBuf {
        self.file(&format!("mood_{source}.{ext}"))
    }
}

/// Single-writer guard on a run directory, released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join(".lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(RunLock { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(PipelineError::Locked(path)),
            Err(source) => Err(PipelineError::Io { path, source }),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}
