use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use super::labels::{label_session, load_labels, save_labels, training_labels, LabelRecord, MODEL_RATER};
use super::{LabelSource, PipelineError, Result, RunConfig, RunLock, SourceFormat};
use crate::classify::{EnsembleModel, LabeledSet};
use crate::corpus::{load, parse_generic_jsonl_with, parse_zulip_export_with, persist, write_atomic, Artifact, Corpus, LabelClass};
use crate::evaluate::report;
use crate::evolve::{cross_validate, run_evolution};
use crate::features::{correlation_matrix, write_feature_csv, FeatureExtractor, FeatureSet, LabeledSample, METRIC_NAMES};
use crate::lexicons::{formality_markers, load_emoticons, load_polarity, Lexicons};
use crate::mood::{daily_series, MoodSeries, TimedLabel};
use crate::preprocess::{preprocess_corpus, Anonymizer, PseudonymMap, SentenceSplitter, SentenceStore, SpellDictionary};
use crate::seed::derive_seed;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn require_input(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(PipelineError::Config(format!("input file not found: {}", path.display())))
    }
}

fn require<T: Artifact>(path: &Path, command: &'static str) -> Result<T> {
    if !path.exists() {
        return Err(PipelineError::MissingArtifact {
            path: path.to_path_buf(),
            command,
        });
    }
    Ok(load(path)?)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    Ok(write_atomic(path, text.as_bytes())?)
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn load_lexicons(config: &RunConfig) -> Result<Lexicons> {
    let i = &config.inputs;
    let mut lexicons = Lexicons::default();
    for p in &i.polarity {
        require_input(p)?;
        lexicons.polarity.merge(load_polarity(p)?);
    }
    if let Some(p) = &i.emoticons {
        require_input(p)?;
        lexicons.emoticons = load_emoticons(p)?;
    }
    if let Some(p) = &i.formality {
        require_input(p)?;
        lexicons.formality = formality_markers(p)?;
    }
    Ok(lexicons)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestSummary {
    pub messages: usize,
    pub sentences: usize,
    pub removed: usize,
}

impl fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} messages, {} sentences, {} removed by cleaning",
            self.messages, self.sentences, self.removed
        )
    }
}

/// Parses the export, then cleans, splits and anonymizes every message.
pub fn cmd_ingest(config: &RunConfig) -> Result<IngestSummary> {
    let i = &config.inputs;
    let source = i
        .corpus
        .as_deref()
        .ok_or_else(|| PipelineError::Config("no corpus path given (set inputs.corpus)".into()))?;
    let file = File::open(source).map_err(io_err(source))?;
    let roster = match &i.roster {
        Some(p) => {
            require_input(p)?;
            read_lines(p)?
        }
        None => Vec::new(),
    };
    let mut splitter = SentenceSplitter::default();
    if let Some(p) = &i.abbreviations {
        require_input(p)?;
        let file = File::open(p).map_err(io_err(p))?;
        splitter.add_abbreviations(SentenceSplitter::read_abbreviations(file).map_err(io_err(p))?);
    }
    if let Some(p) = &i.emoticons {
        require_input(p)?;
        splitter.add_emoticons(load_emoticons(p)?.glyphs());
    }

    let _lock = RunLock::acquire(&config.run_dir)?;
    let mut map = PseudonymMap::seeded(&roster);
    let mut corpus: Corpus = match i.format {
        SourceFormat::Zulip => parse_zulip_export_with(file, &mut map)?,
        SourceFormat::Jsonl => parse_generic_jsonl_with(file, &mut map)?,
    };
    let mut anonymizer = Anonymizer::new(&roster);
    let store = preprocess_corpus(&mut corpus, &splitter, &mut anonymizer, &mut map);

    let paths = config.paths();
    persist(&corpus, &paths.corpus())?;
    persist(&store, &paths.sentences())?;
    persist(&map, &paths.pseudonyms())?;
    Ok(IngestSummary {
        messages: corpus.len(),
        sentences: store.sentences.len(),
        removed: store.removed.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSummary {
    pub labeled: usize,
    pub skipped: usize,
    pub remaining: usize,
    pub total_records: usize,
}

impl fmt::Display for LabelSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "labeled {} sentences ({} skipped, {} remaining); {} records on file",
            self.labeled, self.skipped, self.remaining, self.total_records
        )
    }
}

/// Interactive labeling; `interactive` tells whether `input` is a terminal.
pub fn cmd_label<R: BufRead, W: Write>(
    config: &RunConfig,
    rater: &str,
    round: u32,
    input: &mut R,
    output: &mut W,
    interactive: bool,
) -> Result<LabelSummary> {
    let paths = config.paths();
    if !interactive {
        return Err(PipelineError::NotInteractive { labels: paths.labels });
    }
    if rater == MODEL_RATER {
        return Err(PipelineError::Labels(format!("rater name `{MODEL_RATER}` is reserved for predictions")));
    }
    if round < 1 {
        return Err(PipelineError::Labels("round must be at least 1".into()));
    }
    let store: SentenceStore = require(&paths.sentences(), "ingest")?;
    let _lock = RunLock::acquire(&config.run_dir)?;
    let mut records = if paths.labels.exists() {
        load_labels(&paths.labels)?
    } else {
        Vec::new()
    };
    let now = || config.timestamp();
    let session = label_session(input, output, &store, &mut records, rater, round, config.seed, &now)?;
    save_labels(&paths.labels, &records)?;
    Ok(LabelSummary {
        labeled: session.labeled,
        skipped: session.skipped,
        remaining: session.remaining,
        total_records: records.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeaturizeSummary {
    pub sentences: usize,
    pub metrics: usize,
}

impl fmt::Display for FeaturizeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} sentences, {} metrics each", self.sentences, self.metrics)
    }
}

/// Dense metrics and terms for every sentence, plus the CSV dump and the
/// metric correlation matrix.
pub fn cmd_featurize(config: &RunConfig) -> Result<FeaturizeSummary> {
    let paths = config.paths();
    let corpus: Corpus = require(&paths.corpus(), "ingest")?;
    let store: SentenceStore = require(&paths.sentences(), "ingest")?;
    let lexicons = load_lexicons(config)?;
    let mut extractor = FeatureExtractor::new(Arc::new(lexicons));
    if let Some(p) = &config.inputs.dictionary {
        require_input(p)?;
        let dict = SpellDictionary::from_reader(File::open(p).map_err(io_err(p))?)?;
        extractor = extractor.with_dictionary(Arc::new(dict));
    }
    let _lock = RunLock::acquire(&config.run_dir)?;
    let mut set = FeatureSet::default();
    for sentence in &store.sentences {
        let message = corpus.get(&sentence.message_id).ok_or_else(|| {
            PipelineError::Config(format!(
                "sentence {} refers to unknown message {}; re-run `chatmood ingest`",
                sentence.id(),
                sentence.message_id
            ))
        })?;
        set.rows.push(extractor.analyze(sentence, message));
    }
    persist(&set, &paths.features())?;

    let names: Vec<String> = METRIC_NAMES.iter().map(|s| s.to_string()).collect();
    let mut csv = Vec::new();
    write_feature_csv(&mut csv, &names, &set.rows)?;
    write_atomic(&paths.file("features.csv"), &csv)?;
    if set.rows.len() >= 2 {
        let rows: Vec<Vec<f64>> = set.rows.iter().map(|r| names.iter().map(|n| r.dense[n]).collect()).collect();
        write_text(&paths.file("correlation.csv"), &correlation_matrix(&names, &rows)?.to_csv())?;
    }
    Ok(FeaturizeSummary {
        sentences: set.rows.len(),
        metrics: names.len(),
    })
}

fn labeled_samples(config: &RunConfig, features: &FeatureSet) -> Result<(Vec<LabeledSample>, usize)> {
    let paths = config.paths();
    if !paths.labels.exists() {
        return Err(PipelineError::MissingArtifact {
            path: paths.labels,
            command: "label",
        });
    }
    let records = load_labels(&paths.labels)?;
    let truth = training_labels(&records, config.rater.as_deref());
    let mut samples = Vec::new();
    for row in &features.rows {
        if let Some(&label) = truth.get(&row.sentence_id) {
            samples.push(LabeledSample {
                features: row.clone(),
                label,
            });
        }
    }
    let unmatched = truth.len() - samples.len();
    if samples.is_empty() {
        return Err(PipelineError::Labels(format!(
            "none of the {} labels in {} match a featurized sentence",
            truth.len(),
            paths.labels.display()
        )));
    }
    Ok((samples, unmatched))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub samples: usize,
    pub unmatched_labels: usize,
    pub generations: usize,
    pub best_fitness: f64,
    pub best_mean_fitness: f64,
    pub holdout_accuracy: f64,
    pub diagnostics: Vec<String>,
}

impl fmt::Display for TrainSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} labeled sentences, {} generations; best fitness {:.4}, best generation mean {:.4}, held-out accuracy {:.4}",
            self.samples, self.generations, self.best_fitness, self.best_mean_fitness, self.holdout_accuracy
        )?;
        if self.unmatched_labels > 0 {
            write!(f, "\nwarning: {} labels matched no featurized sentence", self.unmatched_labels)?;
        }
        for d in &self.diagnostics {
            write!(f, "\nwarning: a fitness fold failed: {d}")?;
        }
        Ok(())
    }
}

/// Evolutionary search; persists the retrained best model and the history.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let paths = config.paths();
    let features: FeatureSet = require(&paths.features(), "featurize")?;
    let (samples, unmatched) = labeled_samples(config, &features)?;
    let evolution = config.evolution_config();
    evolution.validate()?;
    let _lock = RunLock::acquire(&config.run_dir)?;
    let set = LabeledSet { samples };
    persist(&set, &paths.labeled_set())?;
    let outcome = run_evolution(&set.samples, &evolution)?;
    persist(&outcome.model, &paths.model())?;
    persist(&outcome.history, &paths.history())?;
    write_text(&paths.file("history.csv"), &outcome.history.to_csv())?;
    write_text(&paths.file("holdout_confusion.csv"), &outcome.final_confusion.to_csv())?;
    Ok(TrainSummary {
        samples: set.samples.len(),
        unmatched_labels: unmatched,
        generations: evolution.generations,
        best_fitness: outcome.best_fitness,
        best_mean_fitness: outcome
            .history
            .generations
            .iter()
            .map(|g| g.mean_fitness)
            .fold(0.0, f64::max),
        holdout_accuracy: outcome.final_test_accuracy,
        diagnostics: outcome.history.diagnostics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateSummary {
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
    pub report_text: String,
}

impl fmt::Display for EvaluateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.accuracies.iter().enumerate() {
            writeln!(f, "repeat {:>2}: accuracy {a:.4}", i + 1)?;
        }
        writeln!(f, "mean accuracy {:.4} (stddev {:.4})\n", self.mean, self.stddev)?;
        write!(f, "{}", self.report_text)
    }
}

/// Repeated stratified splits with the trained model's hyperparameters.
pub fn cmd_evaluate(config: &RunConfig) -> Result<EvaluateSummary> {
    let paths = config.paths();
    let model: EnsembleModel = require(&paths.model(), "train")?;
    let set: LabeledSet = require(&paths.labeled_set(), "train")?;
    let _lock = RunLock::acquire(&config.run_dir)?;
    let cv = cross_validate(
        &model.hyperparameters,
        &set.samples,
        config.repeats,
        config.test_fraction,
        derive_seed(config.seed, 0xE7A1),
    )?;
    let rep = report(&cv.confusion)?;
    persist(&cv, &paths.evaluation())?;
    persist(&rep, &paths.report())?;
    write_text(&paths.file("accuracies.csv"), &cv.to_csv())?;
    write_text(&paths.file("confusion.csv"), &cv.confusion.to_csv())?;
    write_text(&paths.file("report.csv"), &rep.to_csv())?;
    let text = format!("{}\n{}", cv.confusion.render_text(), rep.render_text());
    write_text(&paths.file("report.txt"), &text)?;
    Ok(EvaluateSummary {
        accuracies: cv.accuracies,
        mean: cv.mean,
        stddev: cv.stddev,
        report_text: text,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreSummary {
    pub sentences: usize,
    pub per_class: [usize; 3],
    pub three_way_ties: usize,
}

impl fmt::Display for ScoreSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} sentences scored: {} positive, {} neutral, {} negative ({} three-way ties resolved to neutral)",
            self.sentences, self.per_class[0], self.per_class[1], self.per_class[2], self.three_way_ties
        )
    }
}

/// Predicts every featurized sentence; writes label records by rater
/// `model` and a per-learner vote audit.
pub fn cmd_score(config: &RunConfig) -> Result<ScoreSummary> {
    let paths = config.paths();
    let model: EnsembleModel = require(&paths.model(), "train")?;
    let features: FeatureSet = require(&paths.features(), "featurize")?;
    let _lock = RunLock::acquire(&config.run_dir)?;
    let stamp = config.timestamp();
    let mut records = Vec::with_capacity(features.rows.len());
    let mut audit = String::from("sentence_id,label,forest,svm,nb,three_way_tie\n");
    let mut summary = ScoreSummary {
        sentences: 0,
        per_class: [0; 3],
        three_way_ties: 0,
    };
    for row in &features.rows {
        let p = model.predict(row)?;
        records.push(LabelRecord {
            sentence_id: row.sentence_id.clone(),
            klass: p.label,
            rater: MODEL_RATER.to_string(),
            round: 1,
            labeled_at: stamp.clone(),
        });
        audit.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.sentence_id, p.label, p.votes.forest, p.votes.svm, p.votes.nb, p.three_way_tie
        ));
        summary.sentences += 1;
        summary.per_class[p.label.index()] += 1;
        summary.three_way_ties += usize::from(p.three_way_tie);
    }
    save_labels(&paths.predictions(), &records)?;
    write_text(&paths.file("predictions_audit.csv"), &audit)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub days: usize,
    pub sentences: usize,
    pub unmatched: usize,
    pub slope: Option<f64>,
}

impl fmt::Display for ReportSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} days from {} sentences", self.days, self.sentences)?;
        if let Some(s) = self.slope {
            write!(f, "; trend {s:+.4} per day")?;
        }
        if self.unmatched > 0 {
            write!(f, "\nwarning: {} labels matched no ingested sentence", self.unmatched)?;
        }
        Ok(())
    }
}

/// Daily emotionality series from human or predicted labels, rendered as
/// CSV and SVG.
pub fn cmd_report(config: &RunConfig, source: LabelSource) -> Result<ReportSummary> {
    let paths = config.paths();
    let corpus: Corpus = require(&paths.corpus(), "ingest")?;
    let store: SentenceStore = require(&paths.sentences(), "ingest")?;
    let labels: BTreeMap<String, LabelClass> = match source {
        LabelSource::Labels => {
            if !paths.labels.exists() {
                return Err(PipelineError::MissingArtifact {
                    path: paths.labels,
                    command: "label",
                });
            }
            training_labels(&load_labels(&paths.labels)?, config.rater.as_deref())
        }
        LabelSource::Predicted => {
            if !paths.predictions().exists() {
                return Err(PipelineError::MissingArtifact {
                    path: paths.predictions(),
                    command: "score",
                });
            }
            load_labels(&paths.predictions())?
                .into_iter()
                .map(|r| (r.sentence_id, r.klass))
                .collect()
        }
    };
    let _lock = RunLock::acquire(&config.run_dir)?;
    let mut items = Vec::new();
    for sentence in &store.sentences {
        if let Some(&class) = labels.get(&sentence.id()) {
            if let Some(m) = corpus.get(&sentence.message_id) {
                items.push(TimedLabel {
                    timestamp: m.timestamp,
                    class,
                });
            }
        }
    }
    let series: MoodSeries = daily_series(&items, config.timezone_offset_minutes)?;
    persist(&series, &paths.mood(source, "json"))?;
    series.write_csv(&paths.mood(source, "csv"))?;
    let title = match source {
        LabelSource::Labels => "Emotionality score per day (labels)",
        LabelSource::Predicted => "Emotionality score per day (predicted)",
    };
    series.write_svg(&paths.mood(source, "svg"), title)?;
    Ok(ReportSummary {
        days: series.points.len(),
        sentences: items.len(),
        unmatched: labels.len() - items.len(),
        slope: series.trend.map(|t| t.slope),
    })
}
