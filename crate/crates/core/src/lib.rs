//! Sentence-level sentiment classification of team chat logs.
//!
//! The pipeline ingests a chat export, cleans and anonymizes it, computes
//! per-sentence metrics, trains a voting ensemble of a random forest, a
//! linear SVM and Gaussian naive Bayes (hyperparameters found by an
//! evolutionary search), and aggregates labels into a daily mood series.

pub mod classify;
pub mod corpus;
pub mod evaluate;
pub mod evolve;
pub mod features;
pub mod fixture;
pub mod lexicons;
pub mod mood;
pub mod pipeline;
pub mod preprocess;
pub mod seed;

pub use classify::{EnsembleModel, Hyperparameters, Prediction};
pub use corpus::{Artifact, Corpus, LabelClass, Message};
pub use evaluate::{ClassificationReport, ConfusionMatrix};
pub use evolve::{EvolutionConfig, EvolutionHistory, Genome};
pub use features::{FeatureSchema, LabeledSample, SentenceFeatures};
pub use mood::MoodSeries;
pub use pipeline::{LabelRecord, RunConfig};
pub use preprocess::{Sentence, SentenceStore};
