//! The three base learners and the hard-voting ensemble.
//!
//! Dense metrics feed all three learners; sparse term weights feed the
//! forest and the SVM only. SVM and naive Bayes see dense metrics
//! standardized with training statistics, the forest sees raw values.

mod ensemble;
mod forest;
mod nb;
mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabelClass;
use crate::features::FeatureError;

pub use ensemble::{train_ensemble, EnsembleModel, LabeledSet, Prediction, Standardizer, Votes};
pub use forest::{gini, train_forest, DecisionTree, Forest, Node};
pub use nb::{train_nb, GaussianNb};
pub use svm::{hinge_loss, train_svm, LinearSvm};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("no training samples")]
    EmptyData,
    #[error("training data contains a single class ({0}); at least two are required")]
    SingleClass(LabelClass),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("features do not match the model schema: missing metric `{0}`")]
    MissingMetric(String),
    #[error("{rows} rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

pub type Result<T, E = ClassifyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Share of features drawn as split candidates at each node.
    pub feature_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub l2_lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub variance_smoothing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub ngram_max: usize,
    pub tfidf_enabled: bool,
    pub vocab_cap: usize,
    pub prune_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub forest: ForestParams,
    pub svm: SvmParams,
    pub nb: NbParams,
    pub features: FeatureParams,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            forest: ForestParams {
                n_trees: 25,
                max_depth: 8,
                min_leaf: 1,
                feature_fraction: 0.3,
            },
            svm: SvmParams {
                l2_lambda: 1e-3,
                epochs: 15,
                learning_rate: 0.1,
            },
            nb: NbParams {
                variance_smoothing: 1e-9,
            },
            features: FeatureParams {
                ngram_max: 1,
                tfidf_enabled: true,
                vocab_cap: 500,
                prune_threshold: 0.9,
            },
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(ClassifyError::InvalidHyperparameters(m.to_string()));
        let fraction = |v: f64| v > 0.0 && v <= 1.0;
        if self.forest.n_trees < 1 {
            return fail("n_trees must be at least 1");
        }
        if self.forest.max_depth < 1 {
            return fail("max_depth must be at least 1");
        }
        if self.forest.min_leaf < 1 {
            return fail("min_leaf must be at least 1");
        }
        if !fraction(self.forest.feature_fraction) {
            return fail("feature_fraction must be in (0, 1]");
        }
        if !(self.svm.l2_lambda > 0.0 && self.svm.l2_lambda.is_finite()) {
            return fail("l2_lambda must be positive");
        }
        if self.svm.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if !(self.svm.learning_rate > 0.0 && self.svm.learning_rate * self.svm.l2_lambda < 1.0) {
            return fail("learning_rate must be positive with learning_rate * l2_lambda < 1");
        }
        if !(self.nb.variance_smoothing >= 0.0 && self.nb.variance_smoothing.is_finite()) {
            return fail("variance_smoothing must be non-negative");
        }
        if self.features.ngram_max < 1 {
            return fail("ngram_max must be at least 1");
        }
        if self.features.vocab_cap < 1 {
            return fail("vocab_cap must be at least 1");
        }
        if !fraction(self.features.prune_threshold) {
            return fail("prune_threshold must be in (0, 1]");
        }
        Ok(())
    }
}

/// Majority of three votes; a three-way split resolves to neutral.
pub fn vote(votes: [LabelClass; 3]) -> LabelClass {
    let mut counts = [0usize; 3];
    for v in votes {
        counts[v.index()] += 1;
    }
    match counts.iter().position(|&c| c >= 2) {
        Some(i) => LabelClass::ALL[i],
        None => LabelClass::Neutral,
    }
}

/// Argmax over per-class scores (`None` = class unavailable). Any tie for
/// the top score resolves to neutral.
pub fn resolve_scores(scores: [Option<f64>; 3]) -> LabelClass {
    let best = scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = (0..3).filter(|&i| scores[i] == Some(best)).collect();
    match winners.as_slice() {
        [only] => LabelClass::ALL[*only],
        _ => LabelClass::Neutral,
    }
}

/// One training/prediction row: dense values then sparse `(index, value)`
/// pairs whose indices start after the dense block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub dense: Vec<f64>,
    pub sparse: Vec<(usize, f64)>,
}

impl Row {
    pub fn dense(values: Vec<f64>) -> Self {
        Row {
            dense: values,
            sparse: Vec::new(),
        }
    }

    /// Value of feature `j` in the combined dense+sparse space.
    pub fn value(&self, j: usize) -> f64 {
        if j < self.dense.len() {
            return self.dense[j];
        }
        let k = j - self.dense.len();
        match self.sparse.binary_search_by_key(&k, |&(i, _)| i) {
            Ok(p) => self.sparse[p].1,
            Err(_) => 0.0,
        }
    }
}
