use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{train_forest, train_nb, train_svm, vote, ClassifyError, Forest, GaussianNb, Hyperparameters, LinearSvm, Result, Row};
use crate::corpus::{Artifact, LabelClass};
use crate::features::{
    correlation_matrix, fit_vectorizer, prune_correlated, transform, FeatureSchema, LabeledSample, SentenceFeatures,
    VectorizerOptions, METRIC_NAMES,
};
use crate::seed::derive_seed;

/// Per-metric mean and standard deviation from the training fold. A zero
/// deviation is stored as 1 so constant metrics map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|j| {
                let s = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Votes {
    pub forest: LabelClass,
    pub svm: LabelClass,
    pub nb: LabelClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: LabelClass,
    pub votes: Votes,
    /// All three learners disagreed and the neutral fallback applied.
    pub three_way_tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub schema: FeatureSchema,
    pub standardizer: Standardizer,
    pub forest: Forest,
    pub svm: LinearSvm,
    pub nb: GaussianNb,
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

struct Projected {
    raw: Vec<f64>,
    sparse: Vec<(usize, f64)>,
}

fn project(schema: &FeatureSchema, features: &SentenceFeatures) -> Result<Projected> {
    let raw = schema
        .metric_names
        .iter()
        .map(|name| {
            features
                .dense
                .get(name)
                .copied()
                .ok_or_else(|| ClassifyError::MissingMetric(name.clone()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let sparse = transform(&features.terms, schema).into_iter().collect();
    Ok(Projected { raw, sparse })
}

impl EnsembleModel {
    pub fn predict(&self, features: &SentenceFeatures) -> Result<Prediction> {
        let p = project(&self.schema, features)?;
        let standardized = self.standardizer.apply(&p.raw);
        let votes = Votes {
            forest: self.forest.predict(&Row {
                dense: p.raw,
                sparse: p.sparse.clone(),
            }),
            svm: self.svm.predict(&Row {
                dense: standardized.clone(),
                sparse: p.sparse,
            }),
            nb: self.nb.predict(&standardized),
        };
        let all = [votes.forest, votes.svm, votes.nb];
        Ok(Prediction {
            label: vote(all),
            votes,
            three_way_tie: all[0] != all[1] && all[1] != all[2] && all[0] != all[2],
        })
    }
}

impl Artifact for EnsembleModel {
    const KIND: &'static str = "ensemble";

    fn check(&self) -> std::result::Result<(), String> {
        self.schema.check()?;
        let d = self.schema.metric_names.len();
        if self.standardizer.mean.len() != d || self.standardizer.std.len() != d {
            return Err("standardization parameters do not match the schema".into());
        }
        if self
            .standardizer
            .mean
            .iter()
            .chain(&self.standardizer.std)
            .any(|v| !v.is_finite())
        {
            return Err("standardization parameters must be finite".into());
        }
        if self.forest.n_features != d + self.schema.vocabulary_len() {
            return Err("forest width does not match the schema".into());
        }
        Ok(())
    }
}

/// Trains all three learners on one fold: vectorizer and metric pruning
/// are fit on `samples` only.
pub fn train_ensemble(samples: &[LabeledSample], hp: &Hyperparameters, seed: u64) -> Result<EnsembleModel> {
    hp.validate()?;
    if samples.is_empty() {
        return Err(ClassifyError::EmptyData);
    }
    let labels: Vec<LabelClass> = samples.iter().map(|s| s.label).collect();
    if labels.iter().all(|l| *l == labels[0]) {
        return Err(ClassifyError::SingleClass(labels[0]));
    }

    let docs: Vec<Vec<String>> = samples.iter().map(|s| s.features.terms.clone()).collect();
    let options = VectorizerOptions {
        ngram_max: hp.features.ngram_max,
        tfidf: hp.features.tfidf_enabled,
        vocab_cap: Some(hp.features.vocab_cap),
    };
    let schema = fit_vectorizer(&docs, &options)?;

    let all_metrics: Vec<String> = METRIC_NAMES.iter().map(|s| s.to_string()).collect();
    let full = samples
        .iter()
        .map(|s| project(&schema, &s.features).map(|p| p.raw))
        .collect::<Result<Vec<_>>>()?;
    let kept = if samples.len() >= 2 {
        let matrix = correlation_matrix(&all_metrics, &full)?;
        prune_correlated(&matrix, hp.features.prune_threshold)
    } else {
        all_metrics.clone()
    };
    let keep: BTreeSet<&str> = kept.iter().map(String::as_str).collect();
    let columns: Vec<usize> = (0..all_metrics.len()).filter(|&j| keep.contains(all_metrics[j].as_str())).collect();
    let schema = schema.with_metrics(kept);

    let raw: Vec<Vec<f64>> = full.iter().map(|r| columns.iter().map(|&j| r[j]).collect()).collect();
    let sparse: Vec<Vec<(usize, f64)>> = samples
        .iter()
        .map(|s| transform(&s.features.terms, &schema).into_iter().collect())
        .collect();
    let standardizer = Standardizer::fit(&raw);
    let standardized: Vec<Vec<f64>> = raw.iter().map(|r| standardizer.apply(r)).collect();
    let width = columns.len() + schema.vocabulary_len();

    let forest_rows: Vec<Row> = raw
        .iter()
        .zip(&sparse)
        .map(|(d, s)| Row {
            dense: d.clone(),
            sparse: s.clone(),
        })
        .collect();
    let svm_rows: Vec<Row> = standardized
        .iter()
        .zip(sparse)
        .map(|(d, s)| Row {
            dense: d.clone(),
            sparse: s,
        })
        .collect();

    let forest = train_forest(&forest_rows, &labels, width, &hp.forest, derive_seed(seed, 1))?;
    let svm = train_svm(&svm_rows, &labels, width, &hp.svm, derive_seed(seed, 2))?;
    let nb = train_nb(&standardized, &labels, &hp.nb)?;
    Ok(EnsembleModel {
        schema,
        standardizer,
        forest,
        svm,
        nb,
        hyperparameters: hp.clone(),
        seed,
    })
}

/// Labeled feature rows used for training, persisted alongside the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub samples: Vec<LabeledSample>,
}

impl Artifact for LabeledSet {
    const KIND: &'static str = "labeled-set";

    fn check(&self) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for s in &self.samples {
            if !seen.insert(&s.features.sentence_id) {
                return Err(format!("duplicate sentence id {}", s.features.sentence_id));
            }
        }
        Ok(())
    }
}
