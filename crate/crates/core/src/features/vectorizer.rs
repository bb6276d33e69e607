use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{FeatureError, METRIC_NAMES};
use crate::corpus::Artifact;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerOptions {
    /// Terms are n-grams for n in 1..=ngram_max.
    pub ngram_max: usize,
    /// Off: raw counts, no idf, no normalization.
    pub tfidf: bool,
    /// Keep at most this many terms, by document frequency.
    pub vocab_cap: Option<usize>,
}

impl Default for VectorizerOptions {
    fn default() -> Self {
        VectorizerOptions {
            ngram_max: 1,
            tfidf: true,
            vocab_cap: None,
        }
    }
}

/// Active dense metric names plus the fitted vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "schema")]
pub struct FeatureSchema {
    pub metric_names: Vec<String>,
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub options: VectorizerOptions,
}

impl FeatureSchema {
    pub fn vocabulary_len(&self) -> usize {
        self.idf.len()
    }

    pub fn with_metrics(mut self, names: Vec<String>) -> Self {
        self.metric_names = names;
        self
    }

    /// Term by index, for reports.
    pub fn terms(&self) -> Vec<&str> {
        let mut out = vec![""; self.idf.len()];
        for (t, &i) in &self.vocabulary {
            out[i] = t;
        }
        out
    }
}

impl Artifact for FeatureSchema {
    const KIND: &'static str = "schema";

    fn check(&self) -> Result<(), String> {
        if self.vocabulary.len() != self.idf.len() {
            return Err("vocabulary and idf lengths differ".into());
        }
        let mut seen = vec![false; self.idf.len()];
        for &i in self.vocabulary.values() {
            match seen.get_mut(i) {
                Some(s) if !*s => *s = true,
                _ => return Err(format!("vocabulary index {i} is out of range or repeated")),
            }
        }
        if self.idf.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err("idf values must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Unigrams followed by n-grams up to `n_max`, joined with a space.
pub fn ngrams(tokens: &[String], n_max: usize) -> Vec<String> {
    let mut out = tokens.to_vec();
    for n in 2..=n_max {
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// Builds the vocabulary and smoothed idf, `ln((1+N)/(1+df)) + 1`.
///
/// With a cap, terms are ranked by document frequency (ties broken
/// lexicographically). Indices follow lexicographic term order.
pub fn fit_vectorizer(docs: &[Vec<String>], options: &VectorizerOptions) -> Result<FeatureSchema, FeatureError> {
    if docs.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in docs {
        let mut terms = ngrams(doc, options.ngram_max);
        terms.sort_unstable();
        terms.dedup();
        for t in terms {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if let Some(cap) = options.vocab_cap {
        ranked.truncate(cap);
    }
    ranked.sort_by(|a, b| a.0.cmp(&b.0));

    let n = docs.len() as f64;
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::with_capacity(ranked.len());
    for (i, (term, count)) in ranked.into_iter().enumerate() {
        vocabulary.insert(term, i);
        idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
    }
    Ok(FeatureSchema {
        metric_names: METRIC_NAMES.iter().map(|s| s.to_string()).collect(),
        vocabulary,
        idf,
        options: options.clone(),
    })
}

/// Sparse term weights of one document. Out-of-vocabulary terms are dropped.
pub fn transform(tokens: &[String], schema: &FeatureSchema) -> BTreeMap<usize, f64> {
    let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
    for term in ngrams(tokens, schema.options.ngram_max) {
        if let Some(&i) = schema.vocabulary.get(&term) {
            *weights.entry(i).or_default() += 1.0;
        }
    }
    if schema.options.tfidf {
        for (i, w) in weights.iter_mut() {
            *w *= schema.idf[*i];
        }
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for w in weights.values_mut() {
                *w /= norm;
            }
        }
    }
    weights
}
