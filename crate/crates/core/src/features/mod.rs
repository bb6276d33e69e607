//! Per-sentence metrics and term vectors.
//!
//! Dense metrics are a fixed, named schema ([`METRIC_NAMES`]); sparse term
//! weights come from a vocabulary fitted on training sentences only.

mod correlation;
mod tagger;
mod vectorizer;

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Artifact, LabelClass, Message};
use crate::lexicons::Lexicons;
use crate::preprocess::{clean, correct_spelling, Sentence, SpellDictionary, DEFAULT_EMOTICONS};

pub use correlation::{correlation_matrix, pearson, prune_correlated, CorrelationMatrix};
pub use tagger::{AdjectiveTagger, SuffixTagger};
pub use vectorizer::{fit_vectorizer, ngrams, transform, FeatureSchema, VectorizerOptions};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("correlation needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample {index} has {found} values, expected {expected}")]
    RaggedRows {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("metric `{0}` is missing")]
    MissingMetric(String),
    #[error("metric `{name}` is not finite ({value})")]
    NonFinite { name: String, value: f64 },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Dense metric names, in schema order.
pub const METRIC_NAMES: [&str; 20] = [
    "msg_char_len",
    "sent_char_len",
    "word_count",
    "avg_word_len",
    "adjective_count",
    "punctuation_count",
    "emoticon_count",
    "emoji_mean",
    "emoji_min",
    "emoji_max",
    "lex_mean",
    "lex_min",
    "lex_max",
    "lex_pos_count",
    "lex_neg_count",
    "formality",
    "auto_correction_ratio",
    "exclamation_count",
    "question_count",
    "uppercase_ratio",
];

pub type DenseMetrics = BTreeMap<String, f64>;

/// Named dense metrics plus sparse term weights for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sentence_id: String,
    pub dense: DenseMetrics,
    pub sparse: BTreeMap<usize, f64>,
}

/// Everything the learners need from one sentence before a vocabulary
/// exists: the full dense metric set and its normalized terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFeatures {
    pub sentence_id: String,
    pub dense: DenseMetrics,
    /// Lowercased, spelling-corrected word tokens (placeholders excluded).
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: SentenceFeatures,
    pub label: LabelClass,
}

/// Computes [`SentenceFeatures`] given the language resources.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    lexicons: Arc<Lexicons>,
    dictionary: Option<Arc<SpellDictionary>>,
    tagger: Arc<dyn AdjectiveTagger>,
    emoticon_tokens: HashSet<String>,
}

impl FeatureExtractor {
    pub fn new(lexicons: Arc<Lexicons>) -> Self {
        let mut emoticon_tokens: HashSet<String> = DEFAULT_EMOTICONS.iter().map(|s| s.to_string()).collect();
        emoticon_tokens.extend(lexicons.emoticons.glyphs().map(str::to_string));
        FeatureExtractor {
            lexicons,
            dictionary: None,
            tagger: Arc::new(SuffixTagger::default()),
            emoticon_tokens,
        }
    }

    pub fn with_dictionary(mut self, dictionary: Arc<SpellDictionary>) -> Self {
        self.dictionary = Some(dictionary).filter(|d| !d.is_empty());
        self
    }

    pub fn with_tagger(mut self, tagger: Arc<dyn AdjectiveTagger>) -> Self {
        self.tagger = tagger;
        self
    }

    pub fn lexicons(&self) -> &Lexicons {
        &self.lexicons
    }

    pub fn extract_dense(&self, sentence: &Sentence, message: &Message) -> DenseMetrics {
        self.analyze(sentence, message).dense
    }

    pub fn analyze(&self, sentence: &Sentence, message: &Message) -> SentenceFeatures {
        let lex = &self.lexicons;
        let text = sentence.clean.as_str();

        let mut emoji = Vec::new();
        for chunk in text.split_whitespace() {
            let entry = lex
                .emoticons
                .get(chunk)
                .or_else(|| lex.emoticons.get(chunk.trim_end_matches(['.', ',', '!', '?'])));
            if let Some(e) = entry {
                emoji.push(e.score());
            }
        }

        let mut words: Vec<&str> = Vec::new();
        let mut terms = Vec::new();
        let mut flagged = 0usize;
        let mut adjectives = 0usize;
        let mut lexicon_scores = Vec::new();
        let (mut lex_pos, mut lex_neg) = (0usize, 0usize);
        let (mut upper, mut alpha) = (0usize, 0usize);
        for token in &sentence.tokens {
            if !token.chars().any(char::is_alphanumeric) || self.emoticon_tokens.contains(token.as_str()) {
                continue;
            }
            words.push(token);
            if is_placeholder(token) {
                continue;
            }
            for c in token.chars().filter(|c| c.is_alphabetic()) {
                alpha += 1;
                upper += usize::from(c.is_uppercase());
            }
            let lower = token.to_lowercase();
            let term = match &self.dictionary {
                Some(dict) if lower.chars().all(char::is_alphabetic) => {
                    let (corrected, was_flagged) = correct_spelling(&lower, dict);
                    flagged += usize::from(was_flagged);
                    corrected
                }
                _ => lower,
            };
            if self.tagger.is_adjective(&term) {
                adjectives += 1;
            }
            if let Some(entry) = lex.polarity.lookup(&term) {
                lexicon_scores.push(entry.score);
                match entry.klass {
                    LabelClass::Positive => lex_pos += 1,
                    LabelClass::Negative => lex_neg += 1,
                    LabelClass::Neutral => {}
                }
            }
            terms.push(term);
        }

        let word_count = words.len();
        let per_word = |n: f64| if word_count == 0 { 0.0 } else { n / word_count as f64 };
        let (formal, informal) = lex.formality.count(&words);
        let (emoji_mean, emoji_min, emoji_max) = summary(&emoji);
        let (lex_mean, lex_min, lex_max) = summary(&lexicon_scores);
        let word_chars: usize = words.iter().map(|w| w.chars().count()).sum();

        let values = [
            clean(&message.content).chars().count() as f64,
            text.chars().count() as f64,
            word_count as f64,
            per_word(word_chars as f64),
            adjectives as f64,
            text.chars().filter(|&c| is_punctuation(c)).count() as f64,
            emoji.len() as f64,
            emoji_mean,
            emoji_min,
            emoji_max,
            lex_mean,
            lex_min,
            lex_max,
            lex_pos as f64,
            lex_neg as f64,
            per_word(formal as f64 - informal as f64),
            per_word(flagged as f64),
            text.matches('!').count() as f64,
            text.matches('?').count() as f64,
            if alpha == 0 { 0.0 } else { upper as f64 / alpha as f64 },
        ];
        SentenceFeatures {
            sentence_id: sentence.id(),
            dense: METRIC_NAMES.iter().map(|n| n.to_string()).zip(values).collect(),
            terms,
        }
    }
}

fn is_placeholder(token: &str) -> bool {
    token.starts_with("[[") && token.ends_with("]]")
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation() || matches!(c, '…' | '„' | '“' | '”' | '‘' | '’' | '«' | '»' | '–' | '—')
}

/// (mean, min, max), all zero for an empty slice.
fn summary(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean.clamp(min, max), min, max)
}

/// Writes one row per sentence: `sentence_id` followed by the metrics.
pub fn write_feature_csv<W: Write>(writer: W, names: &[String], rows: &[SentenceFeatures]) -> Result<(), FeatureError> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["sentence_id".to_string()];
    header.extend(names.iter().cloned());
    out.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.sentence_id.clone()];
        for name in names {
            let v = row.dense.get(name).ok_or_else(|| FeatureError::MissingMetric(name.clone()))?;
            record.push(v.to_string());
        }
        out.write_record(&record)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Features of every sentence in a store, in store order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub rows: Vec<SentenceFeatures>,
}

impl FeatureSet {
    pub fn get(&self, sentence_id: &str) -> Option<&SentenceFeatures> {
        self.rows.iter().find(|r| r.sentence_id == sentence_id)
    }
}

impl Artifact for FeatureSet {
    const KIND: &'static str = "features";

    fn check(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        for r in &self.rows {
            if !seen.insert(r.sentence_id.as_str()) {
                return Err(format!("duplicate sentence id {}", r.sentence_id));
            }
            if r.dense.values().any(|v| !v.is_finite()) {
                return Err(format!("non-finite metric in {}", r.sentence_id));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicons::{EmoticonTable, PolarityLexicon};
    use crate::preprocess::{split_sentences, SentenceSplitter};

    fn message(content: &str) -> Message {
        Message {
            id: "m".into(),
            sender: "[[person_1]]".into(),
            timestamp: 1,
            stream: "s".into(),
            topic: "t".into(),
            content: content.into(),
            removed_by_cleaning: false,
        }
    }

    fn extractor() -> FeatureExtractor {
        let lexicons = Lexicons {
            polarity: PolarityLexicon::from_reader("good\tpositive\t0.5\nmistake\tnegative\t-0.4\n".as_bytes())
                .unwrap(),
            emoticons: EmoticonTable::from_reader(":D\t0.90\t0.05\t0.05\n:(\t0.05\t0.15\t0.8\n".as_bytes()).unwrap(),
            formality: Default::default(),
        };
        FeatureExtractor::new(Arc::new(lexicons))
    }

    fn first(text: &str) -> Sentence {
        split_sentences("m", text, &SentenceSplitter::default()).remove(0)
    }

    #[test]
    fn sounds_good() {
        let d = extractor().extract_dense(&first("sounds good"), &message("sounds good"));
        assert_eq!(d["word_count"], 2.0);
        assert_eq!(d["avg_word_len"], 5.0);
        assert_eq!(d["lex_mean"], 0.5);
        assert_eq!(d["emoji_mean"], 0.0);
        assert_eq!(d["msg_char_len"], 11.0);
    }

    #[test]
    fn well_done() {
        let d = extractor().extract_dense(&first("Well done! :D"), &message("Well done! :D"));
        assert_eq!(d["emoticon_count"], 1.0);
        assert!((d["emoji_max"] - 0.85).abs() < 1e-12);
        assert_eq!(d["exclamation_count"], 1.0);
        assert_eq!(d["word_count"], 2.0);
    }

    #[test]
    fn degenerate_sentence() {
        let s = first("...");
        let d = extractor().extract_dense(&s, &message("..."));
        assert_eq!(d.len(), METRIC_NAMES.len());
        for name in ["word_count", "avg_word_len", "formality", "auto_correction_ratio", "uppercase_ratio", "lex_mean"] {
            assert_eq!(d[name], 0.0, "{name}");
        }
        assert_eq!(d["punctuation_count"], 3.0);
    }

    #[test]
    fn spelling_feeds_terms_and_ratio() {
        let dict = SpellDictionary::from_pairs([("good", 5u64), ("sounds", 2)]);
        let ex = extractor().with_dictionary(Arc::new(dict));
        let f = ex.analyze(&first("Sounds goood qqqq"), &message("x"));
        assert_eq!(f.terms, ["sounds", "good", "qqqq"]);
        assert!((f.dense["auto_correction_ratio"] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f.dense["lex_pos_count"], 1.0);
    }

    #[test]
    fn ordering_of_summaries() {
        let f = extractor().analyze(&first("good mistake :D :( good"), &message("x"));
        let d = &f.dense;
        assert!(d["emoji_min"] <= d["emoji_mean"] && d["emoji_mean"] <= d["emoji_max"]);
        assert!(d["lex_min"] <= d["lex_mean"] && d["lex_mean"] <= d["lex_max"]);
        assert_eq!((d["lex_pos_count"], d["lex_neg_count"]), (2.0, 1.0));
    }

    #[test]
    fn csv_dump() {
        let f = extractor().analyze(&first("sounds good"), &message("sounds good"));
        let names: Vec<String> = ["word_count", "lex_mean"].iter().map(|s| s.to_string()).collect();
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &names, &[f]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "sentence_id,word_count,lex_mean\nm:0,2,0.5\n");
    }
}
