//! Message preparation: markup cleaning, sentence segmentation, spelling
//! correction and anonymization.

mod anonymize;
mod clean;
mod spell;
mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Artifact, Corpus};

pub use anonymize::{anonymize, Anonymizer, PseudonymEntry, PseudonymKind, PseudonymMap};
pub use clean::clean;
pub use spell::{correct_spelling, SpellDictionary};
pub use split::{SentenceSplitter, DEFAULT_EMOTICONS};

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("dictionary line {line}: {message}")]
    Dictionary { line: usize, message: String },
}

/// The unit of analysis: one sentence of one message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub message_id: String,
    pub index: usize,
    /// Segment as cut from the cleaned message, anonymized.
    pub raw: String,
    /// `raw` with whitespace normalized; never empty.
    pub clean: String,
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn id(&self) -> String {
        sentence_id(&self.message_id, self.index)
    }
}

pub fn sentence_id(message_id: &str, index: usize) -> String {
    format!("{message_id}:{index}")
}

/// Splits cleaned text into [`Sentence`]s of one message.
pub fn split_sentences(message_id: &str, clean_text: &str, splitter: &SentenceSplitter) -> Vec<Sentence> {
    splitter
        .split(clean_text)
        .into_iter()
        .enumerate()
        .map(|(index, part)| {
            let clean = part.split_whitespace().collect::<Vec<_>>().join(" ");
            Sentence {
                message_id: message_id.to_string(),
                index,
                tokens: splitter.tokenize(&clean),
                raw: part.to_string(),
                clean,
            }
        })
        .collect()
}

/// Preprocessed sentences of a corpus, in corpus order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceStore {
    pub sentences: Vec<Sentence>,
    /// Ids of messages whose content was entirely markup.
    pub removed: Vec<String>,
}

impl SentenceStore {
    pub fn get(&self, id: &str) -> Option<&Sentence> {
        let (message_id, index) = id.rsplit_once(':')?;
        let index: usize = index.parse().ok()?;
        self.sentences
            .iter()
            .find(|s| s.index == index && s.message_id == message_id)
    }
}

impl Artifact for SentenceStore {
    const KIND: &'static str = "sentences";

    fn check(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for s in &self.sentences {
            if s.clean.is_empty() {
                return Err(format!("sentence {} is empty", s.id()));
            }
            if !seen.insert((s.message_id.as_str(), s.index)) {
                return Err(format!("duplicate sentence {}", s.id()));
            }
        }
        Ok(())
    }
}

/// Runs clean → split → anonymize over every message and flags messages
/// that cleaning emptied. Pseudonyms are assigned in corpus order.
pub fn preprocess_corpus(
    corpus: &mut Corpus,
    splitter: &SentenceSplitter,
    anonymizer: &mut Anonymizer,
    map: &mut PseudonymMap,
) -> SentenceStore {
    let mut store = SentenceStore::default();
    for message in corpus.messages() {
        let cleaned = clean(&message.content);
        if cleaned.is_empty() {
            store.removed.push(message.id.clone());
            continue;
        }
        for mut sentence in split_sentences(&message.id, &cleaned, splitter) {
            let raw = anonymizer.anonymize(&sentence.raw, map);
            let clean = raw.split_whitespace().collect::<Vec<_>>().join(" ");
            sentence.tokens = splitter.tokenize(&clean);
            sentence.raw = raw;
            sentence.clean = clean;
            store.sentences.push(sentence);
        }
    }
    corpus.flag_removed(store.removed.iter().map(String::as_str));
    store
}
