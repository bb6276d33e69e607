//! Chat export ingestion and the canonical message store.
//!
//! Exports are mapped onto one source-agnostic [`Message`] schema at the
//! boundary. Sender names are replaced by pseudonyms during parsing, so a
//! [`Corpus`] never holds a real name.

mod artifact;
mod jsonl;
mod zulip;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::io;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use artifact::{from_json_str, load, persist, to_json_string, write_atomic, Artifact, FORMAT_VERSION};
pub use jsonl::{parse_generic_jsonl, parse_generic_jsonl_with};
pub use zulip::{parse_zulip_export, parse_zulip_export_with};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("export has no top-level `messages` array")]
    MissingMessages,
    #[error("message {index}: missing required key `{key}`")]
    MissingKey { index: usize, key: String },
    #[error("message {index}: key `{key}` is invalid: {reason}")]
    InvalidValue {
        index: usize,
        key: String,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("duplicate message id `{0}`")]
    DuplicateId(String),
    #[error("message `{id}` has non-positive timestamp {timestamp}")]
    NonPositiveTimestamp { id: String, timestamp: i64 },
    #[error("message `{0}` has empty content but is not flagged as removed by cleaning")]
    EmptyContent(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: incompatible format version `{found}` (expected `{FORMAT_VERSION}`)")]
    IncompatibleVersion { path: PathBuf, found: String },
    #[error("{path}: holds a `{found}` artifact, expected `{expected}`")]
    WrongKind {
        path: PathBuf,
        found: String,
        expected: &'static str,
    },
    #[error("{path}: invalid artifact: {message}")]
    InvalidArtifact { path: PathBuf, message: String },
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Sentiment class of a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Positive,
    Neutral,
    Negative,
}

impl LabelClass {
    /// Row/column order used by confusion matrices and score arrays.
    pub const ALL: [LabelClass; 3] = [LabelClass::Positive, LabelClass::Neutral, LabelClass::Negative];

    pub fn index(self) -> usize {
        match self {
            LabelClass::Positive => 0,
            LabelClass::Neutral => 1,
            LabelClass::Negative => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelClass::Positive => "positive",
            LabelClass::Neutral => "neutral",
            LabelClass::Negative => "negative",
        }
    }

    fn rank(self) -> u8 {
        match self {
            LabelClass::Negative => 0,
            LabelClass::Neutral => 1,
            LabelClass::Positive => 2,
        }
    }
}

impl Ord for LabelClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for LabelClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LabelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label class `{0}` (expected positive, neutral or negative)")]
pub struct UnknownLabel(pub String);

impl FromStr for LabelClass {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" | "pos" | "+1" | "1" => Ok(LabelClass::Positive),
            "neutral" | "neu" | "0" => Ok(LabelClass::Neutral),
            "negative" | "neg" | "-1" => Ok(LabelClass::Negative),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// One chat message in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    /// Opaque pseudonym, never the raw sender name.
    pub sender: String,
    /// UTC seconds.
    pub timestamp: i64,
    pub stream: String,
    pub topic: String,
    pub content: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub removed_by_cleaning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusSource {
    ZulipExport,
    GenericJsonl,
}

/// Time-ordered message store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    messages: Vec<Message>,
    source: CorpusSource,
    span: Option<[i64; 2]>,
}

impl Corpus {
    /// Validates ids and timestamps, then sorts by timestamp (stable, so
    /// equal timestamps keep input order).
    pub fn new(mut messages: Vec<Message>, source: CorpusSource) -> Result<Self> {
        let mut seen = HashSet::with_capacity(messages.len());
        for m in &messages {
            if !seen.insert(m.id.as_str()) {
                return Err(CorpusError::DuplicateId(m.id.clone()));
            }
            if m.timestamp <= 0 {
                return Err(CorpusError::NonPositiveTimestamp {
                    id: m.id.clone(),
                    timestamp: m.timestamp,
                });
            }
            if m.content.is_empty() && !m.removed_by_cleaning {
                return Err(CorpusError::EmptyContent(m.id.clone()));
            }
        }
        messages.sort_by_key(|m| m.timestamp);
        let span = match (messages.first(), messages.last()) {
            (Some(first), Some(last)) => Some([first.timestamp, last.timestamp]),
            _ => None,
        };
        Ok(Corpus {
            messages,
            source,
            span,
        })
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn source(&self) -> CorpusSource {
        self.source
    }

    /// `[min timestamp, max timestamp]`, absent for an empty corpus.
    pub fn span(&self) -> Option<[i64; 2]> {
        self.span
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Message> {
        self.messages.iter().find(|m| m.id == id)
    }

    /// Marks messages whose cleaned content came out empty.
    pub fn flag_removed<'a>(&mut self, ids: impl IntoIterator<Item = &'a str>) {
        let ids: HashSet<&str> = ids.into_iter().collect();
        for m in &mut self.messages {
            if ids.contains(m.id.as_str()) {
                m.removed_by_cleaning = true;
            }
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        let rebuilt = Corpus::new(self.messages.clone(), self.source).map_err(|e| e.to_string())?;
        if rebuilt.messages != self.messages {
            return Err("messages are not sorted by timestamp".into());
        }
        if rebuilt.span != self.span {
            return Err("span does not match message timestamps".into());
        }
        Ok(())
    }
}

impl Artifact for Corpus {
    const KIND: &'static str = "corpus";

    fn check(&self) -> std::result::Result<(), String> {
        Corpus::check(self)
    }
}

/// Line/column (1-based, as reported by serde_json) to a byte offset.
pub(crate) fn byte_offset(input: &[u8], line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, chunk) in input.split(|&b| b == b'\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(input.len());
        }
        offset += chunk.len() + 1;
    }
    input.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(id: &str, ts: i64) -> Message {
        Message {
            id: id.into(),
            sender: "[[person_1]]".into(),
            timestamp: ts,
            stream: "dev".into(),
            topic: "t".into(),
            content: "hi".into(),
            removed_by_cleaning: false,
        }
    }

    #[test]
    fn new_sorts_and_sets_span() {
        let c = Corpus::new(vec![msg("b", 20), msg("a", 10)], CorpusSource::GenericJsonl).unwrap();
        assert_eq!(c.messages()[0].id, "a");
        assert_eq!(c.span(), Some([10, 20]));
    }

    #[test]
    fn rejects_duplicates_and_bad_timestamps() {
        let err = Corpus::new(vec![msg("a", 1), msg("a", 2)], CorpusSource::GenericJsonl).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId(id) if id == "a"));
        let err = Corpus::new(vec![msg("a", 0)], CorpusSource::GenericJsonl).unwrap_err();
        assert!(matches!(err, CorpusError::NonPositiveTimestamp { .. }));
    }

    #[test]
    fn empty_content_needs_flag() {
        let mut m = msg("a", 1);
        m.content.clear();
        assert!(Corpus::new(vec![m.clone()], CorpusSource::GenericJsonl).is_err());
        m.removed_by_cleaning = true;
        assert!(Corpus::new(vec![m], CorpusSource::GenericJsonl).is_ok());
    }

    #[test]
    fn label_order_and_parsing() {
        assert!(LabelClass::Positive > LabelClass::Neutral);
        assert!(LabelClass::Neutral > LabelClass::Negative);
        assert_eq!("Negative".parse::<LabelClass>().unwrap(), LabelClass::Negative);
        assert!("meh".parse::<LabelClass>().is_err());
        for (i, c) in LabelClass::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(LabelClass::from_index(i), Some(*c));
        }
    }

    #[test]
    fn offset_from_line_column() {
        let input = b"{\n  \"a\": x\n}";
        assert_eq!(byte_offset(input, 2, 8), 9);
        assert_eq!(input[9], b'x');
    }
}
