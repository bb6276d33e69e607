use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};

use serde::Deserialize;

use super::{Corpus, CorpusError, CorpusSource, Message, Result};
use crate::preprocess::PseudonymMap;

#[derive(Deserialize)]
#[serde(untagged)]
enum Id {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Deserialize)]
struct Line {
    id: Id,
    sender: Id,
    timestamp: i64,
    stream: String,
    topic: String,
    content: String,
}

/// Parses one JSON object per line; blank lines are skipped.
pub fn parse_generic_jsonl<R: Read>(reader: R) -> Result<Corpus> {
    let mut map = PseudonymMap::default();
    parse_generic_jsonl_with(reader, &mut map)
}

pub fn parse_generic_jsonl_with<R: Read>(reader: R, map: &mut PseudonymMap) -> Result<Corpus> {
    let mut messages = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line).map_err(|e| CorpusError::Line {
            line: line_no,
            message: e.to_string(),
        })?;
        let id = match parsed.id {
            Id::Text(s) => s,
            Id::Number(n) => n.to_string(),
        };
        if !seen.insert(id.clone()) {
            return Err(CorpusError::DuplicateId(id));
        }
        let sender = match parsed.sender {
            Id::Text(s) => map.person(s.trim()),
            Id::Number(n) => map.sender_id(&n.to_string()),
        };
        messages.push(Message {
            id,
            sender,
            timestamp: parsed.timestamp,
            stream: parsed.stream,
            topic: parsed.topic,
            content: parsed.content,
            removed_by_cleaning: false,
        });
    }
    Corpus::new(messages, CorpusSource::GenericJsonl)
}

#[cfg(test)]
mod tests {
    use super::*;

    const L1: &str = r#"{"id":"a","sender":"x","timestamp":30,"stream":"s","topic":"t","content":"one"}"#;
    const L2: &str = r#"{"id":"b","sender":"y","timestamp":10,"stream":"s","topic":"t","content":"two"}"#;
    const L3: &str = r#"{"id":"c","sender":"x","timestamp":20,"stream":"s","topic":"t","content":"three"}"#;

    #[test]
    fn three_lines() {
        let input = format!("{L1}\n{L2}\n\n{L3}\n");
        let c = parse_generic_jsonl(input.as_bytes()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.span(), Some([10, 30]));
        assert_eq!(c.get("a").unwrap().sender, c.get("c").unwrap().sender);
    }

    #[test]
    fn invalid_line_is_cited() {
        let input = format!("{L1}\n{{not json\n{L3}");
        let err = parse_generic_jsonl(input.as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 2"), "{err}");
    }

    #[test]
    fn duplicate_id() {
        let input = format!("{L1}\n{L1}");
        assert!(matches!(
            parse_generic_jsonl(input.as_bytes()).unwrap_err(),
            CorpusError::DuplicateId(id) if id == "a"
        ));
    }
}
