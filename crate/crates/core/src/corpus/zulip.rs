use std::io::Read;

use serde_json::{Map, Value};

use super::{byte_offset, Corpus, CorpusError, CorpusSource, Message, Result};
use crate::preprocess::PseudonymMap;

/// Parses a Zulip stream export (`{"messages": [...]}`).
pub fn parse_zulip_export<R: Read>(reader: R) -> Result<Corpus> {
    let mut map = PseudonymMap::default();
    parse_zulip_export_with(reader, &mut map)
}

/// Same as [`parse_zulip_export`], assigning sender pseudonyms from `map`.
pub fn parse_zulip_export_with<R: Read>(mut reader: R, map: &mut PseudonymMap) -> Result<Corpus> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| CorpusError::Json {
            offset: bytes.len(),
            message: e.to_string(),
        })?;
    let doc: Value = serde_json::from_slice(&bytes).map_err(|e| CorpusError::Json {
        offset: byte_offset(&bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let items = doc
        .get("messages")
        .and_then(Value::as_array)
        .ok_or(CorpusError::MissingMessages)?;

    let mut messages = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let obj = item.as_object().ok_or_else(|| CorpusError::InvalidValue {
            index,
            key: "messages".into(),
            reason: "element is not an object".into(),
        })?;
        messages.push(message_from(obj, index, map)?);
    }
    Corpus::new(messages, CorpusSource::ZulipExport)
}

fn message_from(obj: &Map<String, Value>, index: usize, map: &mut PseudonymMap) -> Result<Message> {
    let id = id_string(required(obj, index, &["id"])?, index, "id")?;
    let sender = match (obj.get("sender_full_name"), obj.get("sender_id")) {
        (Some(Value::String(name)), _) if !name.trim().is_empty() => map.person(name.trim()),
        (_, Some(v)) => {
            let sid = id_string(v, index, "sender_id")?;
            map.sender_id(&sid)
        }
        _ => {
            return Err(CorpusError::MissingKey {
                index,
                key: "sender_full_name".into(),
            })
        }
    };
    let timestamp = match required(obj, index, &["timestamp"])? {
        Value::Number(n) => n.as_i64().ok_or_else(|| invalid(index, "timestamp", "not an integer"))?,
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| invalid(index, "timestamp", "not an integer"))?,
        _ => return Err(invalid(index, "timestamp", "expected unix seconds")),
    };
    let topic = string_field(obj, index, &["subject", "topic"])?;
    let stream = string_field(obj, index, &["display_recipient", "stream"])?;
    let content = string_field(obj, index, &["content"])?;
    Ok(Message {
        id,
        sender,
        timestamp,
        stream,
        topic,
        content,
        removed_by_cleaning: false,
    })
}

fn required<'a>(obj: &'a Map<String, Value>, index: usize, keys: &[&str]) -> Result<&'a Value> {
    keys.iter()
        .find_map(|k| obj.get(*k))
        .ok_or_else(|| CorpusError::MissingKey {
            index,
            key: keys[0].to_string(),
        })
}

fn string_field(obj: &Map<String, Value>, index: usize, keys: &[&str]) -> Result<String> {
    match required(obj, index, keys)? {
        Value::String(s) => Ok(s.clone()),
        _ => Err(invalid(index, keys[0], "expected a string")),
    }
}

fn id_string(v: &Value, index: usize, key: &str) -> Result<String> {
    match v {
        Value::String(s) if !s.is_empty() => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(invalid(index, key, "expected a number or non-empty string")),
    }
}

fn invalid(index: usize, key: &str, reason: &str) -> CorpusError {
    CorpusError::InvalidValue {
        index,
        key: key.into(),
        reason: reason.into(),
    }
}
