use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Artifact;

static EMAIL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[\p{L}\p{N}._%+\-]+@[\p{L}\p{N}\-]+(?:\.[\p{L}\p{N}\-]+)+").unwrap());
static LINK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:https?://|ftp://|www\.)[^\s>]+").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@_?\*\*([^*|\n]+)(?:\|\d+)?\*\*").unwrap());

const SENDER_ID_PREFIX: &str = "sender_id:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PseudonymKind {
    Person,
    Email,
    Link,
}

impl PseudonymKind {
    fn label(self) -> &'static str {
        match self {
            PseudonymKind::Person => "person",
            PseudonymKind::Email => "email",
            PseudonymKind::Link => "link",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudonymEntry {
    pub kind: PseudonymKind,
    /// Normalized surface form (lowercased, single-spaced).
    pub surface: String,
    pub placeholder: String,
}

/// Stable assignment of placeholders to personal data, in first-seen order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PseudonymMap {
    entries: Vec<PseudonymEntry>,
    #[serde(skip)]
    index: HashMap<(PseudonymKind, String), usize>,
}

impl PseudonymMap {
    /// A map with every roster name registered up front, in roster order.
    pub fn seeded<S: AsRef<str>>(roster: &[S]) -> Self {
        let mut map = PseudonymMap::default();
        for name in roster {
            map.person(name.as_ref());
        }
        map
    }

    pub fn entries(&self) -> &[PseudonymEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn person(&mut self, name: &str) -> String {
        self.placeholder(PseudonymKind::Person, name)
    }

    /// Pseudonym for a sender known only by numeric id.
    pub fn sender_id(&mut self, id: &str) -> String {
        self.placeholder(PseudonymKind::Person, &format!("{SENDER_ID_PREFIX}{id}"))
    }

    pub fn lookup(&self, kind: PseudonymKind, surface: &str) -> Option<&str> {
        let key = (kind, normalize(surface));
        self.position(&key).map(|i| self.entries[i].placeholder.as_str())
    }

    pub fn placeholder(&mut self, kind: PseudonymKind, surface: &str) -> String {
        if self.index.len() != self.entries.len() {
            self.reindex();
        }
        let key = (kind, normalize(surface));
        if let Some(i) = self.position(&key) {
            return self.entries[i].placeholder.clone();
        }
        let n = self.entries.iter().filter(|e| e.kind == kind).count() + 1;
        let placeholder = format!("[[{}_{n}]]", kind.label());
        self.index.insert(key.clone(), self.entries.len());
        self.entries.push(PseudonymEntry {
            kind,
            surface: key.1,
            placeholder: placeholder.clone(),
        });
        placeholder
    }

    fn position(&self, key: &(PseudonymKind, String)) -> Option<usize> {
        if self.index.len() == self.entries.len() {
            return self.index.get(key).copied();
        }
        // Index is not serialized; fall back to a scan after deserialization.
        self.entries
            .iter()
            .position(|e| e.kind == key.0 && e.surface == key.1)
    }

    fn reindex(&mut self) {
        self.index = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.kind, e.surface.clone()), i))
            .collect();
    }

    fn person_names(&self) -> impl Iterator<Item = &str> {
        self.entries
            .iter()
            .filter(|e| e.kind == PseudonymKind::Person && !e.surface.starts_with(SENDER_ID_PREFIX))
            .map(|e| e.surface.as_str())
    }
}

impl PartialEq for PseudonymMap {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for PseudonymMap {}

impl Artifact for PseudonymMap {
    const KIND: &'static str = "pseudonyms";

    fn check(&self) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for e in &self.entries {
            if !seen.insert((e.kind, e.surface.as_str())) {
                return Err(format!("duplicate surface `{}`", e.surface));
            }
        }
        Ok(())
    }
}

fn normalize(surface: &str) -> String {
    surface.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Replaces e-mail addresses, links, mentions and known person names with
/// placeholders. Reuse one instance across a corpus: the name pattern is
/// compiled once and rebuilt only when new names enter the map.
#[derive(Debug)]
pub struct Anonymizer {
    roster: Vec<String>,
    names: Option<Regex>,
    compiled_for: usize,
}

impl Anonymizer {
    pub fn new<S: AsRef<str>>(roster: &[S]) -> Self {
        Anonymizer {
            roster: roster
                .iter()
                .map(|n| normalize(n.as_ref()))
                .filter(|n| !n.is_empty())
                .collect(),
            names: None,
            compiled_for: usize::MAX,
        }
    }

    pub fn anonymize(&mut self, text: &str, map: &mut PseudonymMap) -> String {
        let text = EMAIL.replace_all(text, |c: &regex::Captures| map.placeholder(PseudonymKind::Email, &c[0]));
        let text = LINK.replace_all(&text, |c: &regex::Captures| map.placeholder(PseudonymKind::Link, &c[0]));
        let text = MENTION.replace_all(&text, |c: &regex::Captures| map.person(c[1].trim()));
        let text = text.into_owned();

        let people = map.person_names().count();
        if self.compiled_for != people {
            self.names = self.name_pattern(map);
            self.compiled_for = people;
        }
        match &self.names {
            Some(re) => re.replace_all(&text, |c: &regex::Captures| map.person(&c[0])).into_owned(),
            None => text,
        }
    }

    fn name_pattern(&self, map: &PseudonymMap) -> Option<Regex> {
        let mut names: Vec<&str> = self.roster.iter().map(String::as_str).chain(map.person_names()).collect();
        names.sort_by(|a, b| b.chars().count().cmp(&a.chars().count()).then(a.cmp(b)));
        names.dedup();
        if names.is_empty() {
            return None;
        }
        let alternatives: Vec<String> = names
            .iter()
            .map(|n| n.split(' ').map(regex::escape).collect::<Vec<_>>().join(r"\s+"))
            .collect();
        Regex::new(&format!(r"(?i)\b(?:{})\b", alternatives.join("|"))).ok()
    }
}

/// One-shot form of [`Anonymizer::anonymize`].
pub fn anonymize<S: AsRef<str>>(text: &str, known_names: &[S], map: &mut PseudonymMap) -> String {
    Anonymizer::new(known_names).anonymize(text, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn email() {
        let mut map = PseudonymMap::default();
        assert_eq!(anonymize("Contact anna@example.org", &[] as &[&str], &mut map), "Contact [[email_1]]");
    }

    #[test]
    fn mention_and_roster() {
        let mut map = PseudonymMap::default();
        let roster = ["Paul Meyer"];
        assert_eq!(anonymize("@**Paul Meyer** can you check?", &roster, &mut map), "[[person_1]] can you check?");
        assert_eq!(anonymize("Thanks paul  meyer!", &roster, &mut map), "Thanks [[person_1]]!");
    }

    #[test]
    fn placeholders_are_stable_across_messages() {
        let mut map = PseudonymMap::default();
        let roster = ["Paul Meyer", "Eva"];
        let mut anon = Anonymizer::new(&roster);
        let a = anon.anonymize("Eva asked Paul Meyer", &mut map);
        let b = anon.anonymize("Paul Meyer replied, see www.x.org", &mut map);
        assert_eq!(a, "[[person_1]] asked [[person_2]]");
        assert_eq!(b, "[[person_2]] replied, see [[link_1]]");
    }

    #[test]
    fn mentioned_names_are_replaced_later() {
        let mut map = PseudonymMap::default();
        let mut anon = Anonymizer::new(&[] as &[&str]);
        anon.anonymize("@**Lena Vogt|42** hi", &mut map);
        assert_eq!(anon.anonymize("ask Lena Vogt", &mut map), "ask [[person_1]]");
    }

    #[test]
    fn sender_ids_do_not_become_text_patterns() {
        let mut map = PseudonymMap::default();
        map.sender_id("17");
        assert_eq!(anonymize("sender_id:17 is fine", &[] as &[&str], &mut map), "sender_id:17 is fine");
    }

    #[test]
    fn map_survives_round_trip() {
        let mut map = PseudonymMap::seeded(&["Paul"]);
        map.placeholder(PseudonymKind::Email, "a@b.de");
        let text = crate::corpus::to_json_string(&map);
        let mut back: PseudonymMap = crate::corpus::from_json_str(&text, "m.json".as_ref()).unwrap();
        assert_eq!(back, map);
        assert_eq!(back.person("paul"), "[[person_1]]");
        assert_eq!(back.person("Ina"), "[[person_2]]");
    }

    proptest! {
        #[test]
        fn deterministic_and_complete(
            roster in prop::collection::vec("[A-Z][a-z]{2,6}", 1..4),
            words in prop::collection::vec("[a-z]{1,6}", 0..8),
            pick in prop::collection::vec(0usize..4, 0..4),
        ) {
            let mut parts = words.clone();
            for (i, p) in pick.iter().enumerate() {
                parts.insert(i.min(parts.len()), roster[p % roster.len()].clone());
            }
            parts.push("x.y@mail.com".into());
            let text = parts.join(" ");
            let mut m1 = PseudonymMap::default();
            let mut m2 = PseudonymMap::default();
            let out1 = anonymize(&text, &roster, &mut m1);
            let out2 = anonymize(&text, &roster, &mut m2);
            prop_assert_eq!(&out1, &out2);
            prop_assert_eq!(&m1, &m2);
            prop_assert!(!EMAIL.is_match(&out1));
            for name in &roster {
                let re = Regex::new(&format!(r"(?i)\b{}\b", regex::escape(name))).unwrap();
                prop_assert!(!re.is_match(&out1), "{} survived in {}", name, out1);
            }
        }
    }
}
