use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};

use super::LexiconError;

/// A marker token.
///
/// Patterns with an uppercase letter match case-sensitively, all-lowercase
/// patterns match any case. A leading `~` restricts the pattern to
/// non-initial positions, which is how capitalized formal pronouns are
/// told apart from sentence-initial capitalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Pattern {
    text: String,
    mid_sentence_only: bool,
    case_sensitive: bool,
}

impl Pattern {
    fn parse(raw: &str) -> Self {
        let (mid_sentence_only, text) = match raw.strip_prefix('~') {
            Some(rest) => (true, rest.trim()),
            None => (false, raw),
        };
        Pattern {
            case_sensitive: text.chars().any(char::is_uppercase),
            text: text.to_string(),
            mid_sentence_only,
        }
    }

    fn matches(&self, token: &str, position: usize) -> bool {
        if self.mid_sentence_only && position == 0 {
            return false;
        }
        if self.case_sensitive {
            token == self.text
        } else {
            token.to_lowercase() == self.text
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FormalityMarkers {
    formal: BTreeSet<Pattern>,
    informal: BTreeSet<Pattern>,
}

impl FormalityMarkers {
    /// Reads `[formal]` and `[informal]` sections, one pattern per line.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, LexiconError> {
        let mut markers = FormalityMarkers::default();
        let mut section: Option<bool> = None;
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let malformed = |message: String| LexiconError::Malformed { line: i + 1, message };
            let line = line.map_err(|e| malformed(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            match line.to_ascii_lowercase().as_str() {
                "[formal]" => section = Some(true),
                "[informal]" => section = Some(false),
                l if l.starts_with('[') => return Err(malformed(format!("unknown section {line}"))),
                _ => {
                    let formal = section.ok_or_else(|| malformed("pattern outside a section".into()))?;
                    let pattern = Pattern::parse(line);
                    if formal {
                        markers.formal.insert(pattern);
                    } else {
                        markers.informal.insert(pattern);
                    }
                }
            }
        }
        for f in &markers.formal {
            if markers.informal.iter().any(|p| p.text.to_lowercase() == f.text.to_lowercase()) {
                return Err(LexiconError::FormalityConflict(f.text.clone()));
            }
        }
        Ok(markers)
    }

    /// Counts (formal, informal) marker hits in a token sequence.
    pub fn count(&self, tokens: &[&str]) -> (usize, usize) {
        let hits = |set: &BTreeSet<Pattern>| {
            tokens
                .iter()
                .enumerate()
                .filter(|(pos, tok)| set.iter().any(|p| p.matches(tok, *pos)))
                .count()
        };
        (hits(&self.formal), hits(&self.informal))
    }

    pub fn formal_len(&self) -> usize {
        self.formal.len()
    }

    pub fn informal_len(&self) -> usize {
        self.informal.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_disjoint_sections() {
        let m = FormalityMarkers::from_reader("[formal]\n~Sie\nIhnen\n[informal]\nhi\n".as_bytes()).unwrap();
        assert_eq!((m.formal_len(), m.informal_len()), (2, 1));
        assert_eq!(m.count(&["Hi", "können", "Sie", "kommen"]), (1, 1));
        assert_eq!(m.count(&["Sie", "kommen"]), (0, 0));
        assert_eq!(m.count(&["sie", "hat", "Ihnen"]), (1, 0));
    }

    #[test]
    fn conflict() {
        assert!(matches!(
            FormalityMarkers::from_reader("[formal]\nhey\n[informal]\nhey\n".as_bytes()).unwrap_err(),
            LexiconError::FormalityConflict(t) if t == "hey"
        ));
    }

    #[test]
    fn empty_informal_section() {
        let m = FormalityMarkers::from_reader("[formal]\nSie\n[informal]\n".as_bytes()).unwrap();
        assert_eq!(m.informal_len(), 0);
    }

    #[test]
    fn pattern_outside_section() {
        assert!(FormalityMarkers::from_reader("hi\n".as_bytes()).is_err());
    }
}
