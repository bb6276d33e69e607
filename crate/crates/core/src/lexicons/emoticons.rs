use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};

use super::LexiconError;
use crate::corpus::LabelClass;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EmoticonEntry {
    pub glyph: String,
    pub p_pos: f64,
    pub p_neu: f64,
    pub p_neg: f64,
}

impl EmoticonEntry {
    /// Most probable class; ties go to neutral, then positive.
    pub fn class(&self) -> (LabelClass, f64) {
        let mut best = (LabelClass::Neutral, self.p_neu);
        for (klass, p) in [(LabelClass::Positive, self.p_pos), (LabelClass::Negative, self.p_neg)] {
            if p > best.1 {
                best = (klass, p);
            }
        }
        best
    }

    /// Scalar shade in [-1, 1]: `p_pos - p_neg`, or 0 when the emoticon
    /// is predominantly neutral.
    pub fn score(&self) -> f64 {
        match self.class().0 {
            LabelClass::Neutral => 0.0,
            _ => self.p_pos - self.p_neg,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmoticonTable {
    entries: BTreeMap<String, EmoticonEntry>,
}

impl EmoticonTable {
    /// Reads `glyph<TAB>p_pos<TAB>p_neu<TAB>p_neg` rows.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, LexiconError> {
        let mut entries = BTreeMap::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let malformed = |message: String| LexiconError::Malformed { line: line_no, message };
            let line = line.map_err(|e| malformed(e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 4 || fields[0].is_empty() {
                return Err(malformed("expected `glyph<TAB>p_pos<TAB>p_neu<TAB>p_neg`".into()));
            }
            let mut p = [0.0; 3];
            for (slot, raw) in p.iter_mut().zip(&fields[1..]) {
                *slot = raw.parse().map_err(|_| malformed(format!("bad probability `{raw}`")))?;
                if !(0.0..=1.0).contains(slot) {
                    return Err(malformed(format!("probability {slot} outside [0, 1]")));
                }
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(LexiconError::ProbabilitySum {
                    line: line_no,
                    glyph: fields[0].to_string(),
                    sum,
                });
            }
            entries.insert(
                fields[0].to_string(),
                EmoticonEntry {
                    glyph: fields[0].to_string(),
                    p_pos: p[0],
                    p_neu: p[1],
                    p_neg: p[2],
                },
            );
        }
        Ok(EmoticonTable { entries })
    }

    pub fn get(&self, glyph: &str) -> Option<&EmoticonEntry> {
        self.entries.get(glyph)
    }

    pub fn emoticon_class(&self, glyph: &str) -> Option<(LabelClass, f64)> {
        self.get(glyph).map(EmoticonEntry::class)
    }

    pub fn glyphs(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_class() {
        let t = EmoticonTable::from_reader(":D\t0.90\t0.05\t0.05\n:|\t0.0\t1.0\t0.0\n".as_bytes()).unwrap();
        assert_eq!(t.emoticon_class(":D"), Some((LabelClass::Positive, 0.90)));
        assert_eq!(t.emoticon_class(":|"), Some((LabelClass::Neutral, 1.0)));
        assert_eq!(t.emoticon_class("xx"), None);
        assert!((t.get(":D").unwrap().score() - 0.85).abs() < 1e-12);
        assert_eq!(t.get(":|").unwrap().score(), 0.0);
    }

    #[test]
    fn neutral_majority_scores_zero() {
        let t = EmoticonTable::from_reader(":/\t0.1\t0.5\t0.4\n".as_bytes()).unwrap();
        assert_eq!(t.get(":/").unwrap().score(), 0.0);
    }

    #[test]
    fn sum_check() {
        match EmoticonTable::from_reader(":)\t0.5\t0.5\t0.5\n".as_bytes()).unwrap_err() {
            LexiconError::ProbabilitySum { line, glyph, .. } => assert_eq!((line, glyph.as_str()), (1, ":)")),
            e => panic!("{e}"),
        }
    }
}
