use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};

use super::LexiconError;
use crate::corpus::LabelClass;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarityEntry {
    pub word: String,
    pub klass: LabelClass,
    /// Always present after loading; class-only rows get +1 / 0 / -1.
    pub score: f64,
    /// Whether the score came from the file rather than the class.
    pub scored: bool,
}

pub(crate) fn canonical_score(klass: LabelClass) -> f64 {
    match klass {
        LabelClass::Positive => 1.0,
        LabelClass::Neutral => 0.0,
        LabelClass::Negative => -1.0,
    }
}

/// Word → emotional shade. Lookups are case-insensitive.
#[derive(Debug, Clone, Default)]
pub struct PolarityLexicon {
    entries: HashMap<String, PolarityEntry>,
}

impl PolarityLexicon {
    /// Reads `word<TAB>class[<TAB>score]` rows. Blank lines and `#`
    /// comments are skipped.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, LexiconError> {
        let mut lexicon = PolarityLexicon::default();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let malformed = |message: String| LexiconError::Malformed { line: line_no, message };
            let line = line.map_err(|e| malformed(e.to_string()))?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !(2..=3).contains(&fields.len()) || fields[0].is_empty() {
                return Err(malformed("expected `word<TAB>class[<TAB>score]`".into()));
            }
            let klass: LabelClass = fields[1].parse().map_err(|e: crate::corpus::UnknownLabel| malformed(e.to_string()))?;
            let score = match fields.get(2).filter(|s| !s.is_empty()) {
                None => None,
                Some(s) => {
                    let v: f64 = s.parse().map_err(|_| malformed(format!("bad score `{s}`")))?;
                    if !(-1.0..=1.0).contains(&v) {
                        return Err(LexiconError::ScoreRange { line: line_no, score: v });
                    }
                    let consistent = match klass {
                        LabelClass::Positive => v >= 0.0,
                        LabelClass::Negative => v <= 0.0,
                        LabelClass::Neutral => v == 0.0,
                    };
                    if !consistent {
                        return Err(malformed(format!("score {v} contradicts class {klass}")));
                    }
                    Some(v)
                }
            };
            lexicon.insert(PolarityEntry {
                word: fields[0].to_lowercase(),
                klass,
                score: score.unwrap_or_else(|| canonical_score(klass)),
                scored: score.is_some(),
            });
        }
        Ok(lexicon)
    }

    /// Adds an entry. A scored entry replaces a class-only one; otherwise
    /// the first definition of a word is kept.
    pub fn insert(&mut self, entry: PolarityEntry) {
        let key = entry.word.to_lowercase();
        match self.entries.get(&key) {
            Some(existing) if existing.scored || !entry.scored => {}
            _ => {
                self.entries.insert(key, PolarityEntry { word: entry.word.to_lowercase(), ..entry });
            }
        }
    }

    /// Folds another lexicon in with the same precedence as [`insert`](Self::insert).
    pub fn merge(&mut self, other: PolarityLexicon) {
        let mut words: Vec<_> = other.entries.into_values().collect();
        words.sort_by(|a, b| a.word.cmp(&b.word));
        for e in words {
            self.insert(e);
        }
    }

    pub fn lookup(&self, word: &str) -> Option<&PolarityEntry> {
        self.entries.get(&word.to_lowercase())
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
    use proptest::prelude::*;

    const SAMPLE: &str = "# sample\nagree\tpositive\t0.0040\nobjectively\tneutral\narbitrary\tnegative\t-0.3481\nconfused\tnegative\n";

    #[test]
    fn scored_and_class_only_rows() {
        let lex = PolarityLexicon::from_reader(SAMPLE.as_bytes()).unwrap();
        let agree = lex.lookup("agree").unwrap();
        assert_eq!((agree.klass, agree.score), (LabelClass::Positive, 0.0040));
        let arbitrary = lex.lookup("Arbitrary").unwrap();
        assert_eq!((arbitrary.klass, arbitrary.score), (LabelClass::Negative, -0.3481));
        let objectively = lex.lookup("objectively").unwrap();
        assert_eq!((objectively.klass, objectively.score), (LabelClass::Neutral, 0.0));
        assert_eq!(lex.lookup("confused").unwrap().score, -1.0);
        assert!(lex.lookup("unknown").is_none());
    }

    #[test]
    fn errors_carry_line_numbers() {
        match PolarityLexicon::from_reader("good\tpositive\nbad\n".as_bytes()).unwrap_err() {
            LexiconError::Malformed { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        match PolarityLexicon::from_reader("good\tpositive\t1.5\n".as_bytes()).unwrap_err() {
            LexiconError::ScoreRange { line, score } => assert_eq!((line, score), (1, 1.5)),
            e => panic!("{e}"),
        }
        assert!(PolarityLexicon::from_reader("good\tpositive\t-0.2\n".as_bytes()).is_err());
    }

    #[test]
    fn scored_entry_wins_merge() {
        let mut classes = PolarityLexicon::from_reader("agree\tpositive\nfine\tpositive\n".as_bytes()).unwrap();
        let scores = PolarityLexicon::from_reader("agree\tpositive\t0.004\n".as_bytes()).unwrap();
        classes.merge(scores);
        assert_eq!(classes.lookup("agree").unwrap().score, 0.004);
        assert_eq!(classes.lookup("fine").unwrap().score, 1.0);

        let mut scores = PolarityLexicon::from_reader("agree\tpositive\t0.004\n".as_bytes()).unwrap();
        scores.merge(PolarityLexicon::from_reader("agree\tpositive\n".as_bytes()).unwrap());
        assert_eq!(scores.lookup("agree").unwrap().score, 0.004);
    }

    proptest! {
        #[test]
        fn case_insensitive(word in "[a-zA-Z]{1,10}") {
            let lex = PolarityLexicon::from_reader(format!("{word}\tpositive\n").as_bytes()).unwrap();
            prop_assert_eq!(lex.lookup(&word), lex.lookup(&word.to_uppercase()));
            prop_assert!(lex.lookup(&word.to_lowercase()).is_some());
        }

        #[test]
        fn canonical_scores(word in "[a-z]{1,8}", k in 0usize..3) {
            let klass = LabelClass::ALL[k];
            let lex = PolarityLexicon::from_reader(format!("{word}\t{klass}\n").as_bytes()).unwrap();
            prop_assert_eq!(lex.lookup(&word).unwrap().score, [1.0, 0.0, -1.0][k]);
        }
    }
}
