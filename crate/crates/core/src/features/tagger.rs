use std::collections::HashSet;
use std::fmt::Debug;

/// Decides whether a lowercased word is an adjective.
pub trait AdjectiveTagger: Debug + Send + Sync {
    fn is_adjective(&self, word: &str) -> bool;
}

const DEFAULT_WORDS: &[&str] = &[
    "good", "bad", "great", "nice", "fine", "new", "old", "big", "small", "happy", "sad", "easy", "hard",
    "wrong", "right", "quick", "slow", "late", "early", "cool", "awesome", "gut", "schlecht", "schön",
    "toll", "super", "neu", "alt", "groß", "klein", "schnell", "langsam", "falsch", "richtig", "leicht",
    "schwer",
];

const DEFAULT_SUFFIXES: &[&str] = &[
    "ful", "ous", "ive", "able", "ible", "less", "ish", "ical", "ic", "ary", "ant", "ent", "lich", "ig",
    "isch", "bar", "sam", "haft", "los",
];

/// Word list plus suffix heuristics.
#[derive(Debug, Clone)]
pub struct SuffixTagger {
    words: HashSet<String>,
    suffixes: Vec<String>,
    min_len: usize,
}

impl Default for SuffixTagger {
    fn default() -> Self {
        SuffixTagger::new(DEFAULT_WORDS.iter().copied(), DEFAULT_SUFFIXES.iter().copied())
    }
}

impl SuffixTagger {
    pub fn new<W, S>(words: W, suffixes: S) -> Self
    where
        W: IntoIterator,
        W::Item: AsRef<str>,
        S: IntoIterator,
        S::Item: AsRef<str>,
    {
        SuffixTagger {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
            suffixes: suffixes.into_iter().map(|s| s.as_ref().to_lowercase()).collect(),
            min_len: 5,
        }
    }
}

impl AdjectiveTagger for SuffixTagger {
    fn is_adjective(&self, word: &str) -> bool {
        if self.words.contains(word) {
            return true;
        }
        word.chars().count() >= self.min_len
            && word.chars().all(char::is_alphabetic)
            && self.suffixes.iter().any(|s| word.ends_with(s.as_str()) && word.len() > s.len() + 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_and_suffixes() {
        let t = SuffixTagger::default();
        assert!(t.is_adjective("good"));
        assert!(t.is_adjective("wonderful"));
        assert!(t.is_adjective("freundlich"));
        assert!(!t.is_adjective("table"));
        assert!(!t.is_adjective("ic"));
    }
}
