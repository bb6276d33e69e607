use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read};

use super::PreprocessError;

const MAX_DISTANCE: usize = 2;

/// Word frequency table used for spelling correction.
#[derive(Debug, Clone, Default)]
pub struct SpellDictionary {
    frequencies: HashMap<String, u64>,
    by_len: BTreeMap<usize, Vec<String>>,
}

impl SpellDictionary {
    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut frequencies: HashMap<String, u64> = HashMap::new();
        for (word, freq) in pairs {
            let word = word.as_ref().trim().to_lowercase();
            if word.is_empty() {
                continue;
            }
            let slot = frequencies.entry(word).or_default();
            *slot = (*slot).max(freq);
        }
        let mut by_len: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for word in frequencies.keys() {
            by_len.entry(word.chars().count()).or_default().push(word.clone());
        }
        for words in by_len.values_mut() {
            words.sort();
        }
        SpellDictionary { frequencies, by_len }
    }

    /// Reads `word<TAB>frequency` lines.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, PreprocessError> {
        let mut pairs = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let bad = |message: String| PreprocessError::Dictionary { line: i + 1, message };
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, freq) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `word<TAB>frequency`".into()))?;
            let freq: u64 = freq.trim().parse().map_err(|_| bad(format!("bad frequency `{freq}`")))?;
            pairs.push((word.to_string(), freq));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.frequencies.contains_key(word)
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.frequencies.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Returns the corrected token and whether the token was flagged.
///
/// Known words pass through unflagged. Otherwise the nearest dictionary
/// word within edit distance 2 is chosen (smaller distance, then higher
/// frequency, then lexicographic order). Unknown words with no candidate
/// come back unchanged but flagged.
pub fn correct_spelling(token: &str, dictionary: &SpellDictionary) -> (String, bool) {
    if dictionary.contains(token) {
        return (token.to_string(), false);
    }
    let chars: Vec<char> = token.chars().collect();
    let lo = chars.len().saturating_sub(MAX_DISTANCE);
    let hi = chars.len() + MAX_DISTANCE;
    let mut best: Option<(usize, u64, &str)> = None;
    for words in dictionary.by_len.range(lo..=hi).map(|(_, w)| w) {
        for word in words {
            let Some(d) = bounded_levenshtein(&chars, word, MAX_DISTANCE) else {
                continue;
            };
            let freq = dictionary.frequencies[word];
            let better = match best {
                None => true,
                Some((bd, bf, bw)) => (d, std::cmp::Reverse(freq), word.as_str()) < (bd, std::cmp::Reverse(bf), bw),
            };
            if better {
                best = Some((d, freq, word));
            }
        }
    }
    match best {
        Some((_, _, word)) => (word.to_string(), true),
        None => (token.to_string(), true),
    }
}

/// Levenshtein distance if it is at most `limit`.
fn bounded_levenshtein(a: &[char], b: &str, limit: usize) -> Option<usize> {
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > limit {
        return None;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > limit {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= limit).then_some(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    const ALPHABET: &str = "abcdefghijklmnopqrstuvwxyz";

    /// All strings one insertion, deletion or substitution away.
    fn edits1(word: &str) -> BTreeSet<String> {
        let chars: Vec<char> = word.chars().collect();
        let mut out = BTreeSet::new();
        for i in 0..=chars.len() {
            for c in ALPHABET.chars() {
                let mut v = chars.clone();
                v.insert(i, c);
                out.insert(v.into_iter().collect());
            }
            if i < chars.len() {
                let mut v = chars.clone();
                v.remove(i);
                out.insert(v.iter().collect());
                for c in ALPHABET.chars() {
                    let mut v = chars.clone();
                    v[i] = c;
                    out.insert(v.into_iter().collect());
                }
            }
        }
        out.remove(word);
        out
    }

    fn dict(pairs: &[(&str, u64)]) -> SpellDictionary {
        SpellDictionary::from_pairs(pairs.iter().map(|&(w, f)| (w, f)))
    }

    #[test]
    fn known_word_passes() {
        assert_eq!(correct_spelling("good", &dict(&[("good", 3)])), ("good".into(), false));
    }

    #[test]
    fn tie_breaks_lexicographically() {
        let d = dict(&[("hello", 1), ("help", 1)]);
        let e1 = edits1("helo");
        assert!(e1.contains("hello") && e1.contains("help"));
        assert_eq!(correct_spelling("helo", &d), ("hello".into(), true));
    }

    #[test]
    fn frequency_beats_order_and_distance_beats_frequency() {
        let d = dict(&[("hello", 1), ("help", 5)]);
        assert_eq!(correct_spelling("helo", &d).0, "help");
        let d = dict(&[("hxllo", 1), ("heyyo", 100)]);
        assert_eq!(correct_spelling("hello", &d).0, "hxllo");
    }

    #[test]
    fn no_candidate() {
        assert_eq!(correct_spelling("xqzv", &dict(&[("good", 1), ("bad", 1)])), ("xqzv".into(), true));
    }

    #[test]
    fn reads_tsv() {
        let d = SpellDictionary::from_reader("good\t10\nbad\t3\n".as_bytes()).unwrap();
        assert_eq!(d.frequency("good"), Some(10));
        assert!(SpellDictionary::from_reader("good 10\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn distance_one_matches_edit_enumeration(word in "[a-e]{1,5}", target in "[a-e]{1,6}") {
            let chars: Vec<char> = word.chars().collect();
            let one = bounded_levenshtein(&chars, &target, 2) == Some(1);
            prop_assert_eq!(one, edits1(&word).contains(&target));
        }

        #[test]
        fn stays_in_dictionary(word in "[a-f]{1,6}", words in prop::collection::vec(("[a-f]{1,6}", 1u64..5), 0..8)) {
            let d = SpellDictionary::from_pairs(words.clone());
            let (out, _) = correct_spelling(&word, &d);
            prop_assert!(out == word || d.contains(&out));
        }
    }
}
