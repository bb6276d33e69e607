use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};
use std::sync::LazyLock;

use regex::Regex;

static TOKEN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[\[[a-z]+_\d+\]\]|[\p{L}\p{N}]+(?:['’\-.][\p{L}\p{N}]+)*|\S").unwrap()
});

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "etc.", "vs.", "cf.", "approx.", "a.m.", "p.m.", "mr.", "mrs.", "ms.", "dr.", "prof.",
    "no.", "z.b.", "d.h.", "u.a.", "bzw.", "ca.", "usw.", "evtl.", "ggf.", "inkl.", "vgl.", "nr.", "s.o.",
    "z.", "b.",
];

/// Common emoticons recognized even without an emoticon table.
pub const DEFAULT_EMOTICONS: &[&str] = &[
    ":)", ":-)", ":(", ":-(", ":D", ":-D", ";)", ";-)", ":P", ":-P", ":p", ":-p", ":O", ":o", ":/", ":-/",
    ":'(", ":|", ":-|", ":*", ":-*", "xD", "XD", "^^", "<3", "o.O", "O.o", "-.-", "B)", "8)", ":-?", ":?",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '»', '”', '’'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '«', '„', '“', '‘'];

/// Rule-based sentence boundary detection.
///
/// A boundary falls after a token ending in `.`, `!` or `?` (optionally
/// followed by closing quotes/brackets) when the next token starts with an
/// uppercase letter. Listed abbreviations and emoticons never end a sentence.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
    emoticons: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        SentenceSplitter::new(DEFAULT_ABBREVIATIONS.iter().copied(), DEFAULT_EMOTICONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn new<A, E>(abbreviations: A, emoticons: E) -> Self
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        E: IntoIterator,
        E::Item: AsRef<str>,
    {
        SentenceSplitter {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.as_ref().trim().to_lowercase())
                .filter(|a| !a.is_empty())
                .collect(),
            emoticons: emoticons.into_iter().map(|e| e.as_ref().to_string()).collect(),
        }
    }

    /// Reads an abbreviation list, one entry per line (`#` starts a comment).
    pub fn read_abbreviations<R: Read>(reader: R) -> std::io::Result<Vec<String>> {
        let mut out = Vec::new();
        for line in BufReader::new(reader).lines() {
            let line = line?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                out.push(line.to_string());
            }
        }
        Ok(out)
    }

    pub fn add_abbreviations<I>(&mut self, abbreviations: I)
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        self.abbreviations.extend(
            abbreviations
                .into_iter()
                .map(|a| a.as_ref().trim().to_lowercase())
                .filter(|a| !a.is_empty()),
        );
    }

    pub fn add_emoticons<I>(&mut self, glyphs: I)
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        self.emoticons.extend(glyphs.into_iter().map(|g| g.as_ref().to_string()));
    }

    pub fn is_abbreviation(&self, token: &str) -> bool {
        let core = token.trim_start_matches(OPENERS);
        self.abbreviations.contains(&core.to_lowercase())
    }

    pub fn is_emoticon(&self, token: &str) -> bool {
        self.emoticons.contains(token)
    }

    /// Splits cleaned text into sentence strings. Empty input gives an
    /// empty list; text without a boundary gives exactly one sentence.
    pub fn split<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let chunks: Vec<(usize, &str)> = chunks(text).collect();
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for (i, &(pos, chunk)) in chunks.iter().enumerate() {
            let begin = *start.get_or_insert(pos);
            let end = pos + chunk.len();
            let boundary = match chunks.get(i + 1) {
                None => true,
                Some(&(_, next)) => self.ends_sentence(chunk) && starts_uppercase(next),
            };
            if boundary {
                out.push(&text[begin..end]);
                start = None;
            }
        }
        out
    }

    fn ends_sentence(&self, chunk: &str) -> bool {
        let stripped = chunk.trim_end_matches(CLOSERS);
        if !stripped.ends_with(['.', '!', '?']) {
            return false;
        }
        !(self.is_abbreviation(chunk) || self.is_abbreviation(stripped) || self.is_emoticon(chunk))
    }

    /// Tokens of a sentence. Concatenating them gives the input with
    /// whitespace removed.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        for (_, chunk) in chunks(text) {
            if self.is_emoticon(chunk) || self.is_abbreviation(chunk) {
                tokens.push(chunk.to_string());
                continue;
            }
            tokens.extend(TOKEN.find_iter(chunk).map(|m| m.as_str().to_string()));
        }
        tokens
    }
}

fn chunks(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split_whitespace()
        .map(move |c| (c.as_ptr() as usize - text.as_ptr() as usize, c))
}

fn starts_uppercase(chunk: &str) -> bool {
    chunk
        .trim_start_matches(OPENERS)
        .chars()
        .next()
        .is_some_and(char::is_uppercase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_sentence() {
        let s = SentenceSplitter::default();
        assert_eq!(s.split("Yes, this was my mistake."), ["Yes, this was my mistake."]);
        assert_eq!(s.split("no boundary here"), ["no boundary here"]);
        assert!(s.split("").is_empty());
        assert!(s.split("   ").is_empty());
    }

    #[test]
    fn two_sentences() {
        let s = SentenceSplitter::default();
        assert_eq!(s.split("Hello. How are you?"), ["Hello.", "How are you?"]);
        assert_eq!(s.split("Really?! \"Yes.\" Fine"), ["Really?!", "\"Yes.\"", "Fine"]);
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        let s = SentenceSplitter::default();
        assert_eq!(s.split("ok. then we go").len(), 1);
    }

    #[test]
    fn abbreviations_do_not_split() {
        let s = SentenceSplitter::new(["p.m."], Vec::<String>::new());
        assert_eq!(s.split("We meet at 5 p.m. tomorrow").len(), 1);
        assert_eq!(s.split("We meet at 5 p.m. Tomorrow works").len(), 1);
        let plain = SentenceSplitter::new(Vec::<String>::new(), Vec::<String>::new());
        assert_eq!(plain.split("We meet at 5 p.m. Tomorrow works").len(), 2);
        assert_eq!(SentenceSplitter::default().split("Siehe z.B. Anhang").len(), 1);
    }

    #[test]
    fn emoticons_do_not_split() {
        let s = SentenceSplitter::default();
        assert_eq!(s.split("Look o.O That was odd").len(), 1);
        assert_eq!(s.split("Super :-? Maybe").len(), 1);
    }

    #[test]
    fn tokenize_keeps_emoticons_and_placeholders() {
        let s = SentenceSplitter::default();
        assert_eq!(
            s.tokenize("Welcome in [[person_1]], :-) good decision!"),
            ["Welcome", "in", "[[person_1]]", ",", ":-)", "good", "decision", "!"]
        );
        assert_eq!(s.tokenize("don't use e-mail z.B. now"), ["don't", "use", "e-mail", "z.B.", "now"]);
    }

    proptest! {
        #[test]
        fn concatenation_adds_counts(a in "[A-Z][a-z]{1,8}( [a-z]{1,8}){0,4}[.!?]",
                                     b in "[A-Z][a-z]{1,8}( [a-z]{1,8}){0,4}[.!?]") {
            let s = SentenceSplitter::default();
            prop_assume!(!s.is_abbreviation(a.split_whitespace().last().unwrap()));
            let joined = format!("{a} {b}");
            prop_assert_eq!(s.split(&joined).len(), s.split(&a).len() + s.split(&b).len());
        }

        #[test]
        fn tokens_rejoin_to_text(t in r"[a-zA-Z0-9 .,!?:;()'\[\]_-]{0,50}") {
            let s = SentenceSplitter::default();
            let joined: String = s.tokenize(&t).concat();
            let expected: String = t.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(joined, expected);
        }

        #[test]
        fn sentences_cover_all_chunks(t in r"[A-Za-z .!?]{0,60}") {
            let s = SentenceSplitter::default();
            let parts = s.split(&t);
            let rejoined: Vec<&str> = parts.iter().flat_map(|p| p.split_whitespace()).collect();
            let original: Vec<&str> = t.split_whitespace().collect();
            prop_assert_eq!(rejoined, original);
        }
    }
}
