//! Synthetic team-chat corpus whose labels follow lexicon polarity, with
//! matching lexicon files. Used by tests, benchmarks and the
//! `generate-fixture` command.

use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use crate::corpus::{parse_generic_jsonl_with, write_atomic, LabelClass};
use crate::features::{FeatureExtractor, LabeledSample};
use crate::lexicons::{EmoticonTable, FormalityMarkers, Lexicons, PolarityLexicon};
use crate::pipeline::{labels_to_csv, InputPaths, LabelRecord, PipelineError, RunConfig, SourceFormat};
use crate::preprocess::{preprocess_corpus, Anonymizer, PseudonymMap, SentenceSplitter};
use crate::seed::{derive_seed, rng};

pub const POLARITY_TSV: &str = "\
# word\tclass\tscore
great\tpositive\t0.8
happy\tpositive\t0.7
love\tpositive\t0.9
excellent\tpositive\t0.85
wonderful\tpositive\t0.75
nice\tpositive\t0.5
thanks\tpositive\t0.4
awesome\tpositive
perfect\tpositive\t0.6
glad\tpositive\t0.55
broken\tnegative\t-0.6
sad\tnegative\t-0.7
hate\tnegative\t-0.9
terrible\tnegative\t-0.85
awful\tnegative\t-0.8
annoying\tnegative\t-0.5
angry\tnegative\t-0.75
failing\tnegative\t-0.45
worried\tnegative
ugly\tnegative\t-0.55
";

pub const EMOTICONS_TSV: &str = "\
# glyph\tp_pos\tp_neu\tp_neg
:)\t0.8\t0.15\t0.05
:D\t0.9\t0.08\t0.02
:(\t0.05\t0.15\t0.8
:/\t0.1\t0.3\t0.6
";

pub const FORMALITY_TXT: &str = "\
[formal]
regards
kindly
please
[informal]
hey
guys
cool
";

const POSITIVE: &[&str] = &[
    "great", "happy", "love", "excellent", "wonderful", "nice", "thanks", "awesome", "perfect", "glad",
];
const NEGATIVE: &[&str] = &[
    "broken", "sad", "hate", "terrible", "awful", "annoying", "angry", "failing", "worried", "ugly",
];
const OPENERS: &[&str] = &["The", "Our", "This", "Today", "Yesterday", "Hey", "Please", "Maybe", "Now", "Team"];
const FILLERS: &[&str] = &[
    "build", "server", "meeting", "release", "review", "ticket", "branch", "deploy", "update", "code", "test",
    "team", "sprint", "backlog", "pipeline", "database", "we", "will", "check", "it", "at", "noon", "tomorrow",
    "guys", "kindly", "cool", "regards", "is", "was", "again", "for", "the",
];
const SENDERS: &[&str] = &["Anna Weber", "Paul Richter", "Lena Vogel", "Tom Berger"];
/// 2021-03-01T00:00:00Z.
const START: i64 = 1_614_556_800;
const DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureMessage {
    pub id: String,
    pub sender: String,
    pub timestamp: i64,
    pub content: String,
    /// `None` for messages that cleaning removes.
    pub label: Option<LabelClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub messages: Vec<FixtureMessage>,
}

fn sentence<R: Rng>(class: LabelClass, r: &mut R) -> String {
    let mut words: Vec<String> = (0..r.gen_range(3..7))
        .map(|_| FILLERS.choose(r).unwrap().to_string())
        .collect();
    let polar = match class {
        LabelClass::Positive => POSITIVE,
        LabelClass::Negative => NEGATIVE,
        LabelClass::Neutral => &[],
    };
    if !polar.is_empty() {
        for _ in 0..r.gen_range(1..3) {
            let at = r.gen_range(0..=words.len());
            words.insert(at, polar.choose(r).unwrap().to_string());
        }
    }
    let mut text = OPENERS.choose(r).unwrap().to_string();
    for w in words {
        text.push(' ');
        text.push_str(&w);
    }
    text.push(if r.gen_bool(0.3) { '!' } else { '.' });
    let emoticon = match class {
        LabelClass::Positive => [":)", ":D"].choose(r),
        LabelClass::Negative => [":(", ":/"].choose(r),
        LabelClass::Neutral => None,
    };
    if let Some(e) = emoticon.filter(|_| r.gen_bool(0.3)) {
        text.push(' ');
        text.push_str(e);
    }
    if r.gen_bool(0.15) {
        let who = SENDERS.choose(r).unwrap();
        text = format!("@**{who}** {text}");
    }
    text
}

impl Fixture {
    /// `per_class` sentences of each class, one sentence per message, spread
    /// over `days` days, plus one code-only message.
    pub fn generate(per_class: usize, days: usize, seed: u64) -> Self {
        let mut r = rng(seed);
        let mut classes: Vec<LabelClass> = LabelClass::ALL.iter().flat_map(|&c| vec![c; per_class]).collect();
        classes.shuffle(&mut r);
        let n = classes.len() as i64;
        let span = days.max(1) as i64 * DAY;
        let mut messages: Vec<FixtureMessage> = classes
            .into_iter()
            .enumerate()
            .map(|(i, class)| FixtureMessage {
                id: (1000 + i).to_string(),
                sender: SENDERS.choose(&mut r).unwrap().to_string(),
                timestamp: START + i as i64 * span / n.max(1) + r.gen_range(0..600),
                content: sentence(class, &mut r),
                label: Some(class),
            })
            .collect();
        let code_at = messages.len() / 2;
        messages.insert(
            code_at,
            FixtureMessage {
                id: "999".into(),
                sender: SENDERS[0].into(),
                timestamp: messages[code_at].timestamp,
                content: "```\ncargo build --release\n```".into(),
                label: None,
            },
        );
        Fixture { messages }
    }

    /// The default fixture: 100 sentences per class over 14 days.
    pub fn standard(seed: u64) -> Self {
        Self::generate(100, 14, seed)
    }

    pub fn jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            let line = json!({
                "id": m.id,
                "sender": m.sender,
                "timestamp": m.timestamp,
                "stream": "dev",
                "topic": "daily",
                "content": m.content,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }

    pub fn labels(&self) -> Vec<(String, LabelClass)> {
        self.messages
            .iter()
            .filter_map(|m| m.label.map(|l| (format!("{}:0", m.id), l)))
            .collect()
    }

    /// Same sentences with the labels randomly permuted.
    pub fn shuffled(&self, seed: u64) -> Fixture {
        let mut labels: Vec<LabelClass> = self.messages.iter().filter_map(|m| m.label).collect();
        labels.shuffle(&mut rng(derive_seed(seed, 0x5A)));
        let mut it = labels.into_iter();
        let messages = self
            .messages
            .iter()
            .map(|m| FixtureMessage {
                label: m.label.and_then(|_| it.next()),
                ..m.clone()
            })
            .collect();
        Fixture { messages }
    }

    pub fn label_records(&self, rater: &str) -> Vec<LabelRecord> {
        self.labels()
            .into_iter()
            .map(|(sentence_id, klass)| LabelRecord {
                sentence_id,
                klass,
                rater: rater.to_string(),
                round: 1,
                labeled_at: "1970-01-01T00:00:00Z".into(),
            })
            .collect()
    }

    pub fn lexicons() -> Lexicons {
        Lexicons {
            polarity: PolarityLexicon::from_reader(POLARITY_TSV.as_bytes()).expect("fixture polarity lexicon parses"),
            emoticons: EmoticonTable::from_reader(EMOTICONS_TSV.as_bytes()).expect("fixture emoticon table parses"),
            formality: FormalityMarkers::from_reader(FORMALITY_TXT.as_bytes()).expect("fixture formality markers parse"),
        }
    }

    /// Runs ingest and featurization in memory and attaches the labels.
    pub fn labeled_samples(&self) -> Result<Vec<LabeledSample>, PipelineError> {
        let lexicons = Self::lexicons();
        let mut splitter = SentenceSplitter::default();
        splitter.add_emoticons(lexicons.emoticons.glyphs());
        let mut map = PseudonymMap::default();
        let mut corpus = parse_generic_jsonl_with(self.jsonl().as_bytes(), &mut map)?;
        let mut anonymizer = Anonymizer::new(&[] as &[&str]);
        let store = preprocess_corpus(&mut corpus, &splitter, &mut anonymizer, &mut map);
        let extractor = FeatureExtractor::new(Arc::new(lexicons));
        let labels: std::collections::HashMap<String, LabelClass> = self.labels().into_iter().collect();
        let mut out = Vec::new();
        for s in &store.sentences {
            let Some(&label) = labels.get(&s.id()) else {
                continue;
            };
            let message = corpus.get(&s.message_id).expect("sentence parent exists");
            out.push(LabeledSample {
                features: extractor.analyze(s, message),
                label,
            });
        }
        Ok(out)
    }

    /// Writes the export, lexicons, labels and a `run.toml` into `dir` and
    /// returns the loaded config.
    pub fn write(&self, dir: &Path) -> Result<RunConfig, PipelineError> {
        let put = |name: &str, text: &str| write_atomic(&dir.join(name), text.as_bytes());
        put("export.jsonl", &self.jsonl())?;
        put("polarity.tsv", POLARITY_TSV)?;
        put("emoticons.tsv", EMOTICONS_TSV)?;
        put("formality.txt", FORMALITY_TXT)?;
        put("labels.csv", &labels_to_csv(&self.label_records("fixture"))?)?;
        let config = RunConfig {
            run_dir: "run".into(),
            inputs: InputPaths {
                corpus: Some("export.jsonl".into()),
                format: SourceFormat::Jsonl,
                polarity: vec!["polarity.tsv".into()],
                emoticons: Some("emoticons.tsv".into()),
                formality: Some("formality.txt".into()),
                labels: Some("labels.csv".into()),
                ..Default::default()
            },
            ..Default::default()
        };
        put("run.toml", &config.to_toml())?;
        RunConfig::load(&dir.join("run.toml"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_lexicon_sign() {
        let f = Fixture::generate(20, 3, 1);
        let samples = f.labeled_samples().unwrap();
        assert_eq!(samples.len(), 60);
        for s in &samples {
            let lex = s.features.dense["lex_mean"];
            let expected = match lex {
                v if v > 0.0 => LabelClass::Positive,
                v if v < 0.0 => LabelClass::Negative,
                _ => LabelClass::Neutral,
            };
            assert_eq!(s.label, expected, "{}", s.features.sentence_id);
        }
    }

    #[test]
    fn deterministic_and_shuffle_preserves_counts() {
        assert_eq!(Fixture::generate(5, 2, 3), Fixture::generate(5, 2, 3));
        let f = Fixture::generate(10, 2, 3);
        let s = f.shuffled(9);
        let count = |f: &Fixture, c| f.messages.iter().filter(|m| m.label == Some(c)).count();
        for c in LabelClass::ALL {
            assert_eq!(count(&f, c), count(&s, c));
        }
        assert_ne!(f.labels(), s.labels());
    }
}
