use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::corpus::{write_atomic, LabelClass};
use crate::preprocess::SentenceStore;
use crate::seed::{derive_seed, fnv1a, rng};

/// Rater name used for classifier output.
pub const MODEL_RATER: &str = "model";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub sentence_id: String,
    #[serde(rename = "class")]
    pub klass: LabelClass,
    pub rater: String,
    pub round: u32,
    /// RFC 3339, UTC.
    pub labeled_at: String,
}

/// Uniqueness of `(sentence_id, rater, round)`; rounds start at 1 and a
/// round-2 record needs a round-1 record by the same rater.
pub fn validate_records(records: &[LabelRecord]) -> Result<()> {
    let mut seen = HashSet::new();
    for r in records {
        if r.round < 1 {
            return Err(PipelineError::Labels(format!("{}: round must be at least 1", r.sentence_id)));
        }
        if !seen.insert((r.sentence_id.as_str(), r.rater.as_str(), r.round)) {
            return Err(PipelineError::Labels(format!(
                "duplicate label for sentence {} by {} in round {}",
                r.sentence_id, r.rater, r.round
            )));
        }
    }
    for r in records.iter().filter(|r| r.round > 1) {
        if !seen.contains(&(r.sentence_id.as_str(), r.rater.as_str(), r.round - 1)) {
            return Err(PipelineError::Labels(format!(
                "sentence {} has a round-{} label by {} without a round-{} label",
                r.sentence_id,
                r.round,
                r.rater,
                r.round - 1
            )));
        }
    }
    Ok(())
}

pub fn read_labels<R: std::io::Read>(reader: R) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for (i, row) in csv::Reader::from_reader(reader).deserialize().enumerate() {
        let record: LabelRecord = row.map_err(|e| PipelineError::Labels(format!("row {}: {e}", i + 1)))?;
        out.push(record);
    }
    validate_records(&out)?;
    Ok(out)
}

pub fn load_labels(path: &Path) -> Result<Vec<LabelRecord>> {
    let file = std::fs::File::open(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_labels(file).map_err(|e| match e {
        PipelineError::Labels(m) => PipelineError::Labels(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn labels_to_csv(records: &[LabelRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        w.write_record(["sentence_id", "class", "rater", "round", "labeled_at"])
            .map_err(|e| PipelineError::Labels(e.to_string()))?;
    }
    for r in records {
        w.serialize(r).map_err(|e| PipelineError::Labels(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| PipelineError::Labels(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn save_labels(path: &Path, records: &[LabelRecord]) -> Result<()> {
    write_atomic(path, labels_to_csv(records)?.as_bytes())?;
    Ok(())
}

/// Ground-truth labels: round-1 records of human raters (all of them, or
/// only `rater` when given). The first record in file order wins when
/// several raters labeled a sentence.
pub fn training_labels(records: &[LabelRecord], rater: Option<&str>) -> BTreeMap<String, LabelClass> {
    let mut out = BTreeMap::new();
    for r in records {
        let eligible = r.round == 1 && r.rater != MODEL_RATER && rater.is_none_or(|name| r.rater == name);
        if eligible {
            out.entry(r.sentence_id.clone()).or_insert(r.klass);
        }
    }
    out
}

pub const GUIDANCE: &str = "\
Label the emotion a sentence transports.
  positive  e.g. love, happiness, euphoria, surprise, sympathy
  neutral   e.g. facts, ambivalence, interest, indifference, apathy
  negative  e.g. fear, hate, anger, trouble, regret
Keys: p = positive, n = neutral, x = negative, u = undo, s = skip, q = save and quit
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SessionSummary {
    pub labeled: usize,
    pub skipped: usize,
    pub remaining: usize,
    pub quit: bool,
}

/// Sentences the rater still has to label in `round`, in a seeded order.
pub fn pending_sentences(store: &SentenceStore, records: &[LabelRecord], rater: &str, round: u32, seed: u64) -> Vec<String> {
    let done: HashSet<(&str, u32)> = records
        .iter()
        .filter(|r| r.rater == rater)
        .map(|r| (r.sentence_id.as_str(), r.round))
        .collect();
    let mut ids: Vec<String> = store
        .sentences
        .iter()
        .map(|s| s.id())
        .filter(|id| !done.contains(&(id.as_str(), round)) && (round == 1 || done.contains(&(id.as_str(), round - 1))))
        .collect();
    let salt = fnv1a(rater.bytes().chain(round.to_le_bytes()));
    ids.shuffle(&mut rng(derive_seed(seed, salt)));
    ids
}

/// Console labeling loop. New records are appended to `records`; end of
/// input behaves like `q`.
#[allow(clippy::too_many_arguments)]
pub fn label_session<R: BufRead, W: Write>(
    input: &mut R,
    output: &mut W,
    store: &SentenceStore,
    records: &mut Vec<LabelRecord>,
    rater: &str,
    round: u32,
    seed: u64,
    now: &dyn Fn() -> String,
) -> Result<SessionSummary> {
    let io = |source| PipelineError::Io {
        path: "<console>".into(),
        source,
    };
    let mut queue = pending_sentences(store, records, rater, round, seed);
    queue.reverse();
    let mut added: Vec<usize> = Vec::new();
    let mut summary = SessionSummary::default();
    writeln!(output, "{GUIDANCE}").map_err(io)?;
    while let Some(id) = queue.last().cloned() {
        let text = store.get(&id).map(|s| s.clean.as_str()).unwrap_or("");
        write!(output, "\n[{}] {text}\n> ", queue.len()).map_err(io)?;
        output.flush().map_err(io)?;
        let mut line = String::new();
        if input.read_line(&mut line).map_err(io)? == 0 {
            summary.quit = true;
            break;
        }
        let klass = match line.trim() {
            "p" => LabelClass::Positive,
            "n" => LabelClass::Neutral,
            "x" => LabelClass::Negative,
            "s" => {
                queue.pop();
                summary.skipped += 1;
                continue;
            }
            "u" => {
                match added.pop() {
                    Some(i) => {
                        let undone = records.remove(i);
                        summary.labeled -= 1;
                        writeln!(output, "undone: {}", undone.sentence_id).map_err(io)?;
                        queue.push(undone.sentence_id);
                    }
                    None => writeln!(output, "nothing to undo").map_err(io)?,
                }
                continue;
            }
            "q" => {
                summary.quit = true;
                break;
            }
            _ => {
                writeln!(output, "unknown key; use p, n, x, u, s or q").map_err(io)?;
                continue;
            }
        };
        queue.pop();
        records.push(LabelRecord {
            sentence_id: id,
            klass,
            rater: rater.to_string(),
            round,
            labeled_at: now(),
        });
        added.push(records.len() - 1);
        summary.labeled += 1;
    }
    summary.remaining = queue.len();
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{split_sentences, SentenceSplitter};

    fn store(n: usize) -> SentenceStore {
        let splitter = SentenceSplitter::default();
        SentenceStore {
            sentences: (0..n)
                .flat_map(|i| split_sentences(&i.to_string(), &format!("Sentence number {i}."), &splitter))
                .collect(),
            removed: Vec::new(),
        }
    }

    fn run(input: &str, store: &SentenceStore, records: &mut Vec<LabelRecord>, round: u32) -> SessionSummary {
        let mut out = Vec::new();
        label_session(&mut input.as_bytes(), &mut out, store, records, "ann", round, 7, &|| "t".into()).unwrap()
    }

    #[test]
    fn keys_map_to_classes() {
        let s = store(3);
        let mut records = Vec::new();
        let summary = run("p\nn\nx\n", &s, &mut records, 1);
        assert_eq!(summary.labeled, 3);
        let classes: Vec<LabelClass> = records.iter().map(|r| r.klass).collect();
        assert_eq!(classes, [LabelClass::Positive, LabelClass::Neutral, LabelClass::Negative]);
        assert_eq!(records[0].sentence_id, pending_sentences(&s, &[], "ann", 1, 7)[0]);
    }

    #[test]
    fn undo_represents_sentence() {
        let s = store(2);
        let mut records = Vec::new();
        let summary = run("p\nu\nx\nq\n", &s, &mut records, 1);
        assert_eq!(summary.labeled, 1);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].klass, LabelClass::Negative);
        assert_eq!(records[0].sentence_id, pending_sentences(&s, &[], "ann", 1, 7)[0]);
        assert_eq!(summary.remaining, 1);
    }

    #[test]
    fn resume_skips_labeled() {
        let s = store(4);
        let mut records = Vec::new();
        run("p\nq\n", &s, &mut records, 1);
        let first = records[0].sentence_id.clone();
        let pending = pending_sentences(&s, &records, "ann", 1, 7);
        assert_eq!(pending.len(), 3);
        assert!(!pending.contains(&first));
        run("n\nn\nn\nn\n", &s, &mut records, 1);
        assert_eq!(records.len(), 4);
        validate_records(&records).unwrap();
    }

    #[test]
    fn second_round_only_covers_first_round() {
        let s = store(3);
        let mut records = Vec::new();
        run("p\nq\n", &s, &mut records, 1);
        assert_eq!(pending_sentences(&s, &records, "ann", 2, 7).len(), 1);
        run("x\n", &s, &mut records, 2);
        validate_records(&records).unwrap();
        assert_eq!(records[1].round, 2);
    }

    #[test]
    fn validation_rules() {
        let r = |id: &str, round| LabelRecord {
            sentence_id: id.into(),
            klass: LabelClass::Neutral,
            rater: "a".into(),
            round,
            labeled_at: String::new(),
        };
        assert!(validate_records(&[r("1:0", 1), r("1:0", 1)]).is_err());
        assert!(validate_records(&[r("1:0", 2)]).is_err());
        assert!(validate_records(&[r("1:0", 0)]).is_err());
        validate_records(&[r("1:0", 1), r("1:0", 2)]).unwrap();
    }

    #[test]
    fn csv_roundtrip_and_training_selection() {
        let records = vec![
            LabelRecord {
                sentence_id: "1:0".into(),
                klass: LabelClass::Positive,
                rater: "a".into(),
                round: 1,
                labeled_at: "2021-01-01T00:00:00Z".into(),
            },
            LabelRecord {
                sentence_id: "1:0".into(),
                klass: LabelClass::Negative,
                rater: MODEL_RATER.into(),
                round: 1,
                labeled_at: "2021-01-01T00:00:00Z".into(),
            },
        ];
        let text = labels_to_csv(&records).unwrap();
        assert!(text.starts_with("sentence_id,class,rater,round,labeled_at\n1:0,positive,a,1,"));
        assert_eq!(read_labels(text.as_bytes()).unwrap(), records);
        let t = training_labels(&records, None);
        assert_eq!(t["1:0"], LabelClass::Positive);
        assert!(training_labels(&records, Some("b")).is_empty());
        assert_eq!(read_labels(labels_to_csv(&[]).unwrap().as_bytes()).unwrap(), []);
    }
}
