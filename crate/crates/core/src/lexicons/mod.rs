//! Language resources: polarity lexicon, emoticon table and formality
//! markers. All three are plain-text files so another language can be
//! plugged in without code changes.

mod emoticons;
mod formality;
mod polarity;

use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use emoticons::{EmoticonEntry, EmoticonTable};
pub use formality::FormalityMarkers;
pub use polarity::{PolarityEntry, PolarityLexicon};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: score {score} outside [-1, 1]")]
    ScoreRange { line: usize, score: f64 },
    #[error("line {line}: probabilities of `{glyph}` sum to {sum}, expected 1")]
    ProbabilitySum { line: usize, glyph: String, sum: f64 },
    #[error("token `{0}` is listed as both formal and informal")]
    FormalityConflict(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<LexiconError>,
    },
}

pub(crate) fn open(path: &Path) -> Result<File, LexiconError> {
    File::open(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn in_file(path: &Path) -> impl FnOnce(LexiconError) -> LexiconError + '_ {
    move |e| match e {
        e @ LexiconError::Io { .. } => e,
        e => LexiconError::InFile {
            path: path.to_path_buf(),
            source: Box::new(e),
        },
    }
}

/// Every resource feature extraction needs, loaded once.
#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    pub polarity: PolarityLexicon,
    pub emoticons: EmoticonTable,
    pub formality: FormalityMarkers,
}

pub fn load_polarity(path: &Path) -> Result<PolarityLexicon, LexiconError> {
    PolarityLexicon::from_reader(open(path)?).map_err(in_file(path))
}

pub fn load_emoticons(path: &Path) -> Result<EmoticonTable, LexiconError> {
    EmoticonTable::from_reader(open(path)?).map_err(in_file(path))
}

pub fn formality_markers(path: &Path) -> Result<FormalityMarkers, LexiconError> {
    FormalityMarkers::from_reader(open(path)?).map_err(in_file(path))
}
