//! Versioned JSON envelope shared by every persisted artifact.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CorpusError, Result};

pub const FORMAT_VERSION: &str = "1";

/// A type that can be written with [`persist`] and read back with [`load`].
pub trait Artifact: Serialize + DeserializeOwned {
    /// Value of the `kind` discriminator.
    const KIND: &'static str;

    /// Structural validation run after deserialization.
    fn check(&self) -> std::result::Result<(), String> {
        Ok(())
    }
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    format_version: &'static str,
    kind: &'static str,
    data: &'a T,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    format_version: Value,
    kind: String,
    data: Value,
}

pub fn to_json_string<T: Artifact>(artifact: &T) -> String {
    let env = EnvelopeOut {
        format_version: FORMAT_VERSION,
        kind: T::KIND,
        data: artifact,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("artifact types serialize infallibly");
    s.push('\n');
    s
}

pub fn from_json_str<T: Artifact>(text: &str, path: &Path) -> Result<T> {
    let invalid = |message: String| CorpusError::InvalidArtifact {
        path: path.to_path_buf(),
        message,
    };
    let env: EnvelopeIn = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
    let version = match &env.format_version {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if version != FORMAT_VERSION {
        return Err(CorpusError::IncompatibleVersion {
            path: path.to_path_buf(),
            found: version,
        });
    }
    if env.kind != T::KIND {
        return Err(CorpusError::WrongKind {
            path: path.to_path_buf(),
            found: env.kind,
            expected: T::KIND,
        });
    }
    let value: T = serde_json::from_value(env.data).map_err(|e| invalid(e.to_string()))?;
    value.check().map_err(invalid)?;
    Ok(value)
}

pub fn persist<T: Artifact>(artifact: &T, path: &Path) -> Result<()> {
    write_atomic(path, to_json_string(artifact).as_bytes())
}

/// Writes through a sibling temporary file and a rename, so readers never
/// observe a partially written file. Parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io(parent))?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(|source| {
        let _ = fs::remove_file(&tmp);
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    })
}

pub fn load<T: Artifact>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text, path)
}
