//! Versioned JSON-lines files: a header line `{"format": ..., "version": "M.m"}`
//! followed by one JSON record per line. Readers reject unknown major versions.

use std::io::{self, BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAJOR: u32 = 1;
pub const VERSION: &str = "1.0";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: String,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("empty file")]
    Empty,
    #[error("expected format {expected}, found {found}")]
    WrongFormat { expected: String, found: String },
    #[error("unsupported version {0}")]
    UnsupportedVersion(String),
}

pub fn write_jsonl<W: Write, T: Serialize>(mut out: W, format: &str, records: &[T]) -> Result<(), FormatError> {
    let header = Header { format: format.into(), version: VERSION.into() };
    serde_json::to_writer(&mut out, &header).map_err(|source| FormatError::Json { line: 1, source })?;
    out.write_all(b"\n")?;
    for (i, r) in records.iter().enumerate() {
        serde_json::to_writer(&mut out, r).map_err(|source| FormatError::Json { line: i + 2, source })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn check_header(line: &str, format: &str) -> Result<(), FormatError> {
    let header: Header = serde_json::from_str(line).map_err(|source| FormatError::Json { line: 1, source })?;
    if header.format != format {
        return Err(FormatError::WrongFormat { expected: format.into(), found: header.format });
    }
    let major = header.version.split('.').next().and_then(|m| m.parse::<u32>().ok());
    if major != Some(MAJOR) {
        return Err(FormatError::UnsupportedVersion(header.version));
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead, T: DeserializeOwned>(input: R, format: &str) -> Result<Vec<T>, FormatError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or(FormatError::Empty)??;
    check_header(&first, format)?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| FormatError::Json { line: i + 2, source })?);
    }
    Ok(out)
}

/// Writes to a sibling temp file and renames, so readers never see a partial file.
pub fn write_atomic(path: &std::path::Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}
