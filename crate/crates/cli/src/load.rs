//! Reading programs and corpora from disk.

use std::path::Path;

use drq_core::corpus::CorpusIndex;
use drq_core::redcode::{parse_with, AsmOptions, Warrior};

use crate::failure::{read_err, Failure};

pub fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

/// Assembles `path`; programs without a `;name` line take the file stem.
pub fn warrior(path: &Path, asm: &AsmOptions) -> Result<Warrior, Failure> {
    let text = std::fs::read_to_string(path).map_err(read_err(path))?;
    let mut w = parse_with(&text, &asm.clone().with_default_name(stem(path)))
        .map_err(|e| Failure::input(format!("{}:{}: {}", path.display(), e.line, e.kind)))?;
    w.source = text;
    Ok(w)
}

/// Indexes a corpus directory, reporting skipped files on standard error.
/// An empty result is an input error.
pub fn corpus(dir: &Path, asm: &AsmOptions) -> Result<(CorpusIndex, Vec<Warrior>), Failure> {
    if !dir.is_dir() {
        return Err(Failure::input(format!("{}: not a directory", dir.display())));
    }
    let index = CorpusIndex::load_dir(dir, asm).map_err(read_err(dir))?;
    for (entry, msg) in index.skipped() {
        eprintln!("skipped {}: {msg}", entry.path.display());
    }
    let warriors = index.warriors();
    if warriors.is_empty() {
        return Err(Failure::input(format!("{}: no parseable .red files", dir.display())));
    }
    Ok((index, warriors))
}
