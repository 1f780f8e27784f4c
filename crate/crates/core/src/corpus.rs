//! Directory of `.red` files, indexed in a stable order.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::redcode::{parse_with, AsmOptions, Warrior};

#[derive(Clone, Debug, PartialEq)]
pub enum EntryStatus {
    Parsed(Warrior),
    /// Excluded from battles; the message is the assembler diagnostic.
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    /// File stem.
    pub name: String,
    pub path: PathBuf,
    /// SHA-256 of the file bytes.
    pub digest: String,
    pub status: EntryStatus,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusIndex {
    pub entries: Vec<CorpusEntry>,
}

impl CorpusIndex {
    /// Indexes every `*.red` file directly inside `dir`, sorted by name.
    /// Warriors without a `;name` line are named after their file.
    pub fn load_dir(dir: &Path, opts: &AsmOptions) -> std::io::Result<Self> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("red")))
            .collect();
        paths.sort_by(|a, b| a.file_stem().cmp(&b.file_stem()).then_with(|| a.cmp(b)));
        let mut entries = Vec::with_capacity(paths.len());
        for path in paths {
            let bytes = std::fs::read(&path)?;
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let digest = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            let text = String::from_utf8_lossy(&bytes);
            let status = match parse_with(&text, &opts.clone().with_default_name(name.clone())) {
                Ok(w) => EntryStatus::Parsed(w),
                Err(e) => EntryStatus::Failed(e.to_string()),
            };
            entries.push(CorpusEntry { name, path, digest, status });
        }
        Ok(CorpusIndex { entries })
    }

    pub fn warriors(&self) -> Vec<Warrior> {
        self.entries
            .iter()
            .filter_map(|e| match &e.status {
                EntryStatus::Parsed(w) => Some(w.clone()),
                EntryStatus::Failed(_) => None,
            })
            .collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| matches!(e.status, EntryStatus::Parsed(_))).map(|e| e.name.as_str()).collect()
    }

    pub fn skipped(&self) -> impl Iterator<Item = (&CorpusEntry, &str)> {
        self.entries.iter().filter_map(|e| match &e.status {
            EntryStatus::Failed(msg) => Some((e, msg.as_str())),
            EntryStatus::Parsed(_) => None,
        })
    }
}
