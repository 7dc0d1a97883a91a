//! Line-oriented JSON files: claims and verdicts.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// One `[annotation_id, evidence_id, page_title_raw, sentence_index]` entry.
/// The page and index are null for NOT ENOUGH INFO claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceEntry(pub Option<i64>, pub Option<i64>, pub Option<String>, pub Option<u32>);

impl EvidenceEntry {
    pub fn pair(&self) -> Option<(String, u32)> {
        Some((self.2.clone()?, self.3?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: u64,
    pub claim: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<Vec<EvidenceEntry>>>,
}

/// A set of (page_title_raw, sentence_index) pairs that jointly verify a claim.
pub type EvidenceGroup = BTreeSet<(String, u32)>;

impl ClaimRecord {
    /// Evidence groups with null entries removed; groups left empty are dropped.
    pub fn evidence_groups(&self) -> Vec<EvidenceGroup> {
        self.evidence
            .iter()
            .flatten()
            .map(|g| g.iter().filter_map(EvidenceEntry::pair).collect::<EvidenceGroup>())
            .filter(|g| !g.is_empty())
            .collect()
    }
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Ingest {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::format("jsonl", e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_claims<R: BufRead>(reader: R) -> Result<Vec<ClaimRecord>> {
    read_jsonl(reader)
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn read_claims_file(path: &Path) -> Result<Vec<ClaimRecord>> {
    read_claims(open(path)?)
}
