//! Replay cassettes: JSONL lines of `{"prompt_sha256", "completion"}` with an
//! optional recorded `latency_s`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub prompt_sha256: String,
    pub completion: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_s: Option<f64>,
}

/// Entries keep insertion order so saved cassettes are stable.
#[derive(Debug, Clone, Default)]
pub struct Cassette {
    entries: Vec<CassetteEntry>,
    index: HashMap<String, usize>,
}

impl Cassette {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CassetteEntry] {
        &self.entries
    }

    pub fn get(&self, hash: &str) -> Option<&CassetteEntry> {
        self.index.get(hash).map(|&i| &self.entries[i])
    }

    /// Add an entry. Re-adding a hash with the same completion is a no-op;
    /// a conflicting completion is an error.
    pub fn insert(&mut self, entry: CassetteEntry) -> Result<()> {
        if let Some(&i) = self.index.get(&entry.prompt_sha256) {
            if self.entries[i].completion != entry.completion {
                return Err(Error::Cassette(format!(
                    "conflicting completions for prompt {}",
                    entry.prompt_sha256
                )));
            }
            return Ok(());
        }
        self.index
            .insert(entry.prompt_sha256.clone(), self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn record(&mut self, prompt: &str, completion: impl Into<String>) -> Result<()> {
        self.insert(CassetteEntry {
            prompt_sha256: prompt_sha256(prompt),
            completion: completion.into(),
            latency_s: None,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cassette = Self::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: CassetteEntry =
                serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })?;
            cassette.insert(entry)?;
        }
        Ok(cassette)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for e in &self.entries {
            serde_json::to_writer(&mut out, e).expect("serializable");
            out.push(b'\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&out).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_string() {
        assert_eq!(
            prompt_sha256("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let mut c = Cassette::new();
        c.record("p1", " positive.").unwrap();
        c.insert(CassetteEntry {
            prompt_sha256: prompt_sha256("p2"),
            completion: "negative".into(),
            latency_s: Some(0.25),
        })
        .unwrap();
        c.save(&path).unwrap();
        let back = Cassette::load(&path).unwrap();
        assert_eq!(back.entries(), c.entries());
        assert_eq!(
            back.get(&prompt_sha256("p2")).unwrap().latency_s,
            Some(0.25)
        );
    }

    #[test]
    fn conflicting_entries_rejected() {
        let mut c = Cassette::new();
        c.record("p", "a").unwrap();
        c.record("p", "a").unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.record("p", "b").is_err());
    }
}
