//! Labeled documents, the class vocabulary, and deterministic fold plans.
//!
//! Corpora are read from JSONL (`{"id", "text", "label"?}` per line) or CSV
//! (`id,text,label` header). The ordered class list comes from a
//! `classes.json` sidecar next to the data file when one exists; otherwise it
//! is inferred from labels in first-seen order and a warning is logged,
//! since inferred order is not stable across differently ordered files.

mod folds;
pub(crate) mod rng;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use folds::{split, stratified_folds, FoldPlan, Split};

/// Name of the class sidecar file looked up next to a corpus file.
pub const CLASSES_SIDECAR: &str = "classes.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    /// Index into [`Corpus::classes`]; `None` for unlabeled inference input.
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    classes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess the format from a file extension (`.csv` or anything else → JSONL).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl Corpus {
    pub fn new(documents: Vec<Document>, classes: Vec<String>) -> Result<Self> {
        if documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        validate_classes(&classes)?;
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
            if let Some(label) = doc.label {
                if label >= classes.len() {
                    return Err(Error::UnknownLabel {
                        id: doc.id.clone(),
                        label: label.to_string(),
                    });
                }
            }
        }
        Ok(Self { documents, classes })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.id.clone()).collect()
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    /// Labels of all documents; errors on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<usize>> {
        self.documents
            .iter()
            .map(|d| d.label.ok_or_else(|| Error::Unlabeled(d.id.clone())))
            .collect()
    }

    /// Documents at `indices`, cloned, in the given order.
    pub fn select(&self, indices: &[usize]) -> Vec<Document> {
        indices.iter().map(|&i| self.documents[i].clone()).collect()
    }
}

fn validate_classes(classes: &[String]) -> Result<()> {
    if classes.is_empty() {
        return Err(Error::InvalidArgument("class list is empty".into()));
    }
    let mut seen = HashSet::new();
    for c in classes {
        if !seen.insert(c.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate class name `{c}`"
            )));
        }
    }
    Ok(())
}

/// Load a corpus, taking the class list from a `classes.json` sidecar in the
/// same directory when present.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus> {
    let sidecar = sidecar_path(path);
    let classes = if sidecar.is_file() {
        Some(read_classes(&sidecar)?)
    } else {
        None
    };
    load_corpus_with_classes(path, format, classes)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.parent()
        .unwrap_or_else(|| Path::new("."))
        .join(CLASSES_SIDECAR)
}

pub fn read_classes(path: &Path) -> Result<Vec<String>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let classes: Vec<String> = serde_json::from_str(&raw).map_err(|e| Error::MalformedRecord {
        path: path.to_path_buf(),
        line: e.line(),
        message: format!("expected an array of class names: {e}"),
    })?;
    validate_classes(&classes)?;
    Ok(classes)
}

/// Raw record shared by both input formats.
#[derive(Debug, Deserialize)]
struct Record {
    id: String,
    text: String,
    #[serde(default)]
    label: Option<String>,
}

pub fn load_corpus_with_classes(
    path: &Path,
    format: CorpusFormat,
    classes: Option<Vec<String>>,
) -> Result<Corpus> {
    let records = match format {
        CorpusFormat::Jsonl => read_jsonl(path)?,
        CorpusFormat::Csv => read_csv(path)?,
    };
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let declared = classes.is_some();
    let mut classes = classes.unwrap_or_default();
    let mut documents = Vec::with_capacity(records.len());
    for (_, rec) in records {
        let label = match rec.label.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(name) => match classes.iter().position(|c| c == name) {
                Some(i) => Some(i),
                None if !declared => {
                    classes.push(name.to_string());
                    Some(classes.len() - 1)
                }
                None => {
                    return Err(Error::UnknownLabel {
                        id: rec.id,
                        label: name.to_string(),
                    })
                }
            },
        };
        documents.push(Document {
            id: rec.id,
            text: rec.text,
            label,
        });
    }
    if !declared {
        log::warn!(
            "{}: no {CLASSES_SIDECAR} found, inferred class order {:?} from first occurrence",
            path.display(),
            classes
        );
    }
    Corpus::new(documents, classes)
}

fn read_jsonl(path: &Path) -> Result<Vec<(usize, Record)>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

fn read_csv(path: &Path) -> Result<Vec<(usize, Record)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::MalformedRecord {
                path: path.to_path_buf(),
                line: 1,
                message: format!("{other:?}"),
            },
        })?;
    let mut out = Vec::new();
    for result in reader.deserialize::<Record>() {
        let rec = result.map_err(|e| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        out.push((out.len() + 2, rec));
    }
    Ok(out)
}
