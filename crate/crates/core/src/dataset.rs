//! Text corpora: blank-line separated paragraphs or JSON lines.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{encode_sample, tokenize, SEP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    #[default]
    Text,
    Jsonl,
}

impl DatasetFormat {
    /// `jsonl` for `.jsonl`/`.ndjson` files, plain text otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => DatasetFormat::Jsonl,
            _ => DatasetFormat::Text,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub name: String,
    pub records: Vec<String>,
    stream: OnceLock<Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.records == other.records
    }
}

impl Corpus {
    pub fn new(name: impl Into<String>, records: Vec<String>) -> Self {
        Corpus {
            name: name.into(),
            records,
            stream: OnceLock::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records tokenized and joined with `SEP`; computed once.
    pub fn token_stream(&self) -> &[usize] {
        self.stream.get_or_init(|| {
            let mut out = Vec::new();
            for (i, r) in self.records.iter().enumerate() {
                if i > 0 {
                    out.push(SEP);
                }
                out.extend(tokenize(r));
            }
            out
        })
    }

    /// One analysis sample per record (`BOS` + bytes, at most `max_len`
    /// tokens). Records too short to yield a next-token target are skipped.
    pub fn samples(&self, max_len: usize) -> Vec<Vec<usize>> {
        self.records
            .iter()
            .map(|r| encode_sample(r, max_len))
            .filter(|s| s.len() >= 2)
            .collect()
    }
}

/// Splits text into records on blank (whitespace-only) lines.
pub fn split_paragraphs(content: &str) -> Vec<String> {
    let mut records = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in content.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                records.push(current.join("\n"));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        records.push(current.join("\n"));
    }
    records
}

/// Parses JSON lines, taking the string at `field` from each object.
/// Blank lines are skipped; line numbers in errors are 1-based.
pub fn parse_jsonl(content: &str, field: &str) -> Result<Vec<String>> {
    let mut records = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Data(format!("line {lineno}: malformed JSON: {e}")))?;
        let text = value
            .get(field)
            .ok_or_else(|| Error::Data(format!("line {lineno}: missing field `{field}`")))?
            .as_str()
            .ok_or_else(|| Error::Data(format!("line {lineno}: field `{field}` is not a string")))?;
        records.push(text.to_string());
    }
    Ok(records)
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat, field: Option<&str>) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records = match format {
        DatasetFormat::Text => split_paragraphs(&content),
        DatasetFormat::Jsonl => parse_jsonl(&content, field.unwrap_or("text"))
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?,
    };
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(Corpus::new(name, records))
}
