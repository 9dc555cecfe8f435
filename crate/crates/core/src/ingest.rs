//! Reading and writing relation corpora.
//!
//! The line format is `cause | adverb | effect`, optionally followed by
//! `| source-tag`. Fields are trimmed, blank lines and `#` comments are
//! skipped, and both `\n` and `\r\n` endings are accepted. Files ending in
//! `.jsonl`/`.ndjson` hold one JSON record per line instead.
//!
//! Parsing is lenient: a malformed line becomes a [`Diagnostic`] and the
//! parser moves on.

use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub cause: String,
    pub adverb: String,
    pub effect: String,
    #[serde(default, rename = "source", skip_serializing_if = "Option::is_none")]
    pub source_tag: Option<String>,
}

impl RelationRecord {
    pub fn new(
        cause: impl Into<String>,
        adverb: impl Into<String>,
        effect: impl Into<String>,
    ) -> Self {
        Self {
            cause: cause.into(),
            adverb: adverb.into(),
            effect: effect.into(),
            source_tag: None,
        }
    }

    pub fn with_source(mut self, tag: impl Into<String>) -> Self {
        self.source_tag = Some(tag.into());
        self
    }
}

impl fmt::Display for RelationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {} | {}", self.cause, self.adverb, self.effect)?;
        if let Some(tag) = &self.source_tag {
            write!(f, " | {tag}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationFormat {
    Pipe,
    JsonLines,
}

impl RelationFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext)
                if ext.eq_ignore_ascii_case("jsonl") || ext.eq_ignore_ascii_case("ndjson") =>
            {
                RelationFormat::JsonLines
            }
            _ => RelationFormat::Pipe,
        }
    }
}

/// A problem with one input line. Line numbers start at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCorpus {
    pub records: Vec<RelationRecord>,
    /// Input line number of each record, parallel to `records`.
    pub lines: Vec<usize>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),

    #[error("corpus contains no valid relations ({} malformed line(s))", diagnostics.len())]
    EmptyCorpus { diagnostics: Vec<Diagnostic> },
}

pub fn parse_relations<R: BufRead>(
    reader: R,
    format: RelationFormat,
) -> Result<ParsedCorpus, IngestError> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    let mut diagnostics = Vec::new();

    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed = match format {
            RelationFormat::Pipe => parse_pipe_line(trimmed),
            RelationFormat::JsonLines => parse_json_line(trimmed),
        };
        match parsed {
            Ok(record) => {
                records.push(record);
                lines.push(number);
            }
            Err(message) => diagnostics.push(Diagnostic {
                line: number,
                message,
            }),
        }
    }

    if records.is_empty() {
        return Err(IngestError::EmptyCorpus { diagnostics });
    }
    Ok(ParsedCorpus {
        records,
        lines,
        diagnostics,
    })
}

pub fn parse_relations_str(
    text: &str,
    format: RelationFormat,
) -> Result<ParsedCorpus, IngestError> {
    parse_relations(text.as_bytes(), format)
}

/// Reads a corpus file, choosing the format from its extension.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<ParsedCorpus, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    parse_relations(
        std::io::BufReader::new(file),
        RelationFormat::from_path(path),
    )
}

fn parse_pipe_line(line: &str) -> Result<RelationRecord, String> {
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(format!(
            "expected `cause | adverb | effect [| source]`, found {} field(s)",
            fields.len()
        ));
    }
    for (name, value) in ["cause", "adverb", "effect"].iter().zip(&fields) {
        if value.is_empty() {
            return Err(format!("empty {name} field"));
        }
    }
    Ok(RelationRecord {
        cause: fields[0].to_string(),
        adverb: fields[1].to_string(),
        effect: fields[2].to_string(),
        source_tag: fields
            .get(3)
            .filter(|s| !s.is_empty())
            .map(|s| s.to_string()),
    })
}

fn parse_json_line(line: &str) -> Result<RelationRecord, String> {
    let mut record: RelationRecord =
        serde_json::from_str(line).map_err(|e| format!("invalid JSON record: {e}"))?;
    for field in [&mut record.cause, &mut record.adverb, &mut record.effect] {
        *field = field.trim().to_string();
    }
    if record.cause.is_empty() || record.adverb.is_empty() || record.effect.is_empty() {
        return Err("cause, adverb and effect must be non-empty".into());
    }
    Ok(record)
}

/// Renders records in the pipe format, one per line.
pub fn serialize_relations(records: &[RelationRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&record.to_string());
        out.push('\n');
    }
    out
}
