//! Precomputed entity annotations stored as char offsets into unmodified
//! document text, one JSON object per document:
//!
//! ```json
//! {"doc_id":"a1","mentions":[{"start":0,"end":5,"group":"named","kind":"PERSON"}]}
//! ```
//!
//! `kind` is kept verbatim so files written by other taggers survive a
//! load/serialize round trip byte for byte; an optional `surface` field is
//! checked against the text when present.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::entities::{EntityGroup, EntityKind, EntityMention};
use super::AnnotateError;
use crate::corpus::{CharSpan, Document};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandoffMention {
    pub start: usize,
    pub end: usize,
    pub group: EntityGroup,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandoffRecord {
    pub doc_id: String,
    pub mentions: Vec<StandoffMention>,
}

#[derive(Debug, Clone, Default)]
pub struct StandoffStore {
    records: Vec<StandoffRecord>,
    by_doc: HashMap<String, usize>,
}

impl StandoffStore {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnnotateError> {
        Self::from_reader(File::open(path)?)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, AnnotateError> {
        let mut store = StandoffStore::default();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: StandoffRecord =
                serde_json::from_str(&line).map_err(|e| AnnotateError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            store.insert(record);
        }
        Ok(store)
    }

    pub fn insert(&mut self, record: StandoffRecord) {
        match self.by_doc.get(&record.doc_id) {
            Some(&idx) => self.records[idx] = record,
            None => {
                self.by_doc.insert(record.doc_id.clone(), self.records.len());
                self.records.push(record);
            }
        }
    }

    pub fn records(&self) -> &[StandoffRecord] {
        &self.records
    }

    pub fn write_to(&self, writer: impl Write) -> Result<(), AnnotateError> {
        let mut writer = BufWriter::new(writer);
        for record in &self.records {
            serde_json::to_writer(&mut writer, record).map_err(std::io::Error::from)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Mentions for `doc`, validated against its text. Documents absent from
    /// the store have no mentions.
    pub fn mentions_for(&self, doc: &Document) -> Result<Vec<EntityMention>, AnnotateError> {
        let Some(&idx) = self.by_doc.get(&doc.id) else {
            return Ok(Vec::new());
        };
        let len = doc.char_len();
        let mut out = Vec::new();
        for m in &self.records[idx].mentions {
            let mismatch = |reason: String| AnnotateError::AnnotationMismatch {
                doc_id: doc.id.clone(),
                start: m.start,
                end: m.end,
                reason,
            };
            let span = CharSpan::new(m.start, m.end)
                .ok()
                .filter(|s| s.end <= len)
                .ok_or_else(|| mismatch(format!("span outside text of {len} chars")))?;
            let text = doc.slice(span);
            if let Some(surface) = &m.surface {
                if surface != text {
                    return Err(mismatch(format!("surface {surface:?} but text has {text:?}")));
                }
            }
            if text.trim().is_empty() {
                return Err(mismatch("mention covers only whitespace".into()));
            }
            let kind = EntityKind::from_label(&m.kind);
            if !kind.compatible_with(m.group) {
                return Err(mismatch(format!("kind {} not allowed in group {:?}", m.kind, m.group)));
            }
            out.push(EntityMention {
                span,
                surface: text.to_string(),
                group: m.group,
                kind: Some(kind),
            });
        }
        out.sort_by_key(|m| m.span);
        Ok(out)
    }
}
