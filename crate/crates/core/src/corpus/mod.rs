//! Document ingestion: sentence segmentation, tokenization and char-span
//! bookkeeping.
//!
//! All offsets are counted in Unicode scalar values (chars), never bytes.

mod abbrev;
mod segment;
mod span;
mod tokenize;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use abbrev::{is_abbreviation, is_title, ABBREVIATIONS, ABBREVIATIONS_VERSION};
pub use segment::segment_sentences;
pub use span::{char_len, char_slice, diff_region, splice, splice_range, CharIndex, CharSpan, InvalidSpan};
pub use tokenize::{tokenize, Token};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("span {span} outside sentence {sentence}")]
    OutOfRange { span: CharSpan, sentence: CharSpan },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub span: CharSpan,
    pub tokens: Vec<Token>,
}

/// A segmented, tokenized source text. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
    index: CharIndex,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let index = CharIndex::new(&text);
        let sentences = segment_sentences(&text)
            .into_iter()
            .map(|span| Sentence {
                span,
                tokens: tokenize(index.slice(&text, span), span.start),
            })
            .collect();
        Document {
            id: id.into(),
            text,
            sentences,
            index,
        }
    }

    pub fn char_len(&self) -> usize {
        self.index.len()
    }

    pub fn slice(&self, span: CharSpan) -> &str {
        self.index.slice(&self.text, span)
    }

    pub fn sentence_text(&self, idx: usize) -> &str {
        self.slice(self.sentences[idx].span)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Index of the sentence whose span equals `span`.
    pub fn sentence_at(&self, span: CharSpan) -> Option<usize> {
        self.sentences.iter().position(|s| s.span == span)
    }
}

/// Minimal contiguous token range of `sentence` overlapping `span`.
///
/// A span covering only whitespace yields an empty range positioned at the
/// next token.
pub fn locate(span: CharSpan, sentence: &Sentence) -> Result<Range<usize>, CorpusError> {
    if !sentence.span.contains(&span) {
        return Err(CorpusError::OutOfRange {
            span,
            sentence: sentence.span,
        });
    }
    let tokens = &sentence.tokens;
    let first = tokens.partition_point(|t| t.span.end <= span.start);
    let last = tokens.partition_point(|t| t.span.start < span.end);
    Ok(first..last.max(first))
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_sentences: Option<Vec<String>>,
}

impl CorpusRecord {
    pub fn document(&self) -> Document {
        Document::new(self.id.clone(), self.text.clone())
    }
}

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusRecord>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}
