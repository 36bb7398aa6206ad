use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Half-open range of Unicode scalar values, `[start, end)`.
///
/// Serialized as a two-element array `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid span [{start}, {end}): start must be < end")]
pub struct InvalidSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> Result<Self, InvalidSpan> {
        if start < end {
            Ok(CharSpan { start, end })
        } else {
            Err(InvalidSpan { start, end })
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// `other` lies entirely inside `self`.
    pub fn contains(&self, other: &CharSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn within(&self, len: usize) -> bool {
        self.start < self.end && self.end <= len
    }

    pub fn shifted(&self, delta: isize) -> CharSpan {
        CharSpan {
            start: (self.start as isize + delta) as usize,
            end: (self.end as isize + delta) as usize,
        }
    }
}

impl fmt::Display for CharSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

impl Serialize for CharSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.start, self.end].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CharSpan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [start, end] = <[usize; 2]>::deserialize(deserializer)?;
        CharSpan::new(start, end).map_err(D::Error::custom)
    }
}

/// Char-offset view over a UTF-8 string.
///
/// Offsets everywhere in this crate count Unicode scalar values, so slicing
/// needs the byte position of each char boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharIndex {
    bytes: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { bytes }
    }

    /// Number of chars in the indexed text.
    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn byte(&self, char_offset: usize) -> usize {
        self.bytes[char_offset]
    }

    pub fn slice<'a>(&self, text: &'a str, span: CharSpan) -> &'a str {
        &text[self.bytes[span.start]..self.bytes[span.end]]
    }
}

pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// Slice `text` by char offsets. Panics when the span is out of bounds.
pub fn char_slice(text: &str, span: CharSpan) -> &str {
    let start = byte_offset(text, span.start);
    let end = start + byte_offset(&text[start..], span.end - span.start);
    &text[start..end]
}

fn byte_offset(text: &str, chars: usize) -> usize {
    if chars == 0 {
        return 0;
    }
    match text.char_indices().nth(chars) {
        Some((b, _)) => b,
        None if char_len(text) == chars => text.len(),
        None => panic!("char offset {chars} beyond text of {} chars", char_len(text)),
    }
}

/// Replace the chars in `span` with `replacement`.
pub fn splice(text: &str, span: CharSpan, replacement: &str) -> String {
    splice_range(text, span.start, span.end, replacement)
}

/// Like [`splice`] but accepts an empty range (pure insertion).
pub fn splice_range(text: &str, start: usize, end: usize, replacement: &str) -> String {
    let b_start = byte_offset(text, start);
    let b_end = b_start + byte_offset(&text[b_start..], end - start);
    let mut out = String::with_capacity(text.len() + replacement.len());
    out.push_str(&text[..b_start]);
    out.push_str(replacement);
    out.push_str(&text[b_end..]);
    out
}

/// Minimal region of `new` that differs from `old`.
///
/// The common prefix is taken greedily first, then the longest common suffix
/// that does not overlap it. Returns `None` when the strings are equal or
/// `new` differs only by a deletion (the region in `new` would be empty).
pub fn diff_region(old: &str, new: &str) -> Option<CharSpan> {
    let old: Vec<char> = old.chars().collect();
    let new: Vec<char> = new.chars().collect();
    let prefix = old.iter().zip(&new).take_while(|(a, b)| a == b).count();
    let max_suffix = old.len().min(new.len()) - prefix;
    let suffix = old
        .iter()
        .rev()
        .zip(new.iter().rev())
        .take(max_suffix)
        .take_while(|(a, b)| a == b)
        .count();
    CharSpan::new(prefix, new.len() - suffix).ok()
}
