//! Claim transformations.
//!
//! Meaning-preserving rewrites (identity, paraphrase) yield `CONSISTENT`
//! claims; meaning-altering ones (entity, number and pronoun swaps,
//! negation) yield `INCONSISTENT` claims together with the claim-local span
//! that was altered. Noise injection runs afterwards and never changes the
//! label.

mod negation;
mod noise;
mod swap;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::annotate::{
    tag_builtin, EntityMention, EntityProvider, AnnotateError, ParaphraseError, ParaphraseProvider,
    ParaphraseRequest, Pivot,
};
use crate::corpus::{tokenize, CharSpan, Document, Token};

pub use negation::{apply_negation, negate_at, normalize_negation};
pub use noise::{apply_noise, inject_noise, NoiseEdit, NoiseModel, MIN_TOKENS_AFTER_REMOVAL};
pub use swap::{apply_entity_swap, apply_pronoun_swap, SwapOptions};

/// Claims shorter than this are not transformed.
pub const MIN_TRANSFORM_TOKENS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Consistent,
    Inconsistent,
}

impl Label {
    pub fn flipped(self) -> Label {
        match self {
            Label::Consistent => Label::Inconsistent,
            Label::Inconsistent => Label::Consistent,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Consistent => "CONSISTENT",
            Label::Inconsistent => "INCONSISTENT",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "CONSISTENT" | "C" => Ok(Label::Consistent),
            "INCONSISTENT" | "I" => Ok(Label::Inconsistent),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// Semantically invariant (`Plus`) or variant (`Minus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TransformKind {
    Identity,
    Paraphrase,
    EntitySwap,
    NumberSwap,
    PronounSwap,
    Negation,
}

impl TransformKind {
    pub const ALL: [TransformKind; 6] = [
        TransformKind::Identity,
        TransformKind::Paraphrase,
        TransformKind::EntitySwap,
        TransformKind::NumberSwap,
        TransformKind::PronounSwap,
        TransformKind::Negation,
    ];

    pub fn polarity(self) -> Polarity {
        match self {
            TransformKind::Identity | TransformKind::Paraphrase => Polarity::Plus,
            _ => Polarity::Minus,
        }
    }

    pub fn label(self) -> Label {
        match self.polarity() {
            Polarity::Plus => Label::Consistent,
            Polarity::Minus => Label::Inconsistent,
        }
    }

    /// Transforms that replace exactly one contiguous region of the claim.
    pub fn is_single_edit(self) -> bool {
        matches!(
            self,
            TransformKind::EntitySwap | TransformKind::NumberSwap | TransformKind::PronounSwap
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TransformKind::Identity => "IDENTITY",
            TransformKind::Paraphrase => "PARAPHRASE",
            TransformKind::EntitySwap => "ENTITY_SWAP",
            TransformKind::NumberSwap => "NUMBER_SWAP",
            TransformKind::PronounSwap => "PRONOUN_SWAP",
            TransformKind::Negation => "NEGATION",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        TransformKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| format!("unknown transform {s:?}"))
    }
}

/// A single sentence checked against a whole source document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub text: String,
    /// Claim-local spans.
    pub tokens: Vec<Token>,
    pub doc_id: String,
    /// Document coordinates of the sentence this claim was sampled from.
    pub origin_span: CharSpan,
}

impl Claim {
    pub fn new(text: impl Into<String>, doc_id: impl Into<String>, origin_span: CharSpan) -> Self {
        let text = text.into();
        let tokens = tokenize(&text, 0);
        Claim {
            text,
            tokens,
            doc_id: doc_id.into(),
            origin_span,
        }
    }

    pub fn from_sentence(doc: &Document, idx: usize) -> Self {
        let span = doc.sentences[idx].span;
        Claim::new(doc.slice(span), doc.id.clone(), span)
    }

    /// Same provenance, new text.
    pub fn with_text(&self, text: impl Into<String>) -> Self {
        Claim::new(text, self.doc_id.clone(), self.origin_span)
    }
}

/// A document together with its entity mentions.
#[derive(Debug, Clone)]
pub struct TaggedDocument {
    pub document: Document,
    pub entities: Vec<EntityMention>,
}

impl TaggedDocument {
    pub fn new(document: Document, provider: &EntityProvider) -> Result<Self, AnnotateError> {
        let entities = provider.tag(&document)?;
        Ok(TaggedDocument { document, entities })
    }

    pub fn builtin(document: Document) -> Self {
        let entities = tag_builtin(&document, None);
        TaggedDocument { document, entities }
    }

    /// Mentions inside `claim`, in claim coordinates. Claims that still read
    /// as their origin sentence reuse the document's mentions; rewritten
    /// claims are tagged afresh with the document as casing context.
    pub fn claim_mentions(&self, claim: &Claim) -> Vec<EntityMention> {
        let origin = claim.origin_span;
        let unchanged = origin.end <= self.document.char_len()
            && self.document.slice(origin) == claim.text;
        if unchanged {
            self.entities
                .iter()
                .filter(|m| origin.contains(&m.span))
                .map(|m| EntityMention {
                    span: m.span.shifted(-(origin.start as isize)),
                    ..m.clone()
                })
                .collect()
        } else {
            let standalone = Document::new(claim.doc_id.clone(), claim.text.clone());
            tag_builtin(&standalone, Some(&self.document))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SkipReason {
    NoCandidate,
    ProviderUnavailable,
    TooShort,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transformed {
    pub kind: TransformKind,
    pub claim: Claim,
    pub label: Label,
    /// Claim-local region altered by the transform.
    pub augmentation_span: Option<CharSpan>,
    /// Indices of pre-noise claim tokens that were duplicated or removed.
    pub noise_positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformOutcome {
    Transformed(Transformed),
    Skipped(SkipReason),
}

impl TransformOutcome {
    pub fn transformed(self) -> Option<Transformed> {
        match self {
            TransformOutcome::Transformed(t) => Some(t),
            TransformOutcome::Skipped(_) => None,
        }
    }

    pub fn skip_reason(&self) -> Option<SkipReason> {
        match self {
            TransformOutcome::Skipped(r) => Some(*r),
            TransformOutcome::Transformed(_) => None,
        }
    }

    pub(crate) fn edited(kind: TransformKind, claim: Claim, augmentation_span: Option<CharSpan>) -> Self {
        TransformOutcome::Transformed(Transformed {
            kind,
            claim,
            label: kind.label(),
            augmentation_span,
            noise_positions: Vec::new(),
        })
    }
}

pub fn apply_identity(claim: &Claim) -> TransformOutcome {
    TransformOutcome::edited(TransformKind::Identity, claim.clone(), None)
}

/// Backtranslate the claim through a pivot drawn uniformly from `pivots`
/// (all five when empty).
///
/// Unavailable providers, exhausted retries and table misses skip the
/// claim; cache corruption and I/O failures are returned as errors.
pub fn apply_paraphrase<R: Rng + ?Sized>(
    claim: &Claim,
    provider: &ParaphraseProvider,
    pivots: &[Pivot],
    rng: &mut R,
) -> Result<TransformOutcome, ParaphraseError> {
    if claim.tokens.len() < MIN_TRANSFORM_TOKENS {
        return Ok(TransformOutcome::Skipped(SkipReason::TooShort));
    }
    let pivots = if pivots.is_empty() { &Pivot::ALL[..] } else { pivots };
    let pivot = pivots[rng.gen_range(0..pivots.len())];
    let request = ParaphraseRequest {
        text: claim.text.clone(),
        pivot,
    };
    match provider.paraphrase(&request) {
        Ok(result) => {
            let text = result.text.trim();
            if text.is_empty() {
                return Ok(TransformOutcome::Skipped(SkipReason::NoCandidate));
            }
            Ok(TransformOutcome::edited(TransformKind::Paraphrase, claim.with_text(text), None))
        }
        Err(ParaphraseError::ProviderUnavailable | ParaphraseError::Transport { .. }) => {
            Ok(TransformOutcome::Skipped(SkipReason::ProviderUnavailable))
        }
        Err(ParaphraseError::NotFound { .. }) => Ok(TransformOutcome::Skipped(SkipReason::NoCandidate)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::paraphrase::TableEntry;
    use crate::annotate::ParaphraseTable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn claim(text: &str) -> Claim {
        Claim::new(text, "d", CharSpan::new(0, text.chars().count()).unwrap())
    }

    #[test]
    fn polarity_partition() {
        for kind in TransformKind::ALL {
            let plus = matches!(kind, TransformKind::Identity | TransformKind::Paraphrase);
            assert_eq!(kind.label() == Label::Consistent, plus);
            assert_eq!(kind.as_str().parse::<TransformKind>().unwrap(), kind);
        }
    }

    #[test]
    fn identity_is_idempotent() {
        let c = claim("A b c.");
        let once = apply_identity(&c).transformed().unwrap();
        assert_eq!(once.claim, c);
        assert_eq!(once.label, Label::Consistent);
        assert_eq!(once.augmentation_span, None);
        let twice = apply_identity(&once.claim).transformed().unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn paraphrase_table_and_unavailable() {
        let mut table = ParaphraseTable::default();
        for pivot in Pivot::ALL {
            table.insert(TableEntry {
                text: "A man walks home.".into(),
                pivot,
                paraphrase: "A man is walking home.".into(),
            });
        }
        let provider = ParaphraseProvider::OfflineTable(table);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = apply_paraphrase(&claim("A man walks home."), &provider, &[], &mut rng)
            .unwrap()
            .transformed()
            .unwrap();
        assert_eq!(out.claim.text, "A man is walking home.");
        assert_eq!(out.label, Label::Consistent);
        assert_eq!(out.augmentation_span, None);

        let skipped = apply_paraphrase(&claim("A man walks home."), &ParaphraseProvider::Unavailable, &[], &mut rng).unwrap();
        assert_eq!(skipped, TransformOutcome::Skipped(SkipReason::ProviderUnavailable));
    }

    #[test]
    fn claim_mentions_shift_into_claim_coordinates() {
        let doc = TaggedDocument::builtin(Document::new("d", "It rained. Alice visited Paris."));
        let c = Claim::from_sentence(&doc.document, 1);
        let mentions = doc.claim_mentions(&c);
        let surfaces: Vec<_> = mentions.iter().map(|m| &c.text[m.span.start..m.span.end]).collect();
        assert_eq!(surfaces, vec!["Alice", "Paris"]);
    }
}
