//! Linguistic annotators: entities and numbers, gendered pronouns,
//! auxiliary verbs, plus the backtranslation paraphrase providers.

mod auxiliaries;
mod entities;
pub mod paraphrase;
mod pronouns;
mod standoff;

pub use auxiliaries::{find_auxiliaries, is_negation, AuxMention, AUXILIARIES};
pub use entities::{tag_builtin, EntityGroup, EntityKind, EntityMention};
pub use paraphrase::{
    ParaphraseError, ParaphraseProvider, ParaphraseRequest, ParaphraseResult, ParaphraseTable, Pivot,
    ProviderConfig,
};
pub use pronouns::{find_pronouns, match_case, swap_candidates, PronounGroup, PronounMention, PRONOUN_TABLE};
pub use standoff::{StandoffMention, StandoffRecord, StandoffStore};

use crate::corpus::Document;

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("annotation mismatch in {doc_id} at [{start}, {end}): {reason}")]
    AnnotationMismatch {
        doc_id: String,
        start: usize,
        end: usize,
        reason: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where entity mentions come from.
#[derive(Debug, Clone, Default)]
pub enum EntityProvider {
    #[default]
    Builtin,
    Standoff(StandoffStore),
}

impl EntityProvider {
    /// Mentions over the whole of `doc`, sorted by position.
    pub fn tag(&self, doc: &Document) -> Result<Vec<EntityMention>, AnnotateError> {
        match self {
            EntityProvider::Builtin => Ok(tag_builtin(doc, None)),
            EntityProvider::Standoff(store) => store.mentions_for(doc),
        }
    }
}
