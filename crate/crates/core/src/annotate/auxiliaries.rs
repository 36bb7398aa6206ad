use serde::{Deserialize, Serialize};

use crate::corpus::{CharSpan, Token};

pub const AUXILIARIES: &[&str] = &[
    "am", "is", "are", "was", "were", "has", "have", "had", "do", "does", "did", "will", "would",
    "can", "could", "shall", "should", "may", "might", "must",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxMention {
    pub span: CharSpan,
    pub surface: String,
    pub negated: bool,
    /// The attached `not` / `n't` token, present iff `negated`.
    pub negation_span: Option<CharSpan>,
    /// Index of the auxiliary in the token list it was found in.
    pub token_index: usize,
}

pub fn is_negation(t: &Token) -> bool {
    matches!(t.lower().replace('\u{2019}', "'").as_str(), "not" | "n't")
}

pub fn find_auxiliaries(tokens: &[Token]) -> Vec<AuxMention> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| AUXILIARIES.contains(&t.lower().as_str()))
        .map(|(i, t)| {
            let negation = tokens.get(i + 1).filter(|next| is_negation(next));
            AuxMention {
                span: t.span,
                surface: t.surface.clone(),
                negated: negation.is_some(),
                negation_span: negation.map(|n| n.span),
                token_index: i,
            }
        })
        .collect()
}
