use serde::{Deserialize, Serialize};

use super::best_sentence;
use crate::annotate::{find_pronouns, is_negation, tag_builtin, EntityGroup};
use crate::corpus::{Document, Token};

pub const FEATURE_NAMES: [&str; 6] = [
    "coverage",
    "entity_match",
    "number_match",
    "negation_parity",
    "pronoun_present",
    "length_ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; 6]);

impl FeatureVector {
    pub fn coverage(&self) -> f64 {
        self.0[0]
    }
    pub fn entity_match(&self) -> f64 {
        self.0[1]
    }
    pub fn number_match(&self) -> f64 {
        self.0[2]
    }
    pub fn negation_parity(&self) -> f64 {
        self.0[3]
    }
    pub fn pronoun_present(&self) -> f64 {
        self.0[4]
    }
    pub fn length_ratio(&self) -> f64 {
        self.0[5]
    }
}

fn negations(tokens: &[Token]) -> usize {
    tokens.iter().filter(|t| is_negation(t)).count()
}

/// Features of `claim` against `doc`:
///
/// - coverage: share of claim tokens found in the best-matching sentence
/// - entity / number match: share of claim mentions whose surface occurs in
///   the document (1 when the claim has none)
/// - negation parity: 1 when claim and best sentence differ in the parity
///   of their `not` / `n't` counts
/// - pronoun present: 1 when the claim has a gendered pronoun
/// - length ratio: claim tokens over best-sentence tokens, capped at 4
pub fn featurize(doc: &Document, claim: &str) -> FeatureVector {
    let claim_doc = Document::new(doc.id.clone(), claim);
    let claim_tokens: Vec<Token> = claim_doc.tokens().cloned().collect();
    let best = best_sentence(doc, &claim_tokens);
    let coverage = best.map_or(0.0, |(_, c)| c);

    let doc_lower = doc.text.to_lowercase();
    let mentions = tag_builtin(&claim_doc, Some(doc));
    let match_rate = |group: EntityGroup| {
        let of_group: Vec<_> = mentions.iter().filter(|m| m.group == group).collect();
        if of_group.is_empty() {
            return 1.0;
        }
        let found = of_group
            .iter()
            .filter(|m| doc_lower.contains(&m.surface.to_lowercase()))
            .count();
        found as f64 / of_group.len() as f64
    };

    let (parity, ratio) = match best {
        Some((s, _)) => (
            ((negations(&claim_tokens) + negations(&s.tokens)) % 2) as f64,
            (claim_tokens.len() as f64 / s.tokens.len().max(1) as f64).min(4.0),
        ),
        None => ((negations(&claim_tokens) % 2) as f64, 0.0),
    };
    let pronoun = f64::from(u8::from(find_pronouns(&claim_tokens).iter().any(|p| p.gendered)));

    FeatureVector([
        coverage,
        match_rate(EntityGroup::Named),
        match_rate(EntityGroup::Number),
        parity,
        pronoun,
        ratio,
    ])
}
