use std::collections::HashSet;

use rand::Rng;

use super::{Claim, SkipReason, TaggedDocument, TransformKind, TransformOutcome, MIN_TRANSFORM_TOKENS};
use crate::annotate::{find_pronouns, match_case, swap_candidates, EntityGroup, EntityMention};
use crate::corpus::{diff_region, splice};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SwapOptions {
    /// Also require matching entity kinds (person for person, ...), not
    /// just the same named/number group.
    pub match_kind: bool,
}

fn kinds_match(a: &EntityMention, b: &EntityMention) -> bool {
    match (a.kind, b.kind) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

/// Replace one claim mention of `group` with a distinct document mention of
/// the same group.
///
/// Claim mentions are drawn uniformly among those that have at least one
/// usable replacement; the replacement is drawn uniformly among the
/// document's distinct surfaces (case-insensitive) other than the mention's
/// own. The augmentation span is the minimal altered region of the claim.
pub fn apply_entity_swap<R: Rng + ?Sized>(
    claim: &Claim,
    document: &TaggedDocument,
    group: EntityGroup,
    options: SwapOptions,
    rng: &mut R,
) -> TransformOutcome {
    if claim.tokens.len() < MIN_TRANSFORM_TOKENS {
        return TransformOutcome::Skipped(SkipReason::TooShort);
    }
    let kind = match group {
        EntityGroup::Named => TransformKind::EntitySwap,
        EntityGroup::Number => TransformKind::NumberSwap,
    };

    let mut seen = HashSet::new();
    let pool: Vec<&EntityMention> = document
        .entities
        .iter()
        .filter(|m| m.group == group && seen.insert(m.surface.to_lowercase()))
        .collect();

    let options_for = |mention: &EntityMention| -> Vec<(String, crate::corpus::CharSpan)> {
        let own = mention.surface.to_lowercase();
        pool.iter()
            .filter(|cand| cand.surface.to_lowercase() != own)
            .filter(|cand| !options.match_kind || kinds_match(mention, cand))
            .filter_map(|cand| {
                let text = splice(&claim.text, mention.span, &cand.surface);
                diff_region(&claim.text, &text).map(|span| (text, span))
            })
            .collect()
    };

    let candidates: Vec<Vec<(String, crate::corpus::CharSpan)>> = document
        .claim_mentions(claim)
        .iter()
        .filter(|m| m.group == group)
        .map(options_for)
        .filter(|opts| !opts.is_empty())
        .collect();
    if candidates.is_empty() {
        return TransformOutcome::Skipped(SkipReason::NoCandidate);
    }
    let opts = &candidates[rng.gen_range(0..candidates.len())];
    let (text, span) = opts[rng.gen_range(0..opts.len())].clone();
    TransformOutcome::edited(kind, claim.with_text(text), Some(span))
}

/// Swap one gendered pronoun for its same-group counterpart, keeping the
/// original capitalization.
pub fn apply_pronoun_swap<R: Rng + ?Sized>(claim: &Claim, rng: &mut R) -> TransformOutcome {
    if claim.tokens.len() < MIN_TRANSFORM_TOKENS {
        return TransformOutcome::Skipped(SkipReason::TooShort);
    }
    let mentions = find_pronouns(&claim.tokens);
    if mentions.is_empty() {
        return TransformOutcome::Skipped(SkipReason::NoCandidate);
    }
    let chosen = &mentions[rng.gen_range(0..mentions.len())];
    let alternatives = swap_candidates(&chosen.surface, chosen.group);
    let replacement = match_case(&chosen.surface, alternatives[rng.gen_range(0..alternatives.len())]);
    let text = splice(&claim.text, chosen.span, &replacement);
    match diff_region(&claim.text, &text) {
        Some(span) => TransformOutcome::edited(TransformKind::PronounSwap, claim.with_text(text), Some(span)),
        None => TransformOutcome::Skipped(SkipReason::NoCandidate),
    }
}
