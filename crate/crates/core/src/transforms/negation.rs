use rand::Rng;

use super::{Claim, SkipReason, TransformKind, TransformOutcome, MIN_TRANSFORM_TOKENS};
use crate::annotate::{find_auxiliaries, is_negation, AuxMention};
use crate::corpus::{splice_range, tokenize, CharSpan};

/// Flip the polarity of one auxiliary verb drawn uniformly from the claim.
pub fn apply_negation<R: Rng + ?Sized>(claim: &Claim, rng: &mut R) -> TransformOutcome {
    if claim.tokens.len() < MIN_TRANSFORM_TOKENS {
        return TransformOutcome::Skipped(SkipReason::TooShort);
    }
    let usable: Vec<usize> = find_auxiliaries(&claim.tokens)
        .iter()
        .enumerate()
        .filter(|(_, a)| negatable(a, claim))
        .map(|(i, _)| i)
        .collect();
    if usable.is_empty() {
        return TransformOutcome::Skipped(SkipReason::NoCandidate);
    }
    negate_at(claim, usable[rng.gen_range(0..usable.len())])
}

/// Stacked negations ("didn't not") are left alone: removing one would
/// leave the auxiliary still negated.
fn negatable(aux: &AuxMention, claim: &Claim) -> bool {
    !(aux.negated && claim.tokens.get(aux.token_index + 2).is_some_and(is_negation))
}

/// Negate the `aux_index`-th auxiliary of the claim. Auxiliaries with
/// stacked negations are skipped.
///
/// A bare auxiliary gets ` not` inserted after it (the span covers `not`).
/// A negated one loses its `not` or `n't` (the span covers the auxiliary).
/// Negating the same auxiliary twice restores the original text, except
/// that a removed `n't` comes back as ` not`.
pub fn negate_at(claim: &Claim, aux_index: usize) -> TransformOutcome {
    let auxes = find_auxiliaries(&claim.tokens);
    let Some(aux) = auxes.get(aux_index).filter(|a| negatable(a, claim)) else {
        return TransformOutcome::Skipped(SkipReason::NoCandidate);
    };
    let (text, span) = match aux.negation_span {
        None => {
            let at = aux.span.end;
            let text = splice_range(&claim.text, at, at, " not");
            (text, CharSpan { start: at + 1, end: at + 4 })
        }
        Some(neg) => {
            let text = if neg.start == aux.span.end {
                splice_range(&claim.text, neg.start, neg.end, "")
            } else {
                splice_range(&claim.text, aux.span.end, neg.end, "")
            };
            (text, aux.span)
        }
    };
    TransformOutcome::edited(TransformKind::Negation, claim.with_text(text), Some(span))
}

/// Token sequence with every `n't` spelled `not`, joined by single spaces.
/// Texts that differ only in contraction and spacing normalize equal.
pub fn normalize_negation(text: &str) -> String {
    tokenize(text, 0)
        .iter()
        .map(|t| if is_negation(t) { "not" } else { t.surface.as_str() })
        .collect::<Vec<_>>()
        .join(" ")
}
