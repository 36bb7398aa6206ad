use rand::Rng;

use super::Transformed;
use crate::corpus::{CharSpan, Token};

/// Removals stop once the claim is down to this many tokens.
pub const MIN_TOKENS_AFTER_REMOVAL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseEdit {
    Keep,
    Duplicate,
    Remove,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Per-token probability that noise fires.
    pub p: f64,
    /// Probability that a fired decision duplicates rather than removes.
    pub duplicate_prob: f64,
}

impl NoiseModel {
    pub fn new(p: f64) -> Self {
        NoiseModel { p, duplicate_prob: 0.5 }
    }

    /// One decision per token. Protected tokens always stay as they are,
    /// though their draws are still made so the stream does not depend on
    /// which tokens are protected.
    pub fn plan<R: Rng + ?Sized>(&self, protected: &[bool], rng: &mut R) -> Vec<NoiseEdit> {
        let p = self.p.clamp(0.0, 1.0);
        let dup = self.duplicate_prob.clamp(0.0, 1.0);
        let mut count = protected.len();
        protected
            .iter()
            .map(|&locked| {
                if !rng.gen_bool(p) {
                    return NoiseEdit::Keep;
                }
                let duplicate = rng.gen_bool(dup);
                if locked {
                    NoiseEdit::Keep
                } else if duplicate {
                    count += 1;
                    NoiseEdit::Duplicate
                } else if count > MIN_TOKENS_AFTER_REMOVAL {
                    count -= 1;
                    NoiseEdit::Remove
                } else {
                    NoiseEdit::Keep
                }
            })
            .collect()
    }
}

fn positions(edits: &[NoiseEdit]) -> Vec<usize> {
    edits
        .iter()
        .enumerate()
        .filter(|(_, e)| **e != NoiseEdit::Keep)
        .map(|(i, _)| i)
        .collect()
}

/// Token-level noise: returns the edited surfaces and the indices of input
/// tokens that were duplicated or removed.
pub fn apply_noise<R: Rng + ?Sized>(tokens: &[Token], p: f64, rng: &mut R) -> (Vec<String>, Vec<usize>) {
    let edits = NoiseModel::new(p).plan(&vec![false; tokens.len()], rng);
    let mut out = Vec::with_capacity(tokens.len());
    for (t, e) in tokens.iter().zip(&edits) {
        match e {
            NoiseEdit::Keep => out.push(t.surface.clone()),
            NoiseEdit::Duplicate => {
                out.push(t.surface.clone());
                out.push(t.surface.clone());
            }
            NoiseEdit::Remove => {}
        }
    }
    (out, positions(&edits))
}

/// Add noise to a transformed claim, keeping its augmentation span intact
/// and re-offset into the noisy text.
///
/// Tokens touching the augmentation span, or the whitespace on either side
/// of them, are never edited.
pub fn inject_noise<R: Rng + ?Sized>(t: Transformed, model: &NoiseModel, rng: &mut R) -> Transformed {
    let chars: Vec<char> = t.claim.text.chars().collect();
    let tokens = &t.claim.tokens;
    if tokens.is_empty() {
        return t;
    }
    let reach = |i: usize| CharSpan {
        start: if i == 0 { 0 } else { tokens[i - 1].span.end },
        end: tokens.get(i + 1).map_or(chars.len(), |n| n.span.start),
    };
    let protected: Vec<bool> = (0..tokens.len())
        .map(|i| t.augmentation_span.is_some_and(|a| a.overlaps(&reach(i))))
        .collect();
    let edits = model.plan(&protected, rng);
    if edits.iter().all(|e| *e == NoiseEdit::Keep) {
        return t;
    }

    let (text, map) = render(&chars, tokens, &edits);

    let augmentation_span = t.augmentation_span.map(|a| {
        let start = map[a.start].expect("augmentation span kept");
        let end = map[a.end - 1].expect("augmentation span kept") + 1;
        debug_assert_eq!(end - start, a.len());
        CharSpan { start, end }
    });
    Transformed {
        claim: t.claim.with_text(text),
        augmentation_span,
        noise_positions: positions(&edits),
        ..t
    }
}

/// Rebuild text from edited tokens. Returns the text and, for each input
/// char, its position in the output when it was carried over in place.
fn render(chars: &[char], tokens: &[Token], edits: &[NoiseEdit]) -> (String, Vec<Option<usize>>) {
    let mut text = String::with_capacity(chars.len() + 16);
    let mut len = 0usize;
    let mut map: Vec<Option<usize>> = vec![None; chars.len()];
    let mut pending_gap: Option<CharSpan> = None;
    let mut emitted = false;
    for (i, (tok, edit)) in tokens.iter().zip(edits).enumerate() {
        let gap = CharSpan {
            start: if i == 0 { tok.span.start } else { tokens[i - 1].span.end },
            end: tok.span.start,
        };
        // a run of removed tokens leaves behind its first real separator
        if pending_gap.is_none_or(|g| g.start == g.end) {
            pending_gap = Some(gap);
        }
        if *edit == NoiseEdit::Remove {
            continue;
        }
        if emitted {
            let sep = pending_gap.filter(|g| g.start < g.end).unwrap_or(gap);
            for c in sep.start..sep.end {
                if sep == gap {
                    map[c] = Some(len);
                }
                text.push(chars[c]);
                len += 1;
            }
        }
        pending_gap = None;
        for c in tok.span.start..tok.span.end {
            map[c] = Some(len);
            text.push(chars[c]);
            len += 1;
        }
        if *edit == NoiseEdit::Duplicate {
            text.push(' ');
            text.push_str(&tok.surface);
            len += 1 + tok.surface.chars().count();
        }
        emitted = true;
    }

    (text, map)
}
