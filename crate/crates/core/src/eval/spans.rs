use std::collections::BTreeSet;

use super::EvalError;
use crate::corpus::{char_len, tokenize, CharSpan};

/// A model span and the human spans it is judged against, over one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanPair<'a> {
    pub text: &'a str,
    pub model: CharSpan,
    pub human: Vec<CharSpan>,
}

impl<'a> SpanPair<'a> {
    pub fn new(text: &'a str, model: CharSpan, human: Vec<CharSpan>) -> Self {
        SpanPair { text, model, human }
    }
}

fn check(span: CharSpan, len: usize) -> Result<(), EvalError> {
    if span.within(len) {
        Ok(())
    } else {
        Err(EvalError::OutOfBounds { span, len })
    }
}

/// Share of pairs whose model span lies entirely inside one of the human
/// spans (char level).
pub fn span_containment_accuracy(pairs: &[SpanPair<'_>]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut hits = 0usize;
    for p in pairs {
        let len = char_len(p.text);
        check(p.model, len)?;
        for h in &p.human {
            check(*h, len)?;
        }
        if p.human.iter().any(|h| h.contains(&p.model)) {
            hits += 1;
        }
    }
    Ok(hits as f64 / pairs.len() as f64)
}

/// Indices of the tokens of `text` that share at least one char with `span`.
pub fn covered_tokens(text: &str, span: CharSpan) -> BTreeSet<usize> {
    tokenize(text, 0)
        .iter()
        .enumerate()
        .filter(|(_, t)| t.span.overlaps(&span))
        .map(|(i, _)| i)
        .collect()
}

/// F1 between the token sets covered by the model span and by the union of
/// the human spans, with the human side as ground truth. Two empty sets
/// score 1, one empty set scores 0.
pub fn span_token_f1(model: CharSpan, human: &[CharSpan], text: &str) -> Result<f64, EvalError> {
    let len = char_len(text);
    check(model, len)?;
    for h in human {
        check(*h, len)?;
    }
    let tokens = tokenize(text, 0);
    let covered = |s: &CharSpan| -> BTreeSet<usize> {
        tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| t.span.overlaps(s))
            .map(|(i, _)| i)
            .collect()
    };
    let m = covered(&model);
    let h: BTreeSet<usize> = human.iter().flat_map(covered).collect();
    if m.is_empty() && h.is_empty() {
        return Ok(1.0);
    }
    let shared = m.intersection(&h).count() as f64;
    if shared == 0.0 {
        return Ok(0.0);
    }
    let p = shared / m.len() as f64;
    let r = shared / h.len() as f64;
    Ok(2.0 * p * r / (p + r))
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}
