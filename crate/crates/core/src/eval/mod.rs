//! Metrics: class-balanced accuracy, F1, pairwise ranking accuracy, span
//! overlap against human highlights, Fleiss' kappa and timing summaries.

mod agreement;
mod spans;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::Example;
use crate::scoring::{ExternalPrediction, Scorer};
use crate::transforms::Label;

pub use agreement::{fleiss_kappa, timing_summary, AgreementReport, Condition, Kappa, TimingStats, TimingSummary};
pub use spans::{covered_tokens, mean, span_containment_accuracy, span_token_f1, SpanPair};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EvalError {
    #[error("{0} predictions for {1} gold labels")]
    LengthMismatch(usize, usize),
    #[error("no gold {0} examples")]
    MissingClass(Label),
    #[error("empty input")]
    Empty,
    #[error("span {span} outside text of length {len}")]
    OutOfBounds { span: crate::corpus::CharSpan, len: usize },
    #[error("kappa undefined: all ratings fall in one category but observed agreement differs")]
    Degenerate,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for EvalError {
    fn from(e: std::io::Error) -> Self {
        EvalError::Io(e.to_string())
    }
}

fn check_lengths(preds: &[Label], golds: &[Label]) -> Result<(), EvalError> {
    if preds.len() != golds.len() {
        return Err(EvalError::LengthMismatch(preds.len(), golds.len()));
    }
    if golds.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Counts keyed by (gold, predicted).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub consistent_as_consistent: usize,
    pub consistent_as_inconsistent: usize,
    pub inconsistent_as_consistent: usize,
    pub inconsistent_as_inconsistent: usize,
}

impl Confusion {
    pub fn new(preds: &[Label], golds: &[Label]) -> Self {
        let mut c = Confusion::default();
        for (p, g) in preds.iter().zip(golds) {
            match (g, p) {
                (Label::Consistent, Label::Consistent) => c.consistent_as_consistent += 1,
                (Label::Consistent, Label::Inconsistent) => c.consistent_as_inconsistent += 1,
                (Label::Inconsistent, Label::Consistent) => c.inconsistent_as_consistent += 1,
                (Label::Inconsistent, Label::Inconsistent) => c.inconsistent_as_inconsistent += 1,
            }
        }
        c
    }

    pub fn gold(&self, label: Label) -> usize {
        match label {
            Label::Consistent => self.consistent_as_consistent + self.consistent_as_inconsistent,
            Label::Inconsistent => self.inconsistent_as_consistent + self.inconsistent_as_inconsistent,
        }
    }

    pub fn predicted(&self, label: Label) -> usize {
        match label {
            Label::Consistent => self.consistent_as_consistent + self.inconsistent_as_consistent,
            Label::Inconsistent => self.consistent_as_inconsistent + self.inconsistent_as_inconsistent,
        }
    }

    pub fn correct(&self, label: Label) -> usize {
        match label {
            Label::Consistent => self.consistent_as_consistent,
            Label::Inconsistent => self.inconsistent_as_inconsistent,
        }
    }
}

/// Mean of the per-class recalls.
pub fn balanced_accuracy(preds: &[Label], golds: &[Label]) -> Result<f64, EvalError> {
    check_lengths(preds, golds)?;
    let c = Confusion::new(preds, golds);
    let mut sum = 0.0;
    for label in [Label::Consistent, Label::Inconsistent] {
        let n = c.gold(label);
        if n == 0 {
            return Err(EvalError::MissingClass(label));
        }
        sum += c.correct(label) as f64 / n as f64;
    }
    Ok(sum / 2.0)
}

/// F1 of `positive`; 0 when precision and recall are both 0 (or undefined).
pub fn binary_f1(preds: &[Label], golds: &[Label], positive: Label) -> Result<f64, EvalError> {
    check_lengths(preds, golds)?;
    let c = Confusion::new(preds, golds);
    let tp = c.correct(positive) as f64;
    let predicted = c.predicted(positive) as f64;
    let gold = c.gold(positive) as f64;
    let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
    let r = if gold > 0.0 { tp / gold } else { 0.0 };
    Ok(if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 })
}

/// One article sentence with a consistent and an inconsistent claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingItem {
    #[serde(rename = "article_sent")]
    pub article_sentence: String,
    #[serde(rename = "claim_pos")]
    pub claim_positive: String,
    #[serde(rename = "claim_neg")]
    pub claim_negative: String,
}

pub fn read_ranking_items(path: impl AsRef<Path>) -> Result<Vec<RankingItem>, EvalError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |message: String| EvalError::Parse { line: i + 1, message };
        let item: RankingItem = serde_json::from_str(&line).map_err(|e| parse(e.to_string()))?;
        if [&item.article_sentence, &item.claim_positive, &item.claim_negative]
            .iter()
            .any(|s| s.trim().is_empty())
        {
            return Err(parse("empty field".into()));
        }
        if item.claim_positive == item.claim_negative {
            return Err(parse("positive and negative claims are identical".into()));
        }
        out.push(item);
    }
    Ok(out)
}

/// Share of pairs where the positive claim outscores the negative one;
/// exact ties count one half.
pub fn ranking_accuracy_from_scores(pairs: &[(f64, f64)]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let credit: f64 = pairs
        .iter()
        .map(|(pos, neg)| {
            if pos > neg {
                1.0
            } else if pos == neg {
                0.5
            } else {
                0.0
            }
        })
        .sum();
    Ok(credit / pairs.len() as f64)
}

pub fn ranking_accuracy(scorer: &dyn Scorer, items: &[RankingItem]) -> Result<f64, EvalError> {
    let scores: Vec<(f64, f64)> = items
        .iter()
        .map(|it| {
            (
                scorer.score(&it.article_sentence, &it.claim_positive),
                scorer.score(&it.article_sentence, &it.claim_negative),
            )
        })
        .collect();
    ranking_accuracy_from_scores(&scores)
}

pub fn threshold_labels(scores: &[f64], threshold: f64) -> Vec<Label> {
    scores
        .iter()
        .map(|&s| if s >= threshold { Label::Consistent } else { Label::Inconsistent })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub balanced_accuracy: Option<f64>,
    pub f1: Option<f64>,
    pub f1_positive_class: Option<Label>,
    pub ranking_accuracy: Option<f64>,
    /// Predicted error spans against augmentation spans.
    pub span_containment_accuracy: Option<f64>,
    pub span_token_f1: Option<f64>,
    /// Predicted support spans against extraction spans.
    pub support_span_token_f1: Option<f64>,
    pub per_class: BTreeMap<String, usize>,
    pub confusion: Confusion,
    pub evaluated: usize,
    /// Dataset examples with no prediction.
    pub unmatched_examples: usize,
    /// Predictions whose id is not in the dataset.
    pub unknown_predictions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub threshold: f64,
    pub positive: Label,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: crate::scoring::DEFAULT_THRESHOLD,
            positive: Label::Inconsistent,
        }
    }
}

/// Classification metrics over scores aligned with `golds`. Metrics that
/// are undefined for the input (e.g. one gold class) are left empty.
pub fn score_report(scores: &[f64], golds: &[Label], options: EvalOptions) -> ScoreReport {
    let preds = threshold_labels(scores, options.threshold);
    let mut per_class = BTreeMap::new();
    for g in golds {
        *per_class.entry(g.as_str().to_string()).or_insert(0) += 1;
    }
    ScoreReport {
        balanced_accuracy: balanced_accuracy(&preds, golds).ok(),
        f1: binary_f1(&preds, golds, options.positive).ok(),
        f1_positive_class: Some(options.positive),
        per_class,
        confusion: Confusion::new(&preds, golds),
        evaluated: golds.len(),
        ..ScoreReport::default()
    }
}

/// Evaluate external predictions against a dataset, matching by id.
pub fn evaluate_predictions(
    examples: &[Example],
    predictions: &BTreeMap<String, ExternalPrediction>,
    options: EvalOptions,
) -> Result<ScoreReport, EvalError> {
    let mut scores = Vec::new();
    let mut golds = Vec::new();
    let mut error_pairs = Vec::new();
    let mut support_pairs = Vec::new();
    let mut unmatched = 0;
    for e in examples {
        let Some(p) = predictions.get(&e.id) else {
            unmatched += 1;
            continue;
        };
        scores.push(p.p_consistent);
        golds.push(e.label);
        if let (Some(model), Some(human)) = (p.error_span, e.augmentation_span) {
            error_pairs.push(SpanPair::new(&e.claim, model, vec![human]));
        }
        if let Some(model) = p.support_span {
            support_pairs.push(SpanPair::new(&e.text, model, vec![e.extraction_span]));
        }
    }
    let known: std::collections::HashSet<&str> = examples.iter().map(|e| e.id.as_str()).collect();
    let mut report = if golds.is_empty() {
        ScoreReport::default()
    } else {
        score_report(&scores, &golds, options)
    };
    if !error_pairs.is_empty() {
        report.span_containment_accuracy = Some(span_containment_accuracy(&error_pairs)?);
        report.span_token_f1 = Some(mean_token_f1(&error_pairs)?);
    }
    if !support_pairs.is_empty() {
        report.support_span_token_f1 = Some(mean_token_f1(&support_pairs)?);
    }
    report.unmatched_examples = unmatched;
    report.unknown_predictions = predictions.keys().filter(|id| !known.contains(id.as_str())).count();
    Ok(report)
}

pub fn mean_token_f1(pairs: &[SpanPair<'_>]) -> Result<f64, EvalError> {
    let f1s = pairs
        .iter()
        .map(|p| span_token_f1(p.model, &p.human, p.text))
        .collect::<Result<Vec<_>, _>>()?;
    mean(&f1s).ok_or(EvalError::Empty)
}

/// Score every example with `scorer` and report classification metrics.
pub fn evaluate_scorer(examples: &[Example], scorer: &dyn Scorer, options: EvalOptions) -> ScoreReport {
    use rayon::prelude::*;
    let scores: Vec<f64> = examples.par_iter().map(|e| scorer.score(&e.text, &e.claim)).collect();
    let golds: Vec<Label> = examples.iter().map(|e| e.label).collect();
    score_report(&scores, &golds, options)
}
