//! Consistency scorers: a token-overlap reference, trivial baselines, a
//! small trainable logistic model over hand-built features, and an adapter
//! for predictions produced by external models.

mod baseline;
mod external;
mod features;

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, CharSpan, Document, Sentence, Token};
use crate::util::stable_hash;

pub use baseline::{featurize_examples, fit, train_baseline, BaselineModel, BaselineScorer, TrainConfig};
pub use external::{load_external_predictions, ExternalPrediction};
pub use features::{featurize, FeatureVector, FEATURE_NAMES};

/// Scores at or above this are read as `CONSISTENT`.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("training data has a single class")]
    SingleClass,
    #[error("unknown scorer {0:?} (expected overlap, constant[:p], random[:seed] or baseline)")]
    UnknownScorer(String),
    #[error("scorer {0} needs a model file")]
    MissingModel(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Claim-local error span and document-level support span.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanPrediction {
    pub support: Option<CharSpan>,
    pub error: Option<CharSpan>,
}

pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    /// Probability that `claim` is consistent with `document`, in [0, 1].
    fn score(&self, document: &str, claim: &str) -> f64;

    fn spans(&self, _document: &str, _claim: &str) -> Option<SpanPrediction> {
        None
    }
}

fn token_set(tokens: &[Token]) -> HashSet<String> {
    tokens.iter().map(Token::lower).collect()
}

/// Fraction of claim tokens (lowercased) that occur in `sentence`.
pub(crate) fn coverage(claim: &[Token], sentence: &[Token]) -> f64 {
    if claim.is_empty() {
        return 0.0;
    }
    let set = token_set(sentence);
    claim.iter().filter(|t| set.contains(&t.lower())).count() as f64 / claim.len() as f64
}

/// Sentence with the highest coverage of the claim (first on ties).
pub(crate) fn best_sentence<'d>(doc: &'d Document, claim: &[Token]) -> Option<(&'d Sentence, f64)> {
    let mut best: Option<(&Sentence, f64)> = None;
    for s in &doc.sentences {
        let c = coverage(claim, &s.tokens);
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((s, c));
        }
    }
    best
}

/// Maximum over document sentences of the fraction of claim tokens the
/// sentence contains.
pub fn overlap_score(document: &str, claim: &str) -> f64 {
    let doc = Document::new("", document);
    let claim_tokens = tokenize(claim, 0);
    best_sentence(&doc, &claim_tokens).map_or(0.0, |(_, c)| c)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OverlapScorer;

impl Scorer for OverlapScorer {
    fn name(&self) -> &str {
        "overlap"
    }

    fn score(&self, document: &str, claim: &str) -> f64 {
        overlap_score(document, claim)
    }

    /// Support: best-matching sentence. Error: first claim token missing
    /// from it.
    fn spans(&self, document: &str, claim: &str) -> Option<SpanPrediction> {
        let doc = Document::new("", document);
        let claim_tokens = tokenize(claim, 0);
        let (sentence, _) = best_sentence(&doc, &claim_tokens)?;
        let set = token_set(&sentence.tokens);
        let error = claim_tokens.iter().find(|t| !set.contains(&t.lower())).map(|t| t.span);
        Some(SpanPrediction {
            support: Some(sentence.span),
            error,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantScorer(pub f64);

impl Scorer for ConstantScorer {
    fn name(&self) -> &str {
        "constant"
    }

    fn score(&self, _document: &str, _claim: &str) -> f64 {
        self.0
    }
}

/// Uniform pseudo-random scores, a pure function of (seed, document, claim).
#[derive(Debug, Clone, Copy)]
pub struct RandomScorer {
    pub seed: u64,
}

impl Scorer for RandomScorer {
    fn name(&self) -> &str {
        "random"
    }

    fn score(&self, document: &str, claim: &str) -> f64 {
        let h = stable_hash(&[&self.seed.to_le_bytes(), document.as_bytes(), claim.as_bytes()]);
        (h >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Fixed scores for known (document, claim) pairs, `default` elsewhere.
#[derive(Debug, Clone, Default)]
pub struct LookupScorer {
    table: HashMap<(String, String), f64>,
    pub default: f64,
}

impl LookupScorer {
    pub fn new(default: f64) -> Self {
        LookupScorer {
            table: HashMap::new(),
            default,
        }
    }

    pub fn insert(&mut self, document: impl Into<String>, claim: impl Into<String>, score: f64) {
        self.table.insert((document.into(), claim.into()), score);
    }
}

impl Scorer for LookupScorer {
    fn name(&self) -> &str {
        "lookup"
    }

    fn score(&self, document: &str, claim: &str) -> f64 {
        self.table
            .get(&(document.to_string(), claim.to_string()))
            .copied()
            .unwrap_or(self.default)
    }
}

/// Build a scorer from a command-line name: `overlap`, `constant[:p]`,
/// `random[:seed]` or `baseline` (which needs `model`).
pub fn scorer_by_name(name: &str, model: Option<&Path>) -> Result<Box<dyn Scorer>, ScoringError> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let unknown = || ScoringError::UnknownScorer(name.to_string());
    match head {
        "overlap" if arg.is_none() => Ok(Box::new(OverlapScorer)),
        "constant" => {
            let p = arg.map_or(Ok(0.5), str::parse::<f64>).map_err(|_| unknown())?;
            if !(0.0..=1.0).contains(&p) {
                return Err(unknown());
            }
            Ok(Box::new(ConstantScorer(p)))
        }
        "random" => {
            let seed = arg.map_or(Ok(0), str::parse::<u64>).map_err(|_| unknown())?;
            Ok(Box::new(RandomScorer { seed }))
        }
        "baseline" if arg.is_none() => {
            let path = model.ok_or_else(|| ScoringError::MissingModel(name.to_string()))?;
            Ok(Box::new(BaselineScorer::new(BaselineModel::load(path)?)))
        }
        _ => Err(unknown()),
    }
}
