use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{featurize, FeatureVector, Scorer, ScoringError, FEATURE_NAMES};
use crate::corpus::Document;
use crate::datagen::Example;
use crate::transforms::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            lr: 4.0,
            seed: 0,
        }
    }
}

/// Logistic regression over [`FeatureVector`]s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineModel {
    pub features: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Training loss after each epoch.
    pub loss_history: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(w: &[f64], x: &[f64; 6]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Mean logistic loss, computed stably.
fn loss(w: &[f64], b: f64, xs: &[[f64; 6]], ys: &[f64]) -> f64 {
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let z = dot(w, x) + b;
            // log(1 + e^z) - y z
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - y * z
        })
        .sum();
    total / xs.len() as f64
}

impl BaselineModel {
    pub fn untrained(config: TrainConfig) -> Self {
        BaselineModel {
            features: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            weights: vec![0.0; FEATURE_NAMES.len()],
            bias: 0.0,
            epochs: config.epochs,
            lr: config.lr,
            seed: config.seed,
            loss_history: Vec::new(),
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> f64 {
        sigmoid(dot(&self.weights, &x.0) + self.bias)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScoringError> {
        let model: BaselineModel = serde_json::from_slice(&std::fs::read(path)?)?;
        if model.weights.len() != FEATURE_NAMES.len() || !model.weights.iter().chain([&model.bias]).all(|w| w.is_finite()) {
            return Err(ScoringError::Malformed {
                row: 1,
                message: "model needs six finite weights".into(),
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScoringError> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        std::fs::write(path, json)?;
        Ok(())
    }
}

/// Fit by full-batch gradient descent on the mean logistic loss, starting
/// from zero weights. A step that would raise the loss is retried with half
/// the learning rate (down to 2^-30 of it), so training loss never
/// increases from one epoch to the next. Positive class is `CONSISTENT`.
pub fn fit(xs: &[[f64; 6]], ys: &[f64], config: TrainConfig) -> Result<BaselineModel, ScoringError> {
    let positives = ys.iter().filter(|y| **y > 0.5).count();
    if positives == 0 || positives == ys.len() {
        return Err(ScoringError::SingleClass);
    }
    let mut model = BaselineModel::untrained(config);
    let n = xs.len() as f64;
    let mut current = loss(&model.weights, model.bias, xs, ys);
    for _ in 0..config.epochs {
        let mut gw = [0.0; 6];
        let mut gb = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            let err = sigmoid(dot(&model.weights, x) + model.bias) - y;
            for (g, v) in gw.iter_mut().zip(x) {
                *g += err * v;
            }
            gb += err;
        }
        let mut step = config.lr;
        for _ in 0..=30 {
            let w: Vec<f64> = model.weights.iter().zip(&gw).map(|(w, g)| w - step * g / n).collect();
            let b = model.bias - step * gb / n;
            let l = loss(&w, b, xs, ys);
            if l <= current {
                model.weights = w;
                model.bias = b;
                current = l;
                break;
            }
            step /= 2.0;
        }
        model.loss_history.push(current);
    }
    Ok(model)
}

/// Featurize examples in parallel, segmenting each source document once.
pub fn featurize_examples(examples: &[Example]) -> Vec<FeatureVector> {
    let mut docs: HashMap<&str, Document> = HashMap::new();
    for e in examples {
        docs.entry(&e.doc_id).or_insert_with(|| Document::new(e.doc_id.clone(), e.text.clone()));
    }
    examples
        .par_iter()
        .map(|e| featurize(&docs[e.doc_id.as_str()], &e.claim))
        .collect()
}

pub fn train_baseline(examples: &[Example], config: TrainConfig) -> Result<BaselineModel, ScoringError> {
    let xs: Vec<[f64; 6]> = featurize_examples(examples).into_iter().map(|f| f.0).collect();
    let ys: Vec<f64> = examples
        .iter()
        .map(|e| f64::from(u8::from(e.label == Label::Consistent)))
        .collect();
    fit(&xs, &ys, config)
}

#[derive(Debug, Clone)]
pub struct BaselineScorer {
    pub model: BaselineModel,
}

impl BaselineScorer {
    pub fn new(model: BaselineModel) -> Self {
        BaselineScorer { model }
    }
}

impl Scorer for BaselineScorer {
    fn name(&self) -> &str {
        "baseline"
    }

    fn score(&self, document: &str, claim: &str) -> f64 {
        self.model.predict(&featurize(&Document::new("", document), claim))
    }
}
