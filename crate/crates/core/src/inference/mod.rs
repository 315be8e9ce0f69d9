//! Per-flow inference engines and their one-vs-rest evaluation.

pub mod mlp;

use crate::error::{Error, Result};
use crate::ingest::{Dataset, Image};
use crate::metrics::{self, ConfusionCounts};

pub use mlp::{gradient_check, train_mlp, MlpConfig, MlpModel};

/// One engine's answer for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_vote: usize,
    /// Per-class probabilities.
    pub scores: Vec<f64>,
    /// When set, fusion uses only the vote; otherwise it may use `scores`.
    pub discrete: bool,
}

impl Prediction {
    /// Votes for the arg-max score, lowest class id on ties.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let class_vote = argmax(&scores);
        Prediction {
            class_vote,
            scores,
            discrete: true,
        }
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// A trainable classifier behind one pre-decision flow.
pub trait InferenceEngine: Send + Sync {
    fn kind(&self) -> &'static str;

    fn class_count(&self) -> usize;

    /// Deterministic once training has finished.
    fn predict(&self, image: &Image) -> Prediction;

    fn to_blob(&self) -> Vec<u8>;
}

/// One-vs-rest confusion counts per class from votes and true labels.
pub fn confusion_from_votes(votes: &[usize], labels: &[usize], class_count: usize) -> Vec<ConfusionCounts> {
    let n = votes.len() as f64;
    let mut tp = vec![0.0; class_count];
    let mut fp = vec![0.0; class_count];
    let mut fn_ = vec![0.0; class_count];
    for (&v, &y) in votes.iter().zip(labels) {
        if v == y {
            tp[v] += 1.0;
        } else {
            fp[v] += 1.0;
            fn_[y] += 1.0;
        }
    }
    (0..class_count)
        .map(|d| ConfusionCounts::new(tp[d], n - tp[d] - fp[d] - fn_[d], fp[d], fn_[d]))
        .collect()
}

/// Per-class counts of `engine` on `data`.
pub fn evaluate_flow(engine: &dyn InferenceEngine, data: &Dataset) -> Result<Vec<ConfusionCounts>> {
    Ok(evaluate_flow_detailed(engine, data)?.counts)
}

/// Counts plus score-based one-vs-rest AUC for each class (`None` where the
/// class has no positives or no negatives in `data`).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEvaluation {
    pub counts: Vec<ConfusionCounts>,
    pub auc: Vec<Option<f64>>,
}

pub fn evaluate_flow_detailed(engine: &dyn InferenceEngine, data: &Dataset) -> Result<FlowEvaluation> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let predictions: Vec<Prediction> = data.samples().iter().map(|s| engine.predict(&s.pixels)).collect();
    let labels: Vec<usize> = data.samples().iter().map(|s| s.label).collect();
    Ok(evaluate_predictions(&predictions, &labels, data.class_count()))
}

pub fn evaluate_predictions(predictions: &[Prediction], labels: &[usize], class_count: usize) -> FlowEvaluation {
    let votes: Vec<usize> = predictions.iter().map(|p| p.class_vote).collect();
    let counts = confusion_from_votes(&votes, labels, class_count);
    let auc = (0..class_count)
        .map(|d| {
            let scored: Vec<(f64, bool)> = predictions
                .iter()
                .zip(labels)
                .map(|(p, &y)| (p.scores.get(d).copied().unwrap_or(0.0), y == d))
                .collect();
            metrics::auc(&scored).ok()
        })
        .collect();
    FlowEvaluation { counts, auc }
}
