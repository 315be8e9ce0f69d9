//! End-to-end drivers: train a knowledgebase, evaluate fused accuracy,
//! explain one sample, and compare effectiveness metrics.
//!
//! Every driver is deterministic for fixed inputs and seed. Flows are
//! trained and run in parallel; results are assembled in flow order.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{self, ExplanationRecord};
use crate::fusion::{self, DecisionReport, EffectivenessTable, FlowDescriptor, VoteSet};
use crate::inference::{self, train_mlp, InferenceEngine, MlpConfig, MlpModel, Prediction};
use crate::ingest::{self, Dataset, DatasetKind, Image};
use crate::kb::{self, AucMode, KbConfig, KbCounts, KnowledgeBase, Split, SplitCounts, StoredFlow, KB_VERSION};
use crate::metrics::{self, ConfusionCounts, MetricId};
use crate::transforms::{apply_transform, PropertyId, TransformParams};

/// Settings for [`cmd_train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub dataset_kind: DatasetKind,
    /// Properties to train, in flow order. `Identity` may be listed
    /// directly or added with `include_unexplainable`.
    pub flows: Vec<PropertyId>,
    pub include_unexplainable: bool,
    pub seed: u64,
    pub train_n: usize,
    pub holdout_n: usize,
    pub mlp: MlpConfig,
    pub transforms: TransformParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dataset_kind: DatasetKind::Mnist,
            flows: PropertyId::EXPLAINABLE.to_vec(),
            include_unexplainable: true,
            seed: 0,
            train_n: 10_000,
            holdout_n: 2_000,
            mlp: MlpConfig::default(),
            transforms: TransformParams::default(),
        }
    }
}

impl TrainConfig {
    /// The flow list with duplicates dropped and Identity last.
    pub fn selected_flows(&self) -> Result<Vec<PropertyId>> {
        let mut flows: Vec<PropertyId> = Vec::new();
        for &p in &self.flows {
            if p.is_explainable() && !flows.contains(&p) {
                flows.push(p);
            }
        }
        if self.include_unexplainable || self.flows.contains(&PropertyId::Identity) {
            flows.push(PropertyId::Identity);
        }
        if flows.is_empty() {
            return Err(Error::InvalidArgument("no flows selected".into()));
        }
        Ok(flows)
    }
}

/// Draws the stratified train and holdout subsets (disjoint) from one
/// labelled file.
pub fn training_subsets(full: &Dataset, train_n: usize, holdout_n: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    if train_n == 0 {
        return Err(Error::EmptyDataset);
    }
    let subset = ingest::stratified_subset(full, train_n + holdout_n, seed)?;
    if holdout_n == 0 {
        return Ok((subset.clone(), subset.with_samples(Vec::new())));
    }
    let fraction = train_n as f64 / (train_n + holdout_n) as f64;
    ingest::split(&subset, fraction, seed)
}

/// `data` with every image passed through `property`'s transform.
pub fn transform_dataset(data: &Dataset, property: PropertyId, params: &TransformParams) -> Dataset {
    if property == PropertyId::Identity {
        return data.clone();
    }
    data.with_samples(
        data.samples()
            .iter()
            .map(|s| ingest::ImageSample {
                pixels: apply_transform(property, &s.pixels, params),
                label: s.label,
            })
            .collect(),
    )
}

/// Per-flow outcome printed after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub flow_id: usize,
    pub property: PropertyId,
    pub train_accuracy: f64,
    pub holdout_accuracy: Option<f64>,
}

fn overall_accuracy(counts: &[ConfusionCounts], samples: usize) -> f64 {
    counts.iter().map(|c| c.tp).sum::<f64>() / samples as f64
}

fn split_counts(eval: Vec<inference::FlowEvaluation>, samples: usize) -> SplitCounts {
    let (counts, auc) = eval.into_iter().map(|e| (e.counts, e.auc)).unzip();
    SplitCounts {
        samples,
        counts,
        auc,
        auc_mode: AucMode::Scores,
    }
}

/// Trains one engine per selected flow (Identity on the raw images, every
/// other flow on its transformed images) and records one-vs-rest counts on
/// both splits.
pub fn cmd_train(train: &Dataset, holdout: &Dataset, config: &TrainConfig) -> Result<(KnowledgeBase, Vec<FlowSummary>)> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let properties = config.selected_flows()?;
    let trained: Vec<Result<_>> = properties
        .par_iter()
        .enumerate()
        .map(|(j, &property)| {
            let flow_id = j + 1;
            let attribute = |e| Error::in_flow(format!("F{flow_id} ({})", property.key()), e);
            let train_t = transform_dataset(train, property, &config.transforms);
            let mlp = MlpConfig {
                seed: config.seed.wrapping_add(flow_id as u64),
                ..config.mlp.clone()
            };
            let model = train_mlp(&train_t, &mlp).map_err(attribute)?;
            let train_eval = inference::evaluate_flow_detailed(&model, &train_t).map_err(attribute)?;
            let holdout_eval = if holdout.is_empty() {
                None
            } else {
                let holdout_t = transform_dataset(holdout, property, &config.transforms);
                Some(inference::evaluate_flow_detailed(&model, &holdout_t).map_err(attribute)?)
            };
            Ok((FlowDescriptor::new(flow_id, property), model, train_eval, holdout_eval))
        })
        .collect();

    let mut flows = Vec::new();
    let mut summaries = Vec::new();
    let mut train_evals = Vec::new();
    let mut holdout_evals = Vec::new();
    for result in trained {
        let (descriptor, model, train_eval, holdout_eval) = result?;
        summaries.push(FlowSummary {
            flow_id: descriptor.flow_id,
            property: descriptor.property,
            train_accuracy: overall_accuracy(&train_eval.counts, train.len()),
            holdout_accuracy: holdout_eval.as_ref().map(|e| overall_accuracy(&e.counts, holdout.len())),
        });
        flows.push(StoredFlow {
            descriptor,
            engine_kind: model.kind().to_string(),
            engine_blob: model.to_blob(),
        });
        train_evals.push(train_eval);
        holdout_evals.extend(holdout_eval);
    }

    let kb = KnowledgeBase {
        version: KB_VERSION,
        dataset_fingerprint: train.fingerprint(),
        config: KbConfig {
            dataset_kind: config.dataset_kind,
            class_names: train.class_names().to_vec(),
            seed: config.seed,
            train_n: train.len(),
            holdout_n: holdout.len(),
            mlp: config.mlp.clone(),
            transforms: config.transforms.clone(),
        },
        flows,
        counts: KbCounts {
            train: Some(split_counts(train_evals, train.len())),
            holdout: (!holdout.is_empty()).then(|| split_counts(holdout_evals, holdout.len())),
        },
    };
    kb.validate()?;
    Ok((kb, summaries))
}

/// Which flows take part in fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSet {
    /// Explainable flows only ("E").
    Explainable,
    /// Explainable flows plus the unexplainable one ("E+U").
    All,
}

impl FlowSet {
    pub fn indices(self, flows: &[FlowDescriptor]) -> Vec<usize> {
        flows
            .iter()
            .enumerate()
            .filter(|(_, f)| self == FlowSet::All || f.property.is_explainable())
            .map(|(j, _)| j)
            .collect()
    }
}

/// Predictions of every flow on every sample, `[flow][sample]`.
pub fn predict_flows(kb: &KnowledgeBase, images: &[Image]) -> Result<Vec<Vec<Prediction>>> {
    let engines: Vec<MlpModel> = kb
        .flows
        .iter()
        .map(|f| f.engine().map_err(|e| Error::in_flow(f.descriptor.flow_id, e)))
        .collect::<Result<_>>()?;
    if let Some(bad) = engines.iter().find(|e| e.class_count() != kb.class_count()) {
        return Err(Error::shape(
            format!("{} classes", kb.class_count()),
            format!("engine with {} classes", bad.class_count()),
        ));
    }
    Ok(kb
        .flows
        .par_iter()
        .zip(&engines)
        .map(|(flow, engine)| {
            images
                .iter()
                .map(|image| {
                    let input = apply_transform(flow.descriptor.property, image, &kb.config.transforms);
                    engine.predict(&input)
                })
                .collect()
        })
        .collect())
}

/// Votes of the flows in `subset` on one sample, renumbered to subset
/// positions. Scores are attached in probabilistic mode.
pub fn votes_for(predictions: &[Vec<Prediction>], sample: usize, subset: &[usize], probabilistic: bool) -> VoteSet {
    let mut votes = VoteSet::new();
    for (k, &j) in subset.iter().enumerate() {
        let p = &predictions[j][sample];
        if probabilistic {
            votes.cast_scored(k, p.class_vote, p.scores.clone());
        } else {
            votes.cast(k, p.class_vote);
        }
    }
    votes
}

/// Fraction of samples whose fused winner equals the label.
fn fused_accuracy(
    votes: impl Fn(usize, &[usize]) -> VoteSet,
    labels: &[usize],
    eff: &EffectivenessTable,
    flows: &[FlowDescriptor],
    set: FlowSet,
    probabilistic: bool,
) -> Result<Option<(f64, Vec<bool>)>> {
    let subset = set.indices(flows);
    if subset.is_empty() {
        return Ok(None);
    }
    let eff = eff.select_flows(&subset);
    let sub_flows: Vec<FlowDescriptor> = subset.iter().map(|&j| flows[j].clone()).collect();
    let mut correct = Vec::with_capacity(labels.len());
    for (i, &label) in labels.iter().enumerate() {
        let v = votes(i, &subset);
        let ok = match fusion::decide(&v, &eff, &sub_flows, probabilistic) {
            Ok(report) => report.winner().class == label,
            Err(Error::NoVotes) => false,
            Err(e) => return Err(e),
        };
        correct.push(ok);
    }
    let hits = correct.iter().filter(|&&c| c).count();
    Ok(Some((hits as f64 / labels.len() as f64, correct)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub class: String,
    pub support: usize,
    pub e: Option<f64>,
    pub eu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowAccuracy {
    pub flow_id: usize,
    pub property: PropertyId,
    pub accuracy: f64,
}

/// Fused accuracy of one metric with the explainable flows (E) and with all
/// flows (E+U).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metric_id: MetricId,
    pub probabilistic: bool,
    pub split: Split,
    pub samples: usize,
    pub e: Option<f64>,
    pub eu: Option<f64>,
    pub per_class: Vec<ClassAccuracy>,
    pub per_flow: Vec<FlowAccuracy>,
}

impl EvaluationReport {
    /// `E+U - E`, when both were evaluated.
    pub fn delta(&self) -> Option<f64> {
        Some(self.eu? - self.e?)
    }
}

fn check_test_set(kb: &KnowledgeBase, test: &Dataset) -> Result<()> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if test.class_count() != kb.class_count() {
        return Err(Error::shape(
            format!("{} classes", kb.class_count()),
            format!("test set with {} classes", test.class_count()),
        ));
    }
    Ok(())
}

fn labels_of(data: &Dataset) -> Vec<usize> {
    data.samples().iter().map(|s| s.label).collect()
}

fn images_of(data: &Dataset) -> Vec<Image> {
    data.samples().iter().map(|s| s.pixels.clone()).collect()
}

/// Evaluates fused accuracy from precomputed predictions.
pub fn evaluate_predictions(
    kb: &KnowledgeBase,
    predictions: &[Vec<Prediction>],
    labels: &[usize],
    metric: MetricId,
    probabilistic: bool,
    split: Split,
) -> Result<EvaluationReport> {
    let eff = kb::effectiveness_table(kb, metric, split)?;
    let flows = kb.descriptors();
    let votes = |i: usize, subset: &[usize]| votes_for(predictions, i, subset, probabilistic);
    let e = fused_accuracy(votes, labels, &eff, &flows, FlowSet::Explainable, probabilistic)?;
    let eu = fused_accuracy(votes, labels, &eff, &flows, FlowSet::All, probabilistic)?;

    let per_class_rate = |outcome: &Option<(f64, Vec<bool>)>, d: usize| {
        outcome.as_ref().map(|(_, correct)| {
            let (hits, n) = labels
                .iter()
                .zip(correct)
                .filter(|(&y, _)| y == d)
                .fold((0usize, 0usize), |(h, n), (_, &ok)| (h + ok as usize, n + 1));
            if n == 0 {
                0.0
            } else {
                hits as f64 / n as f64
            }
        })
    };
    let per_class = kb
        .config
        .class_names
        .iter()
        .enumerate()
        .map(|(d, name)| ClassAccuracy {
            class: name.clone(),
            support: labels.iter().filter(|&&y| y == d).count(),
            e: per_class_rate(&e, d),
            eu: per_class_rate(&eu, d),
        })
        .collect();
    let per_flow = flows
        .iter()
        .zip(predictions)
        .map(|(f, preds)| FlowAccuracy {
            flow_id: f.flow_id,
            property: f.property,
            accuracy: preds.iter().zip(labels).filter(|(p, &y)| p.class_vote == y).count() as f64 / labels.len() as f64,
        })
        .collect();

    Ok(EvaluationReport {
        metric_id: metric,
        probabilistic,
        split,
        samples: labels.len(),
        e: e.map(|(a, _)| a),
        eu: eu.map(|(a, _)| a),
        per_class,
        per_flow,
    })
}

/// Runs every flow on `test` and reports fused accuracy under `metric`.
pub fn cmd_evaluate(
    kb: &KnowledgeBase,
    test: &Dataset,
    metric: MetricId,
    probabilistic: bool,
    split: Split,
) -> Result<EvaluationReport> {
    check_test_set(kb, test)?;
    let predictions = predict_flows(kb, &images_of(test))?;
    evaluate_predictions(kb, &predictions, &labels_of(test), metric, probabilistic, split)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub metric_id: MetricId,
    pub e: Option<f64>,
    pub eu: Option<f64>,
}

/// Fused accuracy for each metric, sorted by E+U descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    pub probabilistic: bool,
    pub samples: usize,
    pub rows: Vec<GridRow>,
}

impl ComparisonGrid {
    pub fn row(&self, metric: MetricId) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.metric_id == metric)
    }

    fn sorted(mut rows: Vec<GridRow>, probabilistic: bool, samples: usize) -> Self {
        let key = |r: &GridRow| r.eu.unwrap_or(f64::NEG_INFINITY);
        rows.sort_by(|a, b| key(b).total_cmp(&key(a)));
        ComparisonGrid {
            probabilistic,
            samples,
            rows,
        }
    }

    pub fn to_table(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |a| format!("{:.1}", a * 100.0));
        let mut out = format!("{:<20} {:>6} {:>6}\n", "Metric", "E", "E+U");
        for r in &self.rows {
            out += &format!("{:<20} {:>6} {:>6}\n", r.metric_id.label(), fmt(r.e), fmt(r.eu));
        }
        out
    }
}

/// The comparison grid over `metrics` (all fourteen when empty).
pub fn cmd_compare_metrics(
    kb: &KnowledgeBase,
    test: &Dataset,
    metrics: &[MetricId],
    probabilistic: bool,
    split: Split,
) -> Result<ComparisonGrid> {
    check_test_set(kb, test)?;
    let flows = kb.descriptors();
    if !flows.iter().any(|f| f.property == PropertyId::Identity) || !flows.iter().any(|f| f.property.is_explainable())
    {
        return Err(Error::InvalidArgument(
            "metric comparison needs the unexplainable flow and at least one explainable flow".into(),
        ));
    }
    let metrics = if metrics.is_empty() { &MetricId::ALL[..] } else { metrics };
    let predictions = predict_flows(kb, &images_of(test))?;
    let labels = labels_of(test);
    let rows = metrics
        .iter()
        .map(|&m| {
            let r = evaluate_predictions(kb, &predictions, &labels, m, probabilistic, split)?;
            Ok(GridRow {
                metric_id: m,
                e: r.e,
                eu: r.eu,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonGrid::sorted(rows, probabilistic, labels.len()))
}

/// Everything behind one explained sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub sample_id: String,
    pub class_names: Vec<String>,
    pub flows: Vec<FlowDescriptor>,
    pub votes: VoteSet,
    pub effectiveness: EffectivenessTable,
    pub report: DecisionReport,
}

impl Explanation {
    pub fn sentences(&self) -> Vec<String> {
        explain::render(&self.report, &self.class_names)
    }

    pub fn matrix(&self) -> String {
        explain::render_matrix(&self.report, &self.votes, &self.effectiveness, &self.flows, &self.class_names)
    }

    pub fn record(&self) -> ExplanationRecord {
        explain::to_record(self.sample_id.clone(), &self.report, &self.class_names)
    }
}

/// Contributing properties are listed by descending recall effectiveness,
/// whichever metric weights the fusion.
pub const RATIONALE_ORDER_METRIC: MetricId = MetricId::Recall;

/// Runs every flow on one image and explains the fused decision.
pub fn cmd_explain(
    kb: &KnowledgeBase,
    image: &Image,
    sample_id: impl Into<String>,
    metric: MetricId,
    probabilistic: bool,
    split: Split,
) -> Result<Explanation> {
    let predictions = predict_flows(kb, std::slice::from_ref(image))?;
    let flows = kb.descriptors();
    let all: Vec<usize> = (0..flows.len()).collect();
    let votes = votes_for(&predictions, 0, &all, probabilistic);
    let effectiveness = kb::effectiveness_table(kb, metric, split)?;
    let order = kb::effectiveness_table(kb, RATIONALE_ORDER_METRIC, split)?;
    let report = fusion::decide_ordered(&votes, &effectiveness, &flows, probabilistic, &order)?;
    Ok(Explanation {
        sample_id: sample_id.into(),
        class_names: kb.config.class_names.clone(),
        flows,
        votes,
        effectiveness,
        report,
    })
}

/// Hand-supplied votes and per-cell counts or effectiveness values that
/// stand in for a trained knowledgebase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub dataset_kind: DatasetKind,
    #[serde(default)]
    pub sample_id: Option<String>,
    pub flows: Vec<FixtureFlow>,
    /// Labelled vote sets replayed by the metric comparison.
    #[serde(default)]
    pub replay: Vec<FixtureSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFlow {
    pub property: PropertyId,
    #[serde(default)]
    pub x_weight: Option<f64>,
    /// Class name this flow votes for in the explained sample.
    pub vote: String,
    pub cells: Vec<FixtureCell>,
}

/// One `(flow, class)` cell. An explicit effectiveness value for a metric
/// wins over the value derived from `counts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureCell {
    pub class: String,
    #[serde(default)]
    pub counts: Option<ConfusionCounts>,
    #[serde(default)]
    pub effectiveness: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSample {
    pub label: String,
    /// One entry per flow; `null` abstains.
    pub votes: Vec<Option<String>>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Fixture> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn class_names(&self) -> Vec<String> {
        self.dataset_kind.class_names()
    }

    pub fn class_index(&self, name: &str) -> Result<usize> {
        self.class_names()
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown class `{name}` for {:?}", self.dataset_kind)))
    }

    pub fn descriptors(&self) -> Result<Vec<FlowDescriptor>> {
        self.flows
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let d = FlowDescriptor::new(j + 1, f.property);
                match f.x_weight {
                    Some(x) => d.with_x_weight(x),
                    None => Ok(d),
                }
            })
            .collect()
    }

    pub fn effectiveness(&self, metric: MetricId) -> Result<EffectivenessTable> {
        let classes = self.dataset_kind.class_count();
        let mut values = vec![vec![None; classes]; self.flows.len()];
        for (j, flow) in self.flows.iter().enumerate() {
            for cell in &flow.cells {
                let d = self.class_index(&cell.class)?;
                let explicit = cell
                    .effectiveness
                    .iter()
                    .map(|(k, &v)| Ok((k.parse::<MetricId>()?, v)))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .find(|(m, _)| *m == metric)
                    .map(|(_, v)| v);
                values[j][d] = match (explicit, &cell.counts) {
                    (Some(v), _) => Some(v),
                    (None, Some(c)) => Some(metrics::metric(metric, c)?),
                    (None, None) => None,
                };
            }
        }
        EffectivenessTable::new(metric, values)
    }

    pub fn votes(&self) -> Result<VoteSet> {
        let mut votes = VoteSet::new();
        for (j, flow) in self.flows.iter().enumerate() {
            votes.cast(j, self.class_index(&flow.vote)?);
        }
        Ok(votes)
    }

    /// Explains the fixture's sample under `metric`.
    pub fn explain(&self, metric: MetricId) -> Result<Explanation> {
        let flows = self.descriptors()?;
        let votes = self.votes()?;
        let effectiveness = self.effectiveness(metric)?;
        let order = self.effectiveness(RATIONALE_ORDER_METRIC)?;
        let report = fusion::decide_ordered(&votes, &effectiveness, &flows, false, &order)?;
        Ok(Explanation {
            sample_id: self.sample_id.clone().unwrap_or_else(|| "fixture".into()),
            class_names: self.class_names(),
            flows,
            votes,
            effectiveness,
            report,
        })
    }

    /// Replays the labelled vote sets under each metric (all fourteen when
    /// `metrics` is empty).
    pub fn compare_metrics(&self, metrics: &[MetricId]) -> Result<ComparisonGrid> {
        if self.replay.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let flows = self.descriptors()?;
        let mut labels = Vec::with_capacity(self.replay.len());
        let mut replay: Vec<Vec<Option<usize>>> = Vec::with_capacity(self.replay.len());
        for sample in &self.replay {
            if sample.votes.len() != flows.len() {
                return Err(Error::shape(
                    format!("{} votes", flows.len()),
                    format!("{} votes", sample.votes.len()),
                ));
            }
            labels.push(self.class_index(&sample.label)?);
            replay.push(
                sample
                    .votes
                    .iter()
                    .map(|v| v.as_deref().map(|name| self.class_index(name)).transpose())
                    .collect::<Result<_>>()?,
            );
        }
        let votes = |i: usize, subset: &[usize]| {
            let mut set = VoteSet::new();
            for (k, &j) in subset.iter().enumerate() {
                if let Some(class) = replay[i][j] {
                    set.cast(k, class);
                }
            }
            set
        };
        let metrics = if metrics.is_empty() { &MetricId::ALL[..] } else { metrics };
        let rows = metrics
            .iter()
            .map(|&m| {
                let eff = self.effectiveness(m)?;
                Ok(GridRow {
                    metric_id: m,
                    e: fused_accuracy(votes, &labels, &eff, &flows, FlowSet::Explainable, false)?.map(|r| r.0),
                    eu: fused_accuracy(votes, &labels, &eff, &flows, FlowSet::All, false)?.map(|r| r.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonGrid::sorted(rows, false, labels.len()))
    }
}
