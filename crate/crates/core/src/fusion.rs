//! Decision making: fuses per-flow votes into a ranked decision.
//!
//! For every voted class `d`:
//!
//! - weight `W_d` is the sum of the effectiveness `E[j][d]` of the flows `j`
//!   that voted for `d` (negative effectiveness counts as zero);
//! - confidence `C_d = W_d / sum_k W_k`;
//! - explainability `Ex_d = sum_j E[j][d] * X_j / sum_j E[j][d]` over the
//!   same voters, where `X_j` is the flow's explainability weight.
//!
//! In probabilistic mode every flow with scores contributes
//! `E[j][d] * p[j][d]` to every class instead of a one-hot vote.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, ConfusionCounts, MetricId};
use crate::transforms::PropertyId;

/// Identity and configuration of one pre-decision flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowDescriptor {
    pub flow_id: usize,
    pub property: PropertyId,
    /// Explainability weight `X_j` in `[0, 1]`.
    pub x_weight: f64,
    pub engine_ref: String,
}

impl FlowDescriptor {
    /// Explainable flows default to `X_j = 1`, the unexplainable one to 0.
    pub fn new(flow_id: usize, property: PropertyId) -> Self {
        FlowDescriptor {
            flow_id,
            property,
            x_weight: if property.is_explainable() { 1.0 } else { 0.0 },
            engine_ref: format!("{}-{}", flow_id, property.key()),
        }
    }

    pub fn with_x_weight(mut self, x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange(x));
        }
        self.x_weight = x;
        Ok(self)
    }
}

/// `E[j][d]` for every flow `j` and class `d` under one metric. Cells may be
/// unknown (`None`), e.g. in hand-built fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessTable {
    pub metric_id: MetricId,
    values: Vec<Vec<Option<f64>>>,
}

impl EffectivenessTable {
    pub fn new(metric_id: MetricId, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if let Some(first) = values.first() {
            if values.iter().any(|row| row.len() != first.len()) {
                return Err(Error::InvalidArgument("ragged effectiveness table".into()));
            }
        }
        Ok(EffectivenessTable { metric_id, values })
    }

    pub fn from_dense(metric_id: MetricId, values: Vec<Vec<f64>>) -> Result<Self> {
        EffectivenessTable::new(
            metric_id,
            values.into_iter().map(|row| row.into_iter().map(Some).collect()).collect(),
        )
    }

    /// Applies `metric_id` to every cell. Empty cells score 0.
    pub fn from_counts(metric_id: MetricId, counts: &[Vec<ConfusionCounts>]) -> Result<Self> {
        let values = counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match metrics::metric(metric_id, c) {
                        Ok(v) => Ok(Some(v)),
                        Err(Error::EmptyConfusion) => Ok(Some(0.0)),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        EffectivenessTable::new(metric_id, values)
    }

    pub fn flow_count(&self) -> usize {
        self.values.len()
    }

    pub fn class_count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn get(&self, flow: usize, class: usize) -> Option<f64> {
        self.values.get(flow)?.get(class).copied().flatten()
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EffectivenessTable {
            metric_id: self.metric_id,
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v.map(|x| x * factor)).collect())
                .collect(),
        }
    }

    /// Keeps only the listed flows, in the given order.
    pub fn select_flows(&self, flows: &[usize]) -> Self {
        EffectivenessTable {
            metric_id: self.metric_id,
            values: flows.iter().map(|&j| self.values[j].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub class: usize,
    /// Per-class probabilities, when the engine supplied them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

/// At most one vote per flow, keyed by the flow's row in the effectiveness
/// table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VoteSet {
    votes: BTreeMap<usize, Vote>,
}

impl VoteSet {
    pub fn new() -> Self {
        VoteSet::default()
    }

    /// Builds a discrete vote set from `(flow, class)` pairs.
    pub fn from_classes(votes: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut set = VoteSet::new();
        for (flow, class) in votes {
            set.cast(flow, class);
        }
        set
    }

    /// Records (or replaces) the vote of `flow`.
    pub fn cast(&mut self, flow: usize, class: usize) {
        self.votes.insert(flow, Vote { class, scores: None });
    }

    pub fn cast_scored(&mut self, flow: usize, class: usize, scores: Vec<f64>) {
        self.votes.insert(
            flow,
            Vote {
                class,
                scores: Some(scores),
            },
        );
    }

    pub fn remove(&mut self, flow: usize) -> Option<Vote> {
        self.votes.remove(&flow)
    }

    pub fn get(&self, flow: usize) -> Option<&Vote> {
        self.votes.get(&flow)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Vote)> {
        self.votes.iter().map(|(&j, v)| (j, v))
    }

    pub fn len(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    pub fn voted_classes(&self) -> BTreeSet<usize> {
        self.votes.values().map(|v| v.class).collect()
    }

    /// Flows that voted for `class`, ascending.
    pub fn voters(&self, class: usize) -> Vec<usize> {
        self.votes.iter().filter(|(_, v)| v.class == class).map(|(&j, _)| j).collect()
    }

    /// Keeps only votes from the listed flows, renumbered to their position
    /// in `flows`.
    pub fn select_flows(&self, flows: &[usize]) -> Self {
        let mut out = VoteSet::new();
        for (new, &old) in flows.iter().enumerate() {
            if let Some(v) = self.votes.get(&old) {
                out.votes.insert(new, v.clone());
            }
        }
        out
    }
}

fn clamp_nonnegative(v: f64) -> f64 {
    v.max(0.0)
}

/// Contribution of each flow to class `d`: `(flow, E, share)` where share is
/// 1 for a discrete vote and `p[j][d]` in probabilistic mode.
fn contributions(
    d: usize,
    votes: &VoteSet,
    eff: &EffectivenessTable,
    probabilistic: bool,
) -> Result<Vec<(usize, f64, f64)>> {
    let mut out = Vec::new();
    for (j, vote) in votes.iter() {
        match (&vote.scores, probabilistic) {
            (Some(scores), true) => {
                let p = scores.get(d).copied().unwrap_or(0.0);
                if p <= 0.0 {
                    continue;
                }
                let e = match eff.get(j, d) {
                    Some(e) => e,
                    None if vote.class == d => return Err(Error::MissingEffectiveness { flow: j, class: d }),
                    None => 0.0,
                };
                out.push((j, clamp_nonnegative(e), p));
            }
            _ => {
                if vote.class == d {
                    let e = eff.get(j, d).ok_or(Error::MissingEffectiveness { flow: j, class: d })?;
                    out.push((j, clamp_nonnegative(e), 1.0));
                }
            }
        }
    }
    Ok(out)
}

/// `W_d`: effectiveness mass behind class `d`.
pub fn weight(d: usize, votes: &VoteSet, eff: &EffectivenessTable, probabilistic: bool) -> Result<f64> {
    Ok(contributions(d, votes, eff, probabilistic)?
        .iter()
        .map(|(_, e, p)| e * p)
        .sum())
}

/// Classes that appear in the decision: every voted class, plus in
/// probabilistic mode any class with positive weight.
fn ranked_classes(votes: &VoteSet, eff: &EffectivenessTable, probabilistic: bool) -> Result<BTreeMap<usize, f64>> {
    let mut classes: BTreeSet<usize> = votes.voted_classes();
    if probabilistic {
        for (_, vote) in votes.iter() {
            if let Some(scores) = &vote.scores {
                classes.extend(scores.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(d, _)| d));
            }
        }
    }
    let mut weights = BTreeMap::new();
    for d in classes {
        let w = weight(d, votes, eff, probabilistic)?;
        if votes.voted_classes().contains(&d) || w > 0.0 {
            weights.insert(d, w);
        }
    }
    Ok(weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Confidence {
    pub values: BTreeMap<usize, f64>,
    pub weights: BTreeMap<usize, f64>,
    /// Every voting flow had zero effectiveness; confidence was spread
    /// uniformly over the voted classes.
    pub zero_total_weight: bool,
}

/// `C_d = W_d / sum_k W_k` over the classes in the decision.
pub fn confidence(votes: &VoteSet, eff: &EffectivenessTable, probabilistic: bool) -> Result<Confidence> {
    if votes.is_empty() {
        return Err(Error::NoVotes);
    }
    let weights = ranked_classes(votes, eff, probabilistic)?;
    let total: f64 = weights.values().sum();
    if total > 0.0 {
        Ok(Confidence {
            values: weights.iter().map(|(&d, &w)| (d, w / total)).collect(),
            weights,
            zero_total_weight: false,
        })
    } else {
        let voted = votes.voted_classes();
        let share = 1.0 / voted.len() as f64;
        Ok(Confidence {
            values: voted.iter().map(|&d| (d, share)).collect(),
            weights,
            zero_total_weight: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Explainability {
    pub value: f64,
    /// The voters' effectiveness summed to zero; `value` is reported as 0.
    pub indeterminate: bool,
}

/// `Ex_d`: effectiveness-weighted mean of the voters' `X_j`.
pub fn explainability(
    d: usize,
    votes: &VoteSet,
    eff: &EffectivenessTable,
    flows: &[FlowDescriptor],
    probabilistic: bool,
) -> Result<Explainability> {
    let parts = contributions(d, votes, eff, probabilistic)?;
    if parts.is_empty() {
        return Err(Error::NoVotesForClass(d));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, e, p) in parts {
        let flow = flows.get(j).ok_or(Error::MissingEffectiveness { flow: j, class: d })?;
        num += e * p * flow.x_weight;
        den += e * p;
    }
    if den == 0.0 {
        return Ok(Explainability {
            value: 0.0,
            indeterminate: true,
        });
    }
    Ok(Explainability {
        value: num / den,
        indeterminate: false,
    })
}

/// A flow named in the rationale for a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contributor {
    pub flow: usize,
    pub property: PropertyId,
    pub effectiveness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedClass {
    pub class: usize,
    pub weight: f64,
    pub confidence: f64,
    pub explainability: f64,
    pub explainability_indeterminate: bool,
    /// Explainable flows that voted for this class, most effective first.
    pub contributors: Vec<Contributor>,
    /// Every flow that voted for this class (including the unexplainable
    /// one), ascending.
    pub voters: Vec<usize>,
}

impl RankedClass {
    pub fn contributing_properties(&self) -> Vec<PropertyId> {
        self.contributors.iter().map(|c| c.property).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub metric_id: MetricId,
    pub probabilistic: bool,
    pub zero_total_weight: bool,
    /// Sorted by confidence descending, then class id ascending.
    pub ranked: Vec<RankedClass>,
}

impl DecisionReport {
    pub fn winner(&self) -> &RankedClass {
        &self.ranked[0]
    }
}

fn check_flows(eff: &EffectivenessTable, flows: &[FlowDescriptor]) -> Result<()> {
    if eff.flow_count() != flows.len() {
        return Err(Error::shape(
            format!("{} flows", flows.len()),
            format!("{} effectiveness rows", eff.flow_count()),
        ));
    }
    if let Some(bad) = flows.iter().find(|f| !(0.0..=1.0).contains(&f.x_weight)) {
        return Err(Error::OutOfRange(bad.x_weight));
    }
    Ok(())
}

/// Assembles the ranked decision. Contributors are ordered by descending
/// effectiveness in `eff`.
pub fn decide(
    votes: &VoteSet,
    eff: &EffectivenessTable,
    flows: &[FlowDescriptor],
    probabilistic: bool,
) -> Result<DecisionReport> {
    decide_ordered(votes, eff, flows, probabilistic, eff)
}

/// As [`decide`], but contributors are ordered by descending effectiveness
/// in `order_by` (ties by flow position), which may come from another
/// metric than the fusion weights.
pub fn decide_ordered(
    votes: &VoteSet,
    eff: &EffectivenessTable,
    flows: &[FlowDescriptor],
    probabilistic: bool,
    order_by: &EffectivenessTable,
) -> Result<DecisionReport> {
    check_flows(eff, flows)?;
    let conf = confidence(votes, eff, probabilistic)?;

    let mut ranked = Vec::with_capacity(conf.values.len());
    for (&d, &c) in &conf.values {
        let voters = votes.voters(d);
        let ex = if voters.is_empty() && !probabilistic {
            return Err(Error::NoVotesForClass(d));
        } else {
            explainability(d, votes, eff, flows, probabilistic)?
        };
        let mut contributors: Vec<(f64, Contributor)> = voters
            .iter()
            .filter(|&&j| flows[j].property.is_explainable())
            .map(|&j| {
                let e = eff.get(j, d).unwrap_or(0.0);
                let key = order_by.get(j, d).unwrap_or(e);
                (
                    key,
                    Contributor {
                        flow: j,
                        property: flows[j].property,
                        effectiveness: e,
                    },
                )
            })
            .collect();
        contributors.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.flow.cmp(&b.1.flow)));
        ranked.push(RankedClass {
            class: d,
            weight: conf.weights.get(&d).copied().unwrap_or(0.0),
            confidence: c,
            explainability: ex.value,
            explainability_indeterminate: ex.indeterminate,
            contributors: contributors.into_iter().map(|(_, c)| c).collect(),
            voters,
        });
    }
    ranked.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then(a.class.cmp(&b.class)));

    Ok(DecisionReport {
        metric_id: eff.metric_id,
        probabilistic,
        zero_total_weight: conf.zero_total_weight,
        ranked,
    })
}
