//! Explainable recognition of handwritten characters.
//!
//! An input image fans out into pre-decision flows. Each explainable flow
//! applies one property transform (stroke, corner, enclosed region, ...) and
//! feeds the result to its own inference engine; the unexplainable flow feeds
//! the raw image to an engine. The per-flow votes are fused into a ranked
//! decision, weighting every vote by how effective that flow has been at
//! recognizing the voted class. Each ranked class carries a confidence, an
//! explainability score (the share of its vote mass that came from
//! explainable flows), and a plain-language rationale naming the properties
//! behind it.
//!
//! Module map:
//!
//! - [`ingest`]: IDX parsing, EMNIST orientation, stratified splits.
//! - [`transforms`]: binarization, thinning and the property transforms.
//! - [`inference`]: the MLP engine, gradient checking, one-vs-rest evaluation.
//! - [`metrics`]: per-class effectiveness metrics, including `E_PARS`.
//! - [`fusion`]: weights, confidence, explainability and the ranked decision.
//! - [`explain`]: confidence bands, rationale sentences, matrix rendering.
//! - [`kb`]: the knowledgebase container.
//! - [`pipeline`]: the train / evaluate / explain / compare-metrics drivers.

pub mod error;
pub mod explain;
pub mod fusion;
pub mod inference;
pub mod ingest;
pub mod kb;
pub mod metrics;
pub mod pipeline;
pub mod transforms;

pub use error::{Error, Result};
pub use fusion::{decide, DecisionReport, EffectivenessTable, FlowDescriptor, VoteSet};
pub use ingest::{Dataset, Image, ImageSample};
pub use metrics::{ConfusionCounts, MetricId};
pub use transforms::PropertyId;
