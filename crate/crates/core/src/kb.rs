//! The knowledgebase: trained engines, transform parameters and per-flow
//! confusion counts in one self-checking file.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes   "XRECKB\r\n"
//! version  u32
//! count    u32       number of sections
//! section  tag [u8; 4], length u64, payload     (repeated)
//! sha256   32 bytes  over everything before it
//! ```
//!
//! Sections, in order: `CONF` (JSON config), `FLOW` (JSON flow records),
//! one `BLOB` per flow (engine bytes), `CNTS` (JSON counts). JSON is written
//! from plain structs and vectors only, so serialization is canonical and a
//! load/save cycle reproduces the file byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fusion::{EffectivenessTable, FlowDescriptor};
use crate::inference::{MlpConfig, MlpModel};
use crate::ingest::DatasetKind;
use crate::metrics::{ConfusionCounts, MetricId};
use crate::transforms::TransformParams;

pub const KB_MAGIC: &[u8; 8] = b"XRECKB\r\n";
pub const KB_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Holdout,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "holdout" => Ok(Split::Holdout),
            other => Err(Error::InvalidArgument(format!("unknown split `{other}`"))),
        }
    }
}

/// Run-wide settings pinned to the trained artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbConfig {
    pub dataset_kind: DatasetKind,
    pub class_names: Vec<String>,
    pub seed: u64,
    pub train_n: usize,
    pub holdout_n: usize,
    pub mlp: MlpConfig,
    pub transforms: TransformParams,
}

/// A flow plus everything needed to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredFlow {
    pub descriptor: FlowDescriptor,
    pub engine_kind: String,
    #[serde(skip)]
    pub engine_blob: Vec<u8>,
}

impl StoredFlow {
    pub fn engine(&self) -> Result<MlpModel> {
        match self.engine_kind.as_str() {
            "mlp" => MlpModel::from_blob(&self.engine_blob),
            other => Err(Error::CorruptKb(format!("unknown engine kind `{other}`"))),
        }
    }
}

/// How stored AUC values were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucMode {
    /// Ranked on the engine's class probabilities.
    Scores,
    /// Ranked on the 0/1 vote indicator.
    Votes,
}

/// One-vs-rest counts per `(flow, class)` on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub samples: usize,
    pub counts: Vec<Vec<ConfusionCounts>>,
    pub auc: Vec<Vec<Option<f64>>>,
    pub auc_mode: AucMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbCounts {
    pub train: Option<SplitCounts>,
    pub holdout: Option<SplitCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub version: u32,
    pub dataset_fingerprint: String,
    pub config: KbConfig,
    pub flows: Vec<StoredFlow>,
    pub counts: KbCounts,
}

#[derive(Serialize, Deserialize)]
struct ConfSection {
    dataset_fingerprint: String,
    config: KbConfig,
}

impl KnowledgeBase {
    pub fn class_count(&self) -> usize {
        self.config.class_names.len()
    }

    pub fn descriptors(&self) -> Vec<FlowDescriptor> {
        self.flows.iter().map(|f| f.descriptor.clone()).collect()
    }

    pub fn split(&self, split: Split) -> Option<&SplitCounts> {
        match split {
            Split::Train => self.counts.train.as_ref(),
            Split::Holdout => self.counts.holdout.as_ref(),
        }
    }

    /// Checks the structural invariants a saved or loaded KB must satisfy.
    pub fn validate(&self) -> Result<()> {
        let classes = self.class_count();
        for (name, split) in [("train", &self.counts.train), ("holdout", &self.counts.holdout)] {
            let Some(split) = split else { continue };
            if split.counts.len() != self.flows.len() || split.auc.len() != self.flows.len() {
                return Err(Error::CorruptKb(format!(
                    "{name} counts cover {} flows, KB has {}",
                    split.counts.len(),
                    self.flows.len()
                )));
            }
            for (row, auc) in split.counts.iter().zip(&split.auc) {
                if row.len() != classes || auc.len() != classes {
                    return Err(Error::CorruptKb(format!("{name} counts row is not {classes} classes wide")));
                }
                for c in row {
                    match c.check() {
                        Ok(()) | Err(Error::EmptyConfusion) => {}
                        Err(e) => return Err(Error::CorruptKb(format!("{name} counts: {e}"))),
                    }
                    if c.total() != split.samples as f64 {
                        return Err(Error::CorruptKb(format!(
                            "{name} counts total {} != {} samples",
                            c.total(),
                            split.samples
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical byte form.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let conf = serde_json::to_vec(&ConfSection {
            dataset_fingerprint: self.dataset_fingerprint.clone(),
            config: self.config.clone(),
        })?;
        let flows = serde_json::to_vec(&self.flows)?;
        let counts = serde_json::to_vec(&self.counts)?;

        let mut sections: Vec<(&[u8; 4], &[u8])> = vec![(b"CONF", &conf), (b"FLOW", &flows)];
        for flow in &self.flows {
            sections.push((b"BLOB", &flow.engine_blob));
        }
        sections.push((b"CNTS", &counts));

        let mut out = Vec::new();
        out.extend_from_slice(KB_MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&(sections.len() as u32).to_le_bytes());
        for (tag, payload) in sections {
            out.extend_from_slice(tag);
            out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
            out.extend_from_slice(payload);
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<KnowledgeBase> {
        let corrupt = |msg: &str| Error::CorruptKb(msg.to_string());
        if bytes.len() < KB_MAGIC.len() + 8 + 32 {
            return Err(corrupt("file too short"));
        }
        if &bytes[..8] != KB_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != KB_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: KB_VERSION,
            });
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("checksum mismatch"));
        }

        let count = u32::from_le_bytes(body[12..16].try_into().unwrap()) as usize;
        let mut sections = Vec::with_capacity(count.min(1024));
        let mut at = 16;
        for _ in 0..count {
            if body.len() < at + 12 {
                return Err(corrupt("truncated section header"));
            }
            let tag: [u8; 4] = body[at..at + 4].try_into().unwrap();
            let len = u64::from_le_bytes(body[at + 4..at + 12].try_into().unwrap()) as usize;
            at += 12;
            if body.len() - at < len {
                return Err(corrupt("truncated section"));
            }
            sections.push((tag, &body[at..at + len]));
            at += len;
        }
        if at != body.len() {
            return Err(corrupt("trailing bytes"));
        }

        let mut sections = sections.into_iter();
        let mut expect = |tag: &[u8; 4]| -> Result<&[u8]> {
            match sections.next() {
                Some((t, payload)) if &t == tag => Ok(payload),
                _ => Err(Error::CorruptKb(format!("expected section {}", String::from_utf8_lossy(tag)))),
            }
        };
        let json_err = |e: serde_json::Error| Error::CorruptKb(e.to_string());
        let conf: ConfSection = serde_json::from_slice(expect(b"CONF")?).map_err(json_err)?;
        let mut flows: Vec<StoredFlow> = serde_json::from_slice(expect(b"FLOW")?).map_err(json_err)?;
        for flow in &mut flows {
            flow.engine_blob = expect(b"BLOB")?.to_vec();
        }
        let counts: KbCounts = serde_json::from_slice(expect(b"CNTS")?).map_err(json_err)?;
        if sections.next().is_some() {
            return Err(corrupt("unexpected extra section"));
        }

        let kb = KnowledgeBase {
            version,
            dataset_fingerprint: conf.dataset_fingerprint,
            config: conf.config,
            flows,
            counts,
        };
        kb.validate()?;
        Ok(kb)
    }

    /// Human-readable export (engine blobs summarized by size and digest).
    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct FlowView<'a> {
            #[serde(flatten)]
            flow: &'a StoredFlow,
            engine_bytes: usize,
            engine_sha256: String,
        }
        #[derive(Serialize)]
        struct View<'a> {
            version: u32,
            dataset_fingerprint: &'a str,
            config: &'a KbConfig,
            flows: Vec<FlowView<'a>>,
            counts: &'a KbCounts,
        }
        let view = View {
            version: self.version,
            dataset_fingerprint: &self.dataset_fingerprint,
            config: &self.config,
            flows: self
                .flows
                .iter()
                .map(|flow| FlowView {
                    flow,
                    engine_bytes: flow.engine_blob.len(),
                    engine_sha256: Sha256::digest(&flow.engine_blob)
                        .iter()
                        .map(|b| format!("{b:02x}"))
                        .collect(),
                })
                .collect(),
            counts: &self.counts,
        };
        Ok(serde_json::to_string_pretty(&view)?)
    }
}

/// Writes `kb` atomically: a temporary sibling file is renamed into place.
pub fn save(kb: &KnowledgeBase, destination: &Path) -> Result<()> {
    kb.validate()?;
    let bytes = kb.to_bytes()?;
    let mut tmp = destination.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    let write = || -> std::io::Result<()> {
        let mut file = fs::File::create(tmp)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
        fs::rename(tmp, destination)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(tmp);
        Error::io(destination, e)
    })
}

pub fn load(source: &Path) -> Result<KnowledgeBase> {
    let bytes = fs::read(source).map_err(|e| Error::io(source, e))?;
    KnowledgeBase::from_bytes(&bytes)
}

/// Projects stored counts through `metric`. Pure: the KB is not touched.
///
/// `Auc` uses the stored score-based values where they exist and falls back
/// to the count-based form (the vote indicator as score) elsewhere.
pub fn effectiveness_table(kb: &KnowledgeBase, metric: MetricId, split: Split) -> Result<EffectivenessTable> {
    let stored = kb.split(split).ok_or_else(|| Error::MissingCounts(format!("{split:?}").to_lowercase()))?;
    let table = EffectivenessTable::from_counts(metric, &stored.counts)?;
    if metric != MetricId::Auc || stored.auc_mode != AucMode::Scores {
        return Ok(table);
    }
    let values = table
        .rows()
        .iter()
        .zip(&stored.auc)
        .map(|(row, auc)| row.iter().zip(auc).map(|(&v, &a)| a.or(v)).collect())
        .collect();
    EffectivenessTable::new(metric, values)
}
