//! Trains a small knowledgebase, saves it, reloads it, and shows that a
//! single flipped byte is caught by the checksum.

mod common;

use xrec::inference::MlpConfig;
use xrec::kb::{self, KnowledgeBase, Split};
use xrec::pipeline::{self, TrainConfig};
use xrec::transforms::PropertyId;
use xrec::MetricId;

fn main() -> xrec::Result<()> {
    let data = common::glyph_dataset(150);
    let config = TrainConfig {
        flows: vec![PropertyId::Stroke, PropertyId::ConvexHull],
        train_n: 90,
        holdout_n: 45,
        mlp: MlpConfig {
            epochs: 5,
            ..MlpConfig::default()
        },
        ..TrainConfig::default()
    };
    let (train, holdout) = pipeline::training_subsets(&data, config.train_n, config.holdout_n, 0)?;
    let (kb, summaries) = pipeline::cmd_train(&train, &holdout, &config)?;
    for s in &summaries {
        println!("F{} {:<12} train {:.3} holdout {:.3}", s.flow_id, s.property.label(), s.train_accuracy, s.holdout_accuracy.unwrap_or(f64::NAN));
    }

    let dir = std::env::temp_dir().join(format!("xrec-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| xrec::Error::InvalidArgument(e.to_string()))?;
    let path = dir.join("glyphs.xkb");
    kb::save(&kb, &path)?;
    let loaded = kb::load(&path)?;
    assert_eq!(loaded, kb);
    let bytes = kb.to_bytes()?;
    println!("\nsaved {} bytes to {}, reloaded identically", bytes.len(), path.display());

    let table = kb::effectiveness_table(&loaded, MetricId::Epars, Split::Holdout)?;
    println!("holdout E_PARS for class 1 per flow: {:?}", (0..table.flow_count()).map(|j| table.get(j, 1)).collect::<Vec<_>>());

    let mut tampered = bytes.clone();
    let mid = tampered.len() / 2;
    tampered[mid] ^= 0x01;
    println!("flipped byte {mid}: {}", KnowledgeBase::from_bytes(&tampered).unwrap_err());

    let json = kb.to_json()?;
    println!("\nJSON export (first lines):");
    for line in json.lines().take(12) {
        println!("  {line}");
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
