//! Fused accuracy for every metric, first on the fixture's replay samples,
//! then on a freshly trained three-flow knowledgebase.

mod common;

use xrec::inference::MlpConfig;
use xrec::kb::Split;
use xrec::pipeline::{self, Fixture, TrainConfig};
use xrec::transforms::PropertyId;
use xrec::MetricId;

fn main() -> xrec::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/emnist_s_example.json");
    let grid = Fixture::load(&path)?.compare_metrics(&[])?;
    println!("fixture replay, {} samples\n{}", grid.samples, grid.to_table());

    let data = common::glyph_dataset(300);
    let config = TrainConfig {
        flows: vec![PropertyId::Stroke, PropertyId::Endpoint, PropertyId::EnclosedRegion],
        train_n: 150,
        holdout_n: 75,
        mlp: MlpConfig {
            epochs: 5,
            ..MlpConfig::default()
        },
        ..TrainConfig::default()
    };
    let (train, holdout) = pipeline::training_subsets(&data, config.train_n, config.holdout_n, config.seed)?;
    let (kb, _) = pipeline::cmd_train(&train, &holdout, &config)?;
    let test = xrec::ingest::stratified_subset(&data, 75, 9)?;
    for probabilistic in [false, true] {
        let grid = pipeline::cmd_compare_metrics(&kb, &test, &MetricId::ALL, probabilistic, Split::Holdout)?;
        println!(
            "{} fusion, {} samples\n{}",
            if probabilistic { "probabilistic" } else { "vote" },
            grid.samples,
            grid.to_table()
        );
    }
    Ok(())
}
