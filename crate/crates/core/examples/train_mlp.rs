//! Trains one 784-128-128-C network on synthetic glyphs, checks its
//! gradients numerically and round-trips the weight blob.

mod common;

use xrec::inference::{gradient_check, train_mlp, MlpConfig, MlpModel};
use xrec::ingest;

fn main() -> xrec::Result<()> {
    let data = common::glyph_dataset(120);
    let (train, test) = ingest::split(&data, 0.75, 7)?;

    let untrained = MlpModel::init(data.class_count(), 1);
    let sample = &train.samples()[0];
    let rel = gradient_check(&untrained, &sample.pixels, sample.label, 1e-5, 50, 3)?;
    println!("gradient check: max relative error {rel:.2e} over 50 weights");

    let config = MlpConfig {
        epochs: 10,
        ..MlpConfig::default()
    };
    let model = train_mlp(&train, &config)?;
    let correct = test.samples().iter().filter(|s| model.predict(&s.pixels).class_vote == s.label).count();
    println!(
        "{} parameters, test accuracy {correct}/{} after {} epochs",
        model.parameter_count(),
        test.len(),
        config.epochs
    );

    let probs = model.probabilities(&test.samples()[0].pixels);
    let top: Vec<String> = probs.iter().enumerate().filter(|(_, &p)| p > 0.01).map(|(c, p)| format!("{c}:{p:.3}")).collect();
    println!("scores for first test sample (label {}): {}", test.samples()[0].label, top.join(" "));

    let blob = model.to_blob();
    assert_eq!(MlpModel::from_blob(&blob)?, model);
    println!("blob: {} bytes, round-trips exactly", blob.len());

    // Same seed, same weights.
    assert_eq!(train_mlp(&train, &config)?, model);
    println!("retraining with the same seed reproduces the model bit for bit");
    Ok(())
}
