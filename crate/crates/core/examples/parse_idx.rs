//! Reads an IDX image/label pair, or round-trips a synthetic one when no
//! paths are given.
//!
//!     cargo run --example parse_idx -- data/mnist/t10k-images-idx3-ubyte data/mnist/t10k-labels-idx1-ubyte

mod common;

use std::path::Path;

use xrec::ingest::{self, Dataset, DatasetKind};

fn main() -> xrec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let data = match args.as_slice() {
        [images, labels] => Dataset::load_idx(Path::new(images), Path::new(labels), DatasetKind::Mnist)?,
        _ => {
            let (images, labels) = common::glyph_dataset(30).to_idx();
            println!("no paths given; parsing {} + {} synthetic bytes", images.len(), labels.len());
            Dataset::from_idx(&images, &labels, DatasetKind::Mnist)?
        }
    };

    println!("{} samples, {} classes, fingerprint {}", data.len(), data.class_count(), &data.fingerprint()[..16]);
    for (class, n) in data.support().iter().enumerate().filter(|(_, &n)| n > 0) {
        println!("  class {:>2} ({}): {n}", class, data.class_names()[class]);
    }

    let (train, holdout) = ingest::split(&data, 0.8, 0)?;
    println!("stratified 80/20 split: {} / {}", train.len(), holdout.len());

    let first = &data.samples()[0];
    println!("\nsample 0, label {}:\n{}", data.class_names()[first.label], common::ascii(&first.pixels));

    // Malformed input is rejected, never truncated.
    let (images, _) = data.to_idx();
    let err = ingest::parse_idx_images(&images[..images.len() - 1]).unwrap_err();
    println!("truncated file: {err}");
    Ok(())
}
