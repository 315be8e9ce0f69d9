//! Every property transform applied to one glyph.

mod common;

use xrec::transforms::{apply_transform, PropertyId, TransformParams};

fn main() {
    let params = TransformParams::default();
    for (label, shift) in [(0, 0), (4, 1)] {
        let img = common::glyph(label, shift, 1);
        println!("== input \"{label}\"\n{}", common::ascii(&img));
        for p in PropertyId::EXPLAINABLE {
            let out = apply_transform(p, &img, &params);
            let lit = out.pixels().iter().filter(|&&v| v > 0).count();
            println!("-- {} ({lit} px)\n{}", p.label(), common::ascii(&out));
        }
    }
}
