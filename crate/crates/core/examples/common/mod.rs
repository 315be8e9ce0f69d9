//! Synthetic glyphs shared by the examples, so they run without a download.

#![allow(dead_code)]

use xrec::ingest::{Dataset, Image, ImageSample, SIDE};

/// A small three-class set: vertical bar ("1"), ring ("0"), plus ("4"),
/// jittered by a horizontal shift and a thickness change.
pub fn glyph_dataset(n: usize) -> Dataset {
    let names: Vec<String> = (0..10).map(|d| d.to_string()).collect();
    let samples = (0..n)
        .map(|i| {
            let label = [1, 0, 4][i % 3];
            ImageSample {
                pixels: glyph(label, (i / 3 % 5) as i64 - 2, 1 + (i / 15 % 2) as i64),
                label,
            }
        })
        .collect();
    Dataset::new(samples, names).expect("ten classes")
}

pub fn glyph(label: usize, shift: i64, half_width: i64) -> Image {
    let mut img = Image::zeros();
    for r in 0..SIDE as i64 {
        for c in 0..SIDE as i64 {
            let (y, x) = (r - 14, c - 14 - shift);
            let on = match label {
                1 => x.abs() <= half_width && y.abs() <= 9,
                0 => {
                    let rho = ((x * x) as f64 / 36.0 + (y * y) as f64 / 81.0).sqrt();
                    (rho - 1.0).abs() * 7.0 <= half_width as f64 + 0.5
                }
                _ => (x.abs() <= half_width && y.abs() <= 9) || (y.abs() <= half_width && x.abs() <= 8),
            };
            if on {
                img.set(r as usize, c as usize, 230);
            }
        }
    }
    img
}

/// Two-level ASCII rendering.
pub fn ascii(img: &Image) -> String {
    let mut out = String::new();
    for r in 0..SIDE {
        for c in 0..SIDE {
            out.push(match img.get(r, c) {
                0 => '.',
                1..=127 => '+',
                _ => '#',
            });
        }
        out.push('\n');
    }
    out
}
