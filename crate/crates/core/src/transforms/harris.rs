//! Harris corner response on 28x28 intensity images.

use crate::ingest::{Image, PIXELS, SIDE};

const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];
const GAUSS_3X3: [[f64; 3]; 3] = [
    [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0],
    [2.0 / 16.0, 4.0 / 16.0, 2.0 / 16.0],
    [1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0],
];

#[inline]
fn clamp_index(i: isize) -> usize {
    i.clamp(0, SIDE as isize - 1) as usize
}

/// 3x3 correlation with replicated borders.
fn correlate(values: &[f64], kernel: &[[f64; 3]; 3]) -> Vec<f64> {
    let mut out = vec![0.0; PIXELS];
    for r in 0..SIDE {
        for c in 0..SIDE {
            let mut acc = 0.0;
            for (kr, row) in kernel.iter().enumerate() {
                let rr = clamp_index(r as isize + kr as isize - 1);
                for (kc, w) in row.iter().enumerate() {
                    let cc = clamp_index(c as isize + kc as isize - 1);
                    acc += w * values[rr * SIDE + cc];
                }
            }
            out[r * SIDE + c] = acc;
        }
    }
    out
}

/// `R = det(M) - k * trace(M)^2` per pixel, where `M` is the Gaussian-weighted
/// structure tensor of Sobel gradients. Intensities are scaled to `[0, 1]`.
pub fn harris_response(image: &Image, k: f64) -> Vec<f64> {
    let values: Vec<f64> = image.0.iter().map(|&p| p as f64 / 255.0).collect();
    let gx = correlate(&values, &SOBEL_X);
    let gy = correlate(&values, &SOBEL_Y);
    let xx: Vec<f64> = gx.iter().map(|g| g * g).collect();
    let yy: Vec<f64> = gy.iter().map(|g| g * g).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let (sxx, syy, sxy) = (
        correlate(&xx, &GAUSS_3X3),
        correlate(&yy, &GAUSS_3X3),
        correlate(&xy, &GAUSS_3X3),
    );
    (0..PIXELS)
        .map(|i| {
            let det = sxx[i] * syy[i] - sxy[i] * sxy[i];
            let trace = sxx[i] + syy[i];
            det - k * trace * trace
        })
        .collect()
}

/// Keeps responses at or above `relative_threshold * max(R)`, scaled so the
/// strongest corner is 255 and every kept pixel is at least 1.
pub fn corner_map(image: &Image, k: f64, relative_threshold: f64) -> Image {
    let response = harris_response(image, k);
    let max = response.iter().copied().fold(0.0_f64, f64::max);
    let mut out = Image::zeros();
    if max <= 0.0 {
        return out;
    }
    let cut = relative_threshold * max;
    for (o, &r) in out.0.iter_mut().zip(&response) {
        if r >= cut && r > 0.0 {
            *o = ((255.0 * r / max).round() as u8).max(1);
        }
    }
    out
}
