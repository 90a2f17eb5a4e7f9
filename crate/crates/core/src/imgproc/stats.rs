//! Intensity statistics and artifact correction.

use crate::error::Result;
use crate::imgproc::components::{connected_components, Connectivity};
use crate::raster::{apply_threshold, round_u8, BinaryMask, GrayImage, Polarity, Rect};
use crate::Error;

/// Mean intensity over the whole image.
pub fn global_mean(img: &GrayImage) -> f64 {
    let sum: u64 = img.pixels().iter().map(|&p| p as u64).sum();
    sum as f64 / img.pixels().len() as f64
}

/// Population standard deviation over a rectangular block.
pub fn local_std(img: &GrayImage, block: Rect) -> Result<f64> {
    block.check_within(img.width(), img.height())?;
    let n = block.area() as f64;
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for y in block.y..block.y + block.h {
        for x in block.x..block.x + block.w {
            let v = img.get(x, y) as f64;
            sum += v;
            sum_sq += v * v;
        }
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(var.sqrt())
}

/// Replaces masked pixels by the (rounded) fill intensity.
pub fn fill_artifacts(img: &GrayImage, artifact_mask: &BinaryMask, fill: f64) -> Result<GrayImage> {
    if artifact_mask.width() != img.width() || artifact_mask.height() != img.height() {
        return Err(Error::InvalidInput(format!(
            "mask dimensions {}x{} do not match image {}x{}",
            artifact_mask.width(),
            artifact_mask.height(),
            img.width(),
            img.height()
        )));
    }
    let v = round_u8(fill);
    let mut out = img.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if artifact_mask.get(x, y) {
                out.set(x, y, v);
            }
        }
    }
    Ok(out)
}

/// Detects air bubbles as large near-saturated connected regions.
///
/// A region qualifies when every pixel is at least `min_intensity` and its
/// area reaches `min_area`.
pub fn detect_bubbles(img: &GrayImage, min_intensity: u8, min_area: usize) -> BinaryMask {
    let saturated = apply_threshold(img, min_intensity.saturating_sub(1), Polarity::BrightForeground);
    let mut out = BinaryMask::empty(img.width(), img.height());
    for comp in connected_components(&saturated, Connectivity::Eight) {
        if comp.area >= min_area {
            for &(x, y) in &comp.pixels {
                out.set(x as usize, y as usize, true);
            }
        }
    }
    out
}
