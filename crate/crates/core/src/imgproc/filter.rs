//! Linear filtering and histogram equalization.

use crate::error::{Error, Result};
use crate::raster::{round_u8, GrayImage};

/// Mean filter over a `size`x`size` window with edge replication.
///
/// Even sizes center the window with the extra column/row on the
/// right/bottom (a 16x16 window spans offsets -7..=8).
pub fn box_filter(img: &GrayImage, size: usize) -> Result<GrayImage> {
    if size == 0 {
        return Err(Error::InvalidInput("kernel size must be >= 1".into()));
    }
    if size > img.width().min(img.height()) {
        return Err(Error::InvalidInput(format!(
            "kernel size {} exceeds image dimensions {}x{}",
            size,
            img.width(),
            img.height()
        )));
    }
    let (w, h) = (img.width(), img.height());
    let left = (size - 1) / 2;
    let right = size - 1 - left;
    // Horizontal pass, then vertical; replication clamps per axis, so the
    // separated sums equal the full window sum exactly.
    let mut horiz = vec![0u32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u32;
            for dx in -(left as isize)..=right as isize {
                s += img.get_replicated(x as isize + dx, y as isize) as u32;
            }
            horiz[y * w + x] = s;
        }
    }
    let n = (size * size) as f64;
    let mut out = GrayImage::filled(w, h, 0);
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u64;
            for dy in -(left as isize)..=right as isize {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                s += horiz[yy * w + x] as u64;
            }
            out.set(x, y, round_u8(s as f64 / n));
        }
    }
    Ok(out)
}

/// One-sided Gaussian weights with radius ceil(3*sigma), normalized so the
/// full symmetric kernel sums to 1.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k[0] + 2.0 * k[1..].iter().sum::<f64>();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Separable Gaussian smoothing kept in f64; rounding happens once at the end
/// of [`gaussian_filter`].
pub(crate) fn gaussian_smooth_f64(img: &GrayImage, sigma: f64) -> Vec<f64> {
    let kernel = gaussian_kernel(sigma);
    let (w, h) = (img.width(), img.height());
    let mut horiz = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = kernel[0] * img.get(x, y) as f64;
            for (i, &k) in kernel.iter().enumerate().skip(1) {
                let a = img.get_replicated(x as isize - i as isize, y as isize) as f64;
                let b = img.get_replicated(x as isize + i as isize, y as isize) as f64;
                s += k * (a + b);
            }
            horiz[y * w + x] = s;
        }
    }
    let sample = |x: usize, y: isize| -> f64 {
        let y = y.clamp(0, h as isize - 1) as usize;
        horiz[y * w + x]
    };
    let mut out = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = kernel[0] * sample(x, y as isize);
            for (i, &k) in kernel.iter().enumerate().skip(1) {
                s += k * (sample(x, y as isize - i as isize) + sample(x, y as isize + i as isize));
            }
            out[y * w + x] = s;
        }
    }
    out
}

/// Gaussian smoothing with edge replication, rounded back to 8 bits.
pub fn gaussian_filter(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if sigma <= 0.0 {
        return Err(Error::InvalidInput("sigma must be positive".into()));
    }
    let smoothed = gaussian_smooth_f64(img, sigma);
    let mut out = GrayImage::filled(img.width(), img.height(), 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.set(x, y, round_u8(smoothed[y * img.width() + x]));
        }
    }
    Ok(out)
}

/// High-pass sharpening residual: clamp(round(k * (img - gaussian(img)))).
pub fn unsharp(img: &GrayImage, sigma: f64, k: f64) -> Result<GrayImage> {
    if k <= 0.0 {
        return Err(Error::InvalidInput("gain must be positive".into()));
    }
    let blurred = gaussian_filter(img, sigma)?;
    let mut out = GrayImage::filled(img.width(), img.height(), 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let diff = img.get(x, y) as f64 - blurred.get(x, y) as f64;
            out.set(x, y, round_u8(k * diff));
        }
    }
    Ok(out)
}

/// Histogram equalization: p -> floor(255 * CDF(p)) from the image's own
/// histogram.
pub fn hist_equalize(img: &GrayImage) -> GrayImage {
    let hist = img.histogram();
    let total = hist.total() as f64;
    let mut lut = [0u8; 256];
    let mut cum = 0u64;
    for (i, &c) in hist.counts().iter().enumerate() {
        cum += c;
        lut[i] = (255.0 * cum as f64 / total).floor() as u8;
    }
    let mut out = GrayImage::filled(img.width(), img.height(), 0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            out.set(x, y, lut[img.get(x, y) as usize]);
        }
    }
    out
}
