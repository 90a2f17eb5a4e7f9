//! Global threshold selection (Otsu, Kapur max-entropy, Yen) and the
//! localized iterative Otsu refinement applied per block.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::components::{connected_components, Connectivity};
use crate::raster::{apply_threshold, BinaryMask, GrayImage, Histogram256, Polarity, Rect};

/// Parameters of the localized iterative Otsu search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiOtsuConfig {
    /// Expected foreground ratio bound, in (0, 1).
    pub expected_foreground_ratio: f64,
    /// Expected object maximum count per block.
    pub max_object_count: usize,
    /// Threshold decay per iteration, in (0.8, 1).
    pub step: f64,
    /// Minimum threshold intensity the iteration may reach.
    pub t_floor: u8,
    pub max_iters: usize,
    /// Objects below this area are ignored when counting (noise floor).
    pub min_object_area: usize,
}

impl Default for LiOtsuConfig {
    fn default() -> Self {
        Self {
            expected_foreground_ratio: 0.10,
            max_object_count: 200,
            step: 0.90,
            t_floor: 10,
            max_iters: 50,
            min_object_area: 4,
        }
    }
}

impl LiOtsuConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.expected_foreground_ratio > 0.0 && self.expected_foreground_ratio < 1.0) {
            return Err(Error::InvalidConfig(
                "expected foreground ratio must be in (0, 1)".into(),
            ));
        }
        if !(self.step > 0.8 && self.step < 1.0) {
            return Err(Error::InvalidConfig("step must satisfy 0.8 < S < 1".into()));
        }
        if self.max_object_count == 0 {
            return Err(Error::InvalidConfig("max object count must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max iterations must be >= 1".into()));
        }
        if self.min_object_area == 0 {
            return Err(Error::InvalidConfig("min object area must be >= 1".into()));
        }
        Ok(())
    }
}

/// Result of the iterative threshold search on one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutcome {
    pub t: u8,
    pub iterations: usize,
    pub foreground_ratio: f64,
    pub object_count: usize,
    pub converged: bool,
}

fn require_nonempty(hist: &Histogram256) -> Result<()> {
    if hist.total() == 0 {
        return Err(Error::InvalidInput("empty histogram".into()));
    }
    Ok(())
}

/// Otsu's threshold: minimizes the within-class variance
/// w0*var0 + w1*var1 over splits {<=t} / {>t}. Ties break to the smallest t.
pub fn otsu_threshold(hist: &Histogram256) -> Result<u8> {
    require_nonempty(hist)?;
    if let Some(level) = hist.single_level() {
        return Ok(level);
    }
    let counts = hist.counts();
    let total = hist.total() as f64;
    let mut best_t = 0u8;
    let mut best = f64::INFINITY;
    let mut w0 = 0.0f64;
    let mut s0 = 0.0f64; // sum of i * n_i in class 0
    let mut q0 = 0.0f64; // sum of i^2 * n_i in class 0
    let (sum_all, sq_all) = counts.iter().enumerate().fold((0.0, 0.0), |(s, q), (i, &c)| {
        (s + (i as u64 * c) as f64, q + ((i * i) as u64 * c) as f64)
    });
    for t in 0..256usize {
        let c = counts[t] as f64;
        w0 += c;
        s0 += t as f64 * c;
        q0 += (t * t) as f64 * c;
        let w1 = total - w0;
        let wcv = if w0 == 0.0 {
            let mean1 = (sum_all - s0) / w1;
            (sq_all - q0) / w1 - mean1 * mean1
        } else if w1 == 0.0 {
            let mean0 = s0 / w0;
            q0 / w0 - mean0 * mean0
        } else {
            let mean0 = s0 / w0;
            let var0 = q0 / w0 - mean0 * mean0;
            let mean1 = (sum_all - s0) / w1;
            let var1 = (sq_all - q0) / w1 - mean1 * mean1;
            (w0 / total) * var0 + (w1 / total) * var1
        };
        if wcv < best {
            best = wcv;
            best_t = t as u8;
        }
    }
    Ok(best_t)
}

/// Kapur's maximum-entropy threshold: maximizes the sum of background and
/// foreground entropies over splits with both classes populated.
pub fn max_entropy_threshold(hist: &Histogram256) -> Result<u8> {
    require_nonempty(hist)?;
    if let Some(level) = hist.single_level() {
        return Ok(level);
    }
    let counts = hist.counts();
    let total = hist.total() as f64;
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let mut best_t = 0u8;
    let mut best = f64::NEG_INFINITY;
    let mut found = false;
    let mut w0 = 0.0f64;
    let mut ent0 = 0.0f64; // accumulated -sum p ln p over class 0
    let full_ent: f64 = p.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum();
    for t in 0..256usize {
        if p[t] > 0.0 {
            w0 += p[t];
            ent0 += -p[t] * p[t].ln();
        }
        let w1 = 1.0 - w0;
        if w0 <= 0.0 || w1 <= 0.0 {
            continue;
        }
        let h0 = ent0 / w0 + w0.ln();
        let ent1 = full_ent - ent0;
        let h1 = ent1 / w1 + w1.ln();
        let crit = h0 + h1;
        if crit > best {
            best = crit;
            best_t = t as u8;
            found = true;
        }
    }
    if !found {
        // No valid split (cannot happen with >= 2 populated levels).
        return Err(Error::InvalidInput("no valid entropy split".into()));
    }
    Ok(best_t)
}

/// Yen's maximum-correlation threshold.
pub fn yen_threshold(hist: &Histogram256) -> Result<u8> {
    require_nonempty(hist)?;
    if let Some(level) = hist.single_level() {
        return Ok(level);
    }
    let counts = hist.counts();
    let total = hist.total() as f64;
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let sq_total: f64 = p.iter().map(|&v| v * v).sum();
    let mut best_t = 0u8;
    let mut best = f64::NEG_INFINITY;
    let mut found = false;
    let mut w0 = 0.0f64;
    let mut sq0 = 0.0f64;
    for t in 0..256usize {
        w0 += p[t];
        sq0 += p[t] * p[t];
        let w1 = 1.0 - w0;
        let sq1 = sq_total - sq0;
        if w0 <= 0.0 || w1 <= 0.0 || sq0 <= 0.0 || sq1 <= 0.0 {
            continue;
        }
        let crit = 2.0 * (w0 * w1).ln() - (sq0 * sq1).ln();
        if crit > best {
            best = crit;
            best_t = t as u8;
            found = true;
        }
    }
    if !found {
        return Err(Error::InvalidInput("no valid correlation split".into()));
    }
    Ok(best_t)
}

fn dark_foreground_stats(block: &GrayImage, t: u8, min_object_area: usize) -> (f64, usize, BinaryMask) {
    let mask = apply_threshold(block, t, Polarity::DarkForeground);
    let ratio = mask.count_ones() as f64 / (block.width() * block.height()) as f64;
    let objects = connected_components(&mask, Connectivity::Eight)
        .into_iter()
        .filter(|c| c.area >= min_object_area)
        .count();
    (ratio, objects, mask)
}

/// Localized iterative Otsu on a single block: start from the Otsu
/// threshold and decay it by the step factor until both the dark-foreground
/// ratio and the object count fall under the configured bounds.
pub fn li_otsu(block: &GrayImage, cfg: &LiOtsuConfig) -> Result<ThresholdOutcome> {
    cfg.validate()?;
    let mut t = otsu_threshold(&block.histogram())?;
    let mut iterations = 0usize;
    loop {
        let (ratio, objects, _) = dark_foreground_stats(block, t, cfg.min_object_area);
        if ratio < cfg.expected_foreground_ratio && objects < cfg.max_object_count {
            return Ok(ThresholdOutcome {
                t,
                iterations,
                foreground_ratio: ratio,
                object_count: objects,
                converged: true,
            });
        }
        if t <= cfg.t_floor || iterations >= cfg.max_iters {
            return Ok(ThresholdOutcome {
                t,
                iterations,
                foreground_ratio: ratio,
                object_count: objects,
                converged: false,
            });
        }
        t = (cfg.step * t as f64).floor() as u8;
        iterations += 1;
    }
}

/// Tiles the image into `block_size` squares (right/bottom remainders kept at
/// their natural size), thresholds each block independently with [`li_otsu`]
/// and stitches the per-block dark masks back together.
pub fn segment_image(
    img: &GrayImage,
    cfg: &LiOtsuConfig,
    block_size: usize,
) -> Result<(BinaryMask, Vec<ThresholdOutcome>)> {
    cfg.validate()?;
    if block_size < 64 {
        return Err(Error::InvalidConfig("block size must be >= 64".into()));
    }
    let (w, h) = (img.width(), img.height());
    let mut rects = Vec::new();
    let mut y = 0;
    while y < h {
        let bh = block_size.min(h - y);
        let mut x = 0;
        while x < w {
            let bw = block_size.min(w - x);
            rects.push(Rect::new(x, y, bw, bh));
            x += bw;
        }
        y += bh;
    }

    let results: Vec<(Rect, ThresholdOutcome, BinaryMask)> = rects
        .into_par_iter()
        .map(|rect| {
            let block = img.crop(rect)?;
            let outcome = li_otsu(&block, cfg)?;
            let mask = apply_threshold(&block, outcome.t, Polarity::DarkForeground);
            Ok((rect, outcome, mask))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut stitched = BinaryMask::empty(w, h);
    let mut outcomes = Vec::with_capacity(results.len());
    for (rect, outcome, mask) in results {
        for by in 0..rect.h {
            for bx in 0..rect.w {
                if mask.get(bx, by) {
                    stitched.set(rect.x + bx, rect.y + by, true);
                }
            }
        }
        outcomes.push(outcome);
    }
    Ok((stitched, outcomes))
}
