//! Edge-proximity exclusion and block scoring for region-of-interest
//! selection.

use crate::edge::EdgeResult;
use crate::raster::{BinaryMask, Component, Rect};

/// Chebyshev distance transform: per-pixel distance to the nearest set pixel.
/// Two chamfer passes over the 8-neighborhood are exact for this metric.
pub(crate) fn chebyshev_distance(mask: &BinaryMask) -> Vec<u32> {
    let (w, h) = (mask.width(), mask.height());
    const INF: u32 = u32::MAX / 2;
    let mut dist = vec![INF; w * h];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                dist[y * w + x] = 0;
            }
        }
    }
    // Forward pass.
    for y in 0..h {
        for x in 0..w {
            let mut d = dist[y * w + x];
            if x > 0 {
                d = d.min(dist[y * w + x - 1] + 1);
            }
            if y > 0 {
                d = d.min(dist[(y - 1) * w + x] + 1);
                if x > 0 {
                    d = d.min(dist[(y - 1) * w + x - 1] + 1);
                }
                if x + 1 < w {
                    d = d.min(dist[(y - 1) * w + x + 1] + 1);
                }
            }
            dist[y * w + x] = d;
        }
    }
    // Backward pass.
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let mut d = dist[y * w + x];
            if x + 1 < w {
                d = d.min(dist[y * w + x + 1] + 1);
            }
            if y + 1 < h {
                d = d.min(dist[(y + 1) * w + x] + 1);
                if x > 0 {
                    d = d.min(dist[(y + 1) * w + x - 1] + 1);
                }
                if x + 1 < w {
                    d = d.min(dist[(y + 1) * w + x + 1] + 1);
                }
            }
            dist[y * w + x] = d;
        }
    }
    dist
}

/// Removes components whose centroid lies within Chebyshev distance `d` of
/// any muscle-edge pixel. Identity when no edge was found.
pub fn exclude_near_edge(objects: &[Component], edge: &EdgeResult, d: usize) -> Vec<Component> {
    if !edge.has_edge {
        return objects.to_vec();
    }
    let w = edge.muscle_edge.width();
    let dist = chebyshev_distance(&edge.muscle_edge);
    objects
        .iter()
        .filter(|c| {
            let cx = (c.centroid.0.round() as usize).min(w - 1);
            let cy = (c.centroid.1.round() as usize).min(edge.muscle_edge.height() - 1);
            dist[cy * w + cx] as usize > d
        })
        .cloned()
        .collect()
}

/// Per-block ROI decision grid.
#[derive(Debug, Clone)]
pub struct RoiGrid {
    pub block_size: usize,
    pub grid_w: usize,
    pub grid_h: usize,
    pub image_w: usize,
    pub image_h: usize,
    /// Row-major per-block scores.
    pub scores: Vec<f64>,
    pub in_roi: Vec<bool>,
}

impl RoiGrid {
    pub fn block_rect(&self, bx: usize, by: usize) -> Rect {
        let x = bx * self.block_size;
        let y = by * self.block_size;
        Rect::new(
            x,
            y,
            self.block_size.min(self.image_w - x),
            self.block_size.min(self.image_h - y),
        )
    }

    pub fn is_in_roi(&self, bx: usize, by: usize) -> bool {
        self.in_roi[by * self.grid_w + bx]
    }

    /// True when the block containing (x, y) is part of the ROI.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let bx = ((x.max(0.0) as usize) / self.block_size).min(self.grid_w - 1);
        let by = ((y.max(0.0) as usize) / self.block_size).min(self.grid_h - 1);
        self.is_in_roi(bx, by)
    }

    /// Renders the in/out decisions as a 0/1 text matrix, one row per line.
    pub fn to_text_matrix(&self) -> String {
        let mut out = String::new();
        for by in 0..self.grid_h {
            for bx in 0..self.grid_w {
                out.push(if self.is_in_roi(bx, by) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Scores every block: corner distance to the muscle edge (weight 0.5,
/// normalized by `d` and capped at 1), non-void fraction (0.3) and effective
/// object presence capped at 5 objects (0.2). A block joins the ROI when its
/// score reaches 0.5 and less than half of it is void.
pub fn score_blocks(
    image_w: usize,
    image_h: usize,
    edge: &EdgeResult,
    effective_objects: &[Component],
    block_size: usize,
    d: usize,
) -> RoiGrid {
    let grid_w = image_w.div_ceil(block_size);
    let grid_h = image_h.div_ceil(block_size);
    let dist = if edge.has_edge {
        Some(chebyshev_distance(&edge.muscle_edge))
    } else {
        None
    };

    let mut counts = vec![0usize; grid_w * grid_h];
    for c in effective_objects {
        let bx = ((c.centroid.0.max(0.0) as usize) / block_size).min(grid_w - 1);
        let by = ((c.centroid.1.max(0.0) as usize) / block_size).min(grid_h - 1);
        counts[by * grid_w + bx] += 1;
    }

    let mut scores = vec![0.0f64; grid_w * grid_h];
    let mut in_roi = vec![false; grid_w * grid_h];
    for by in 0..grid_h {
        for bx in 0..grid_w {
            let x0 = bx * block_size;
            let y0 = by * block_size;
            let x1 = (x0 + block_size).min(image_w) - 1;
            let y1 = (y0 + block_size).min(image_h) - 1;
            let c = match &dist {
                None => 1.0,
                Some(dist) => {
                    let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1)];
                    let min_d = corners
                        .iter()
                        .map(|&(x, y)| dist[y * image_w + x])
                        .min()
                        .unwrap() as f64;
                    (min_d / d as f64).min(1.0)
                }
            };
            let area = (x1 - x0 + 1) * (y1 - y0 + 1);
            let mut void_px = 0usize;
            if edge.empty_space.any() {
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        if edge.empty_space.get(x, y) {
                            void_px += 1;
                        }
                    }
                }
            }
            let v = void_px as f64 / area as f64;
            let n = (counts[by * grid_w + bx] as f64 / 5.0).min(1.0);
            let score = 0.5 * c + 0.3 * (1.0 - v) + 0.2 * n;
            scores[by * grid_w + bx] = score;
            in_roi[by * grid_w + bx] = score >= 0.5 && v < 0.5;
        }
    }

    RoiGrid {
        block_size,
        grid_w,
        grid_h,
        image_w,
        image_h,
        scores,
        in_roi,
    }
}
