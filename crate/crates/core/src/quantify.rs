//! Object classification, cluster population estimation and block-based
//! density features for one image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Component, Rect};
use crate::roi::RoiGrid;
use crate::threshold::ThresholdOutcome;

/// Number of density-histogram bins: eight count ranges plus overflow.
pub const N_BINS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Discrete,
    Cluster,
}

/// A segmented object kept after debris removal.
#[derive(Debug, Clone)]
pub struct CellObject {
    pub component: Component,
    pub kind: CellKind,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuantifyParams {
    /// Nominal cell area, used as the fallback expected size.
    pub avg_cell_size: f64,
    /// Objects larger than `cluster_factor * avg_cell_size` are clusters.
    pub cluster_factor: f64,
    /// Objects below this area are debris and dropped.
    pub min_cell_area: usize,
    /// Side of the square analysis blocks.
    pub analysis_block: usize,
    /// Width of each density-histogram bin.
    pub bin_width: u32,
}

impl Default for QuantifyParams {
    fn default() -> Self {
        Self {
            avg_cell_size: 500.0,
            cluster_factor: 2.0,
            min_cell_area: 25,
            analysis_block: 400,
            bin_width: 20,
        }
    }
}

impl QuantifyParams {
    pub fn validate(&self) -> Result<()> {
        if self.avg_cell_size <= 0.0
            || self.cluster_factor <= 0.0
            || self.analysis_block == 0
            || self.bin_width == 0
        {
            return Err(Error::InvalidConfig(
                "avg_cell_size, cluster_factor, analysis_block and bin_width must be positive"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Density histogram over eligible analysis blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockHistogram {
    /// Blocks per count bin; the last bin collects everything above the
    /// covered range.
    pub counts: [u64; N_BINS],
    /// Visualization scaling of `counts`: log10(10 * count + 1).
    pub log_values: [f64; N_BINS],
}

/// Per-image quantification output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReport {
    pub image_id: String,
    pub n_discrete: usize,
    pub n_clusters: usize,
    /// 0 when no discrete cells exist.
    pub mean_discrete_size: f64,
    pub total_cluster_area: u64,
    pub n_cells_in_clusters: f64,
    pub n_total: f64,
    pub per_block_counts: Vec<u32>,
    pub histogram: BlockHistogram,
    pub converged_blocks: usize,
}

/// Splits objects into discrete cells and clusters by area; debris below the
/// minimum cell area is dropped.
pub fn classify_objects(objects: &[Component], params: &QuantifyParams) -> Vec<CellObject> {
    let cluster_floor = params.cluster_factor * params.avg_cell_size;
    objects
        .iter()
        .filter(|c| c.area >= params.min_cell_area)
        .map(|c| CellObject {
            kind: if c.area as f64 > cluster_floor {
                CellKind::Cluster
            } else {
                CellKind::Discrete
            },
            component: c.clone(),
        })
        .collect()
}

/// Arithmetic mean area of the discrete cells; 0 when there are none.
pub fn mean_discrete_size(cells: &[CellObject]) -> f64 {
    let areas: Vec<f64> = cells
        .iter()
        .filter(|c| c.kind == CellKind::Discrete)
        .map(|c| c.component.area as f64)
        .collect();
    if areas.is_empty() {
        0.0
    } else {
        areas.iter().sum::<f64>() / areas.len() as f64
    }
}

/// Estimated cell count inside clusters: cluster area over the expected size
/// of one cell, reported to 2 decimals.
pub fn cells_in_clusters(total_cluster_area: f64, expected_size: f64) -> Result<f64> {
    if expected_size <= 0.0 {
        return Err(Error::InvalidInput("expected_size must be positive".into()));
    }
    Ok(round2(total_cluster_area / expected_size))
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Expected area of one cell for this image: its own mean discrete size when
/// available, else the configured nominal size.
pub fn expected_size(cells: &[CellObject], params: &QuantifyParams) -> f64 {
    let m = mean_discrete_size(cells);
    if m > 0.0 {
        m
    } else {
        params.avg_cell_size
    }
}

/// Analysis blocks covered at least half by in-ROI blocks, in row-major
/// order.
pub(crate) fn eligible_blocks(roi: &RoiGrid, analysis_block: usize) -> Vec<Rect> {
    let (w, h) = (roi.image_w, roi.image_h);
    let mut out = Vec::new();
    for by in 0..h.div_ceil(analysis_block) {
        for bx in 0..w.div_ceil(analysis_block) {
            let x = bx * analysis_block;
            let y = by * analysis_block;
            let rect = Rect::new(x, y, analysis_block.min(w - x), analysis_block.min(h - y));
            let mut covered = 0usize;
            for ry in 0..roi.grid_h {
                for rx in 0..roi.grid_w {
                    if roi.is_in_roi(rx, ry) {
                        covered += rect.intersection_area(&roi.block_rect(rx, ry));
                    }
                }
            }
            if 2 * covered >= rect.area() {
                out.push(rect);
            }
        }
    }
    out
}

fn cluster_area_in(cell: &CellObject, rect: &Rect) -> usize {
    cell.component
        .pixels
        .iter()
        .filter(|&&(x, y)| rect.contains(x as usize, y as usize))
        .count()
}

/// WBC count per eligible analysis block: discrete cells by centroid,
/// clusters by the area share falling inside the block.
pub fn per_block_counts(
    cells: &[CellObject],
    roi: &RoiGrid,
    analysis_block: usize,
    expected: f64,
) -> Vec<u32> {
    eligible_blocks(roi, analysis_block)
        .iter()
        .map(|rect| {
            let discrete = cells
                .iter()
                .filter(|c| c.kind == CellKind::Discrete)
                .filter(|c| rect.contains_f(c.component.centroid.0, c.component.centroid.1))
                .count() as u32;
            let cluster_area: usize = cells
                .iter()
                .filter(|c| c.kind == CellKind::Cluster)
                .map(|c| cluster_area_in(c, rect))
                .sum();
            discrete + (cluster_area as f64 / expected).round() as u32
        })
        .collect()
}

/// Bins block counts into eight `bin_width`-wide ranges plus an overflow
/// bin, with the log scaling used for display.
pub fn build_histogram(counts: &[u32], bin_width: u32) -> BlockHistogram {
    let mut bins = [0u64; N_BINS];
    for &c in counts {
        let idx = if c <= bin_width {
            0
        } else {
            (((c - 1) / bin_width) as usize).min(N_BINS - 1)
        };
        bins[idx] += 1;
    }
    let log_values = bins.map(|c| ((10 * c + 1) as f64).log10());
    BlockHistogram {
        counts: bins,
        log_values,
    }
}

/// Builds the full per-image report from classified objects, the ROI grid
/// and the per-block threshold outcomes.
pub fn assemble_report(
    image_id: &str,
    cells: &[CellObject],
    roi: &RoiGrid,
    outcomes: &[ThresholdOutcome],
    params: &QuantifyParams,
) -> Result<QuantReport> {
    params.validate()?;
    let n_discrete = cells.iter().filter(|c| c.kind == CellKind::Discrete).count();
    let clusters: Vec<_> = cells.iter().filter(|c| c.kind == CellKind::Cluster).collect();
    let total_cluster_area: u64 = clusters.iter().map(|c| c.component.area as u64).sum();
    let mean_size = mean_discrete_size(cells);
    let expected = expected_size(cells, params);
    let n_cic = cells_in_clusters(total_cluster_area as f64, expected)?;
    let block_counts = per_block_counts(cells, roi, params.analysis_block, expected);
    let histogram = build_histogram(&block_counts, params.bin_width);
    Ok(QuantReport {
        image_id: image_id.to_string(),
        n_discrete,
        n_clusters: clusters.len(),
        mean_discrete_size: mean_size,
        total_cluster_area,
        n_cells_in_clusters: n_cic,
        n_total: n_discrete as f64 + n_cic,
        per_block_counts: block_counts,
        histogram,
        converged_blocks: outcomes.iter().filter(|o| o.converged).count(),
    })
}
