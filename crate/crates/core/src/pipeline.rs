//! End-to-end analysis: pre-process, segment, detect the muscle edge, pick
//! the ROI and quantify — per image and over whole directories.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::edge::{merge_detectors, EdgeResult};
use crate::error::{Error, Result};
use crate::imgproc::components::{connected_components, Connectivity};
use crate::imgproc::stats::{detect_bubbles, fill_artifacts, global_mean};
use crate::io::{atomic_write, is_image_path, load_image, save_mask_png};
use crate::quantify::{assemble_report, classify_objects, CellObject, QuantReport};
use crate::raster::{BinaryMask, Component, GrayImage};
use crate::report::{report_json, reports_csv};
use crate::roi::{exclude_near_edge, score_blocks, RoiGrid};
use crate::threshold::{segment_image, ThresholdOutcome};

/// Smallest image side on which the texture detector can run; edge
/// detection is skipped below it.
const MIN_EDGE_DIM: usize = 400;

/// Everything produced for one image: the report plus the intermediate
/// rasters wanted for debugging.
pub struct ImageAnalysis {
    pub report: QuantReport,
    pub mask: BinaryMask,
    pub edge: EdgeResult,
    pub roi: RoiGrid,
    pub outcomes: Vec<ThresholdOutcome>,
}

/// Runs the full pipeline on one decoded image.
pub fn analyze_image(img: &GrayImage, image_id: &str, cfg: &RunConfig) -> Result<ImageAnalysis> {
    cfg.validate()?;
    let (w, h) = (img.width(), img.height());

    let bubbles = detect_bubbles(img, cfg.bubble_min_intensity, cfg.bubble_min_area);
    let cleaned;
    let img = if bubbles.any() {
        cleaned = fill_artifacts(img, &bubbles, global_mean(img))?;
        &cleaned
    } else {
        img
    };

    let (mask, outcomes) = segment_image(img, &cfg.li_otsu, cfg.segment_block)?;
    let edge = if w >= MIN_EDGE_DIM && h >= MIN_EDGE_DIM {
        merge_detectors(img, &cfg.edge)?
    } else {
        EdgeResult::none(w, h)
    };

    let components = connected_components(&mask, Connectivity::Eight);
    let kept = exclude_near_edge(&components, &edge, cfg.edge.edge_exclusion_d);
    let cells = classify_objects(&kept, &cfg.quantify);
    let effective: Vec<Component> = cells.iter().map(|c| c.component.clone()).collect();
    let roi = score_blocks(w, h, &edge, &effective, cfg.roi_block, cfg.edge.edge_exclusion_d);
    let in_roi: Vec<CellObject> = cells
        .into_iter()
        .filter(|c| roi.contains_point(c.component.centroid.0, c.component.centroid.1))
        .collect();
    let report = assemble_report(image_id, &in_roi, &roi, &outcomes, &cfg.quantify)?;

    Ok(ImageAnalysis {
        report,
        mask,
        edge,
        roi,
        outcomes,
    })
}

/// One failed input in a batch.
pub struct ImageFailure {
    pub path: PathBuf,
    pub error: Error,
}

pub struct BatchOutcome {
    pub reports: Vec<QuantReport>,
    pub failures: Vec<ImageFailure>,
}

/// Image files directly inside `dir`, sorted by path.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Read {
            path: dir.to_path_buf(),
            source: Box::new(e),
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| is_image_path(p))
        .collect();
    paths.sort();
    Ok(paths)
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

fn emit(analysis: &ImageAnalysis, out_dir: &Path, cfg: &RunConfig) -> Result<()> {
    let id = &analysis.report.image_id;
    atomic_write(
        &out_dir.join(format!("{id}.json")),
        report_json(&analysis.report)?.as_bytes(),
    )?;
    if cfg.debug_masks {
        save_mask_png(&analysis.mask, &out_dir.join(format!("{id}.cells.png")))?;
        save_mask_png(
            &analysis.edge.empty_space,
            &out_dir.join(format!("{id}.empty_space.png")),
        )?;
        save_mask_png(
            &analysis.edge.muscle_edge,
            &out_dir.join(format!("{id}.muscle_edge.png")),
        )?;
        atomic_write(
            &out_dir.join(format!("{id}.roi.txt")),
            analysis.roi.to_text_matrix().as_bytes(),
        )?;
    }
    Ok(())
}

/// Analyzes every image in `input_dir`, writing one JSON per image plus the
/// aggregate CSV (rows in input-path order). Failed images are recorded and
/// skipped; the rest still emit.
pub fn analyze_batch(input_dir: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<BatchOutcome> {
    cfg.validate()?;
    let paths = list_images(input_dir)?;
    std::fs::create_dir_all(out_dir)?;

    let results: Vec<(PathBuf, Result<ImageAnalysis>)> = paths
        .par_iter()
        .map(|path| {
            let run = load_image(path)
                .and_then(|img| analyze_image(&img, &image_id(path), cfg))
                .and_then(|analysis| {
                    emit(&analysis, out_dir, cfg)?;
                    Ok(analysis)
                });
            (path.clone(), run)
        })
        .collect();

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (path, result) in results {
        match result {
            Ok(analysis) => reports.push(analysis.report),
            Err(error) => failures.push(ImageFailure { path, error }),
        }
    }
    let csv = reports_csv(&reports.iter().collect::<Vec<_>>())?;
    atomic_write(&out_dir.join("summary.csv"), csv.as_bytes())?;
    Ok(BatchOutcome { reports, failures })
}
