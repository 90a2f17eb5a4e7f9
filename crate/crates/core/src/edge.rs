//! Muscle edge detection: the texture detector, the fuzzy WBC detector, and
//! their combination into an empty-space mask plus edge contour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::canny::canny;
use crate::imgproc::components::{connected_components, fill_holes, Connectivity};
use crate::imgproc::filter::{box_filter, gaussian_filter, hist_equalize, unsharp};
use crate::imgproc::morph::{morph_close, MorphOrder};
use crate::imgproc::stats::global_mean;
use crate::raster::{
    apply_threshold, BinaryMask, Component, GrayImage, Polarity, SeShape, StructuringElement,
};
use crate::threshold::otsu_threshold;

/// How the two detector outputs combine before refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Either detector may contribute; fuzzy detection recovers regions the
    /// texture detector misses under dense WBC cover.
    Union,
    /// Keep only areas both detectors agree on.
    Intersection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDetectorParams {
    /// Side of the averaging kernel that suppresses cells before texture
    /// analysis.
    pub avg_kernel: usize,
    /// Gain of the sharpening residual.
    pub sharpen_gain: f64,
    pub gauss_sigma: f64,
    /// Fuzzy threshold coefficient; the fuzzy cut sits at k1 * mean.
    pub k1: f64,
    /// Side of the corner acceptance windows.
    pub corner_window: usize,
    /// Minimum candidate area for the texture detector.
    pub min_area_texture: usize,
    /// Minimum candidate area after combining detectors.
    pub min_area_final: usize,
    /// Exclusion distance around the muscle edge.
    pub edge_exclusion_d: usize,
    pub se_shape: SeShape,
    pub se_radius: usize,
    pub morph_order: MorphOrder,
    pub merge_mode: MergeMode,
    /// Restrict the corner filter to the four corner windows only; by default
    /// components touching any image border are also accepted.
    pub strict_corners: bool,
    pub canny_low: f64,
    pub canny_high: f64,
}

impl Default for EdgeDetectorParams {
    fn default() -> Self {
        Self {
            avg_kernel: 16,
            sharpen_gain: 1.5,
            gauss_sigma: 2.0,
            k1: 0.9,
            corner_window: 20,
            min_area_texture: 60_000,
            min_area_final: 50_000,
            edge_exclusion_d: 200,
            se_shape: SeShape::Square,
            se_radius: 5,
            morph_order: MorphOrder::ErodeDilate,
            merge_mode: MergeMode::Union,
            strict_corners: false,
            canny_low: 50.0,
            canny_high: 150.0,
        }
    }
}

impl EdgeDetectorParams {
    pub fn validate(&self) -> Result<()> {
        if self.avg_kernel == 0 || self.corner_window == 0 || self.se_radius == 0 {
            return Err(Error::InvalidConfig(
                "kernel, corner window and SE radius must be positive".into(),
            ));
        }
        if self.sharpen_gain <= 0.0 || self.gauss_sigma <= 0.0 || self.k1 <= 0.0 {
            return Err(Error::InvalidConfig(
                "gains, sigma and k1 must be positive".into(),
            ));
        }
        if !(0.0 <= self.canny_low && self.canny_low < self.canny_high) {
            return Err(Error::InvalidConfig(
                "canny thresholds must satisfy 0 <= low < high".into(),
            ));
        }
        Ok(())
    }

    fn se(&self) -> StructuringElement {
        StructuringElement {
            shape: self.se_shape,
            radius: self.se_radius,
        }
    }
}

/// Output of muscle edge detection.
#[derive(Debug, Clone)]
pub struct EdgeResult {
    /// Void (non-muscle) area.
    pub empty_space: BinaryMask,
    /// Canny contour of the void boundary.
    pub muscle_edge: BinaryMask,
    pub has_edge: bool,
}

impl EdgeResult {
    /// Result carrying no edge, used when edge detection is skipped.
    pub fn none(width: usize, height: usize) -> Self {
        Self {
            empty_space: BinaryMask::empty(width, height),
            muscle_edge: BinaryMask::empty(width, height),
            has_edge: false,
        }
    }
}

fn in_corner_window(x: usize, y: usize, w: usize, h: usize, win: usize) -> bool {
    let near_left = x < win;
    let near_right = x + win >= w;
    let near_top = y < win;
    let near_bottom = y + win >= h;
    (near_left || near_right) && (near_top || near_bottom)
}

fn passes_corner_filter(comp: &Component, w: usize, h: usize, p: &EdgeDetectorParams) -> bool {
    comp.pixels.iter().any(|&(x, y)| {
        let (x, y) = (x as usize, y as usize);
        if in_corner_window(x, y, w, h, p.corner_window) {
            return true;
        }
        !p.strict_corners && (x == 0 || y == 0 || x == w - 1 || y == h - 1)
    })
}

fn keep_components(
    mask: &BinaryMask,
    min_area: usize,
    corner_filter: Option<&EdgeDetectorParams>,
) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut out = BinaryMask::empty(w, h);
    for comp in connected_components(mask, Connectivity::Eight) {
        if comp.area < min_area {
            continue;
        }
        if let Some(p) = corner_filter {
            if !passes_corner_filter(&comp, w, h, p) {
                continue;
            }
        }
        for &(x, y) in &comp.pixels {
            out.set(x as usize, y as usize, true);
        }
    }
    out
}

/// Muscle texture detector: averages away cells, strengthens fiber texture
/// with a sharpening residual, thresholds it at the Otsu value of its
/// equalized variant, then keeps large corner-anchored candidates of the
/// inverted (texture-free) area.
pub fn detect_muscle_texture(img: &GrayImage, p: &EdgeDetectorParams) -> Result<BinaryMask> {
    p.validate()?;
    if img.width() < 400 || img.height() < 400 {
        return Err(Error::InvalidInput(format!(
            "texture detection requires at least 400x400 pixels, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    let averaged = box_filter(img, p.avg_kernel)?;
    let smoothed = gaussian_filter(&averaged, p.gauss_sigma)?;
    let texture = unsharp(&smoothed, p.gauss_sigma, p.sharpen_gain)?;
    let equalized = hist_equalize(&texture);
    let t = otsu_threshold(&equalized.histogram())?;
    // Equalization is monotone, so cutting the equalized image at t is the
    // same cut on the sharpened image expressed on a comparable scale.
    let textured = apply_threshold(&equalized, t, Polarity::BrightForeground);
    let candidates = morph_close(&textured.invert(), &p.se(), p.morph_order);
    Ok(keep_components(&candidates, p.min_area_texture, Some(p)))
}

/// Fuzzy WBC detector: smooths, cuts at k1 * mean with bright polarity and
/// inverts, capturing WBC-dense and void areas; corner-anchored candidates
/// survive.
pub fn detect_fuzzy_wbc(img: &GrayImage, p: &EdgeDetectorParams) -> Result<BinaryMask> {
    p.validate()?;
    let mean = global_mean(img);
    let smoothed = gaussian_filter(img, p.gauss_sigma)?;
    let cut = p.k1 * mean;
    let bright = BinaryMask::new(
        img.width(),
        img.height(),
        smoothed.pixels().iter().map(|&v| v as f64 > cut).collect(),
    )?;
    let candidates = morph_close(&bright.invert(), &p.se(), p.morph_order);
    Ok(keep_components(&candidates, 1, Some(p)))
}

fn refine_candidates(candidates: &BinaryMask, p: &EdgeDetectorParams) -> Result<EdgeResult> {
    let surviving = keep_components(candidates, p.min_area_final, None);
    let empty_space = fill_holes(&surviving);
    let muscle_edge = canny(&empty_space.to_image(), p.canny_low, p.canny_high)?;
    let has_edge = muscle_edge.any();
    Ok(EdgeResult {
        empty_space,
        muscle_edge,
        has_edge,
    })
}

/// Intersects the detector outputs, drops small remnants, fills holes and
/// contours the result.
pub fn intersect_and_refine(
    texture: &BinaryMask,
    fuzzy: &BinaryMask,
    p: &EdgeDetectorParams,
) -> Result<EdgeResult> {
    let common = texture.and(fuzzy)?;
    refine_candidates(&common, p)
}

/// Runs both detectors and combines them per `merge_mode`.
pub fn merge_detectors(img: &GrayImage, p: &EdgeDetectorParams) -> Result<EdgeResult> {
    let texture = detect_muscle_texture(img, p)?;
    let fuzzy = detect_fuzzy_wbc(img, p)?;
    let combined = match p.merge_mode {
        MergeMode::Union => texture.or(&fuzzy)?,
        MergeMode::Intersection => texture.and(&fuzzy)?,
    };
    refine_candidates(&combined, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::morph::dilate;
    use crate::testutil::{draw_disk, striped_background};

    fn params() -> EdgeDetectorParams {
        EdgeDetectorParams::default()
    }

    /// Muscle fiber texture over the whole frame; no void anywhere.
    fn full_muscle(w: usize, h: usize) -> GrayImage {
        striped_background(w, h, 210, 45.0, 48.0)
    }

    /// Bright flat void on the left `frac` of the frame, fibrous muscle on the
    /// right, with a dark boundary band on the muscle side.
    fn voided(w: usize, h: usize, frac: f64) -> GrayImage {
        let muscle = striped_background(w, h, 210, 45.0, 48.0);
        let split = (frac * w as f64) as usize;
        GrayImage::from_fn(w, h, |x, y| {
            if x < split {
                245
            } else if x < split + 12 {
                60
            } else {
                muscle.get(x, y)
            }
        })
    }

    #[test]
    fn texture_detector_empty_on_full_muscle() {
        let img = full_muscle(480, 480);
        let m = detect_muscle_texture(&img, &params()).unwrap();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn texture_detector_finds_corner_anchored_flat_region() {
        let img = voided(640, 480, 0.3);
        let m = detect_muscle_texture(&img, &params()).unwrap();
        assert!(m.count_ones() > 60_000);
        // The detected region must hold a pixel inside a corner window.
        let mut corner_hit = false;
        for y in 0..20 {
            for x in 0..20 {
                corner_hit |= m.get(x, y);
                corner_hit |= m.get(x, 480 - 1 - y);
            }
        }
        assert!(corner_hit);
        // And the bulk of the void is covered.
        let mut covered = 0usize;
        for y in 0..480 {
            for x in 0..(0.3 * 640.0) as usize {
                if m.get(x, y) {
                    covered += 1;
                }
            }
        }
        assert!(covered as f64 > 0.8 * 0.3 * 640.0 * 480.0);
    }

    #[test]
    fn texture_detector_drops_small_flat_region() {
        let mut img = full_muscle(480, 480);
        for y in 0..50 {
            for x in 0..50 {
                img.set(x, y, 245);
            }
        }
        let m = detect_muscle_texture(&img, &params()).unwrap();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn texture_detector_rejects_small_images() {
        let img = GrayImage::filled(200, 200, 100);
        assert!(detect_muscle_texture(&img, &params()).is_err());
    }

    #[test]
    fn fuzzy_detector_empty_on_constant() {
        let img = GrayImage::filled(300, 300, 170);
        let m = detect_fuzzy_wbc(&img, &params()).unwrap();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn fuzzy_detector_captures_dark_border_band() {
        let img = GrayImage::from_fn(400, 300, |_, y| if y < 40 { 60 } else { 200 });
        let m = detect_fuzzy_wbc(&img, &params()).unwrap();
        // Mean ~181, cut ~163; the band at 60 is below it and touches corners.
        assert!(m.count_ones() > 10_000);
        assert!(m.get(200, 20));
    }

    #[test]
    fn fuzzy_detector_excludes_interior_band() {
        // Same dark band but floated away from every border and corner.
        let img = GrayImage::from_fn(400, 300, |x, y| {
            if (100..140).contains(&y) && (60..340).contains(&x) {
                60
            } else {
                200
            }
        });
        let m = detect_fuzzy_wbc(&img, &params()).unwrap();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn intersect_empty_input_gives_no_edge() {
        let a = BinaryMask::empty(500, 400);
        let b = BinaryMask::full(500, 400);
        let r = intersect_and_refine(&a, &b, &params()).unwrap();
        assert!(!r.has_edge);
        assert_eq!(r.empty_space.count_ones(), 0);
    }

    #[test]
    fn intersect_identical_masks_is_fill_holes() {
        let mut m = BinaryMask::empty(400, 400);
        for y in 0..400 {
            for x in 0..200 {
                m.set(x, y, true);
            }
        }
        let r = intersect_and_refine(&m, &m, &params()).unwrap();
        assert_eq!(r.empty_space, fill_holes(&m));
        assert!(r.has_edge);
    }

    #[test]
    fn intersect_drops_region_between_floors() {
        // 40,000 px overlap: above nothing, below the 50,000 final floor.
        let mut m = BinaryMask::empty(500, 500);
        for y in 0..200 {
            for x in 0..200 {
                m.set(x, y, true);
            }
        }
        let r = intersect_and_refine(&m, &m, &params()).unwrap();
        assert!(!r.has_edge);
        assert_eq!(r.empty_space.count_ones(), 0);
    }

    #[test]
    fn merge_detects_flat_bright_void() {
        let img = voided(800, 600, 0.35);
        let r = merge_detectors(&img, &params()).unwrap();
        assert!(r.has_edge);
        // Recovered void covers most of the true void half.
        let split = (0.35 * 800.0) as usize;
        let mut hit = 0usize;
        for y in 0..600 {
            for x in 0..split {
                if r.empty_space.get(x, y) {
                    hit += 1;
                }
            }
        }
        assert!(hit as f64 / (split * 600) as f64 > 0.9);
    }

    #[test]
    fn merge_no_void_image_has_no_edge() {
        let img = full_muscle(480, 480);
        let r = merge_detectors(&img, &params()).unwrap();
        assert!(!r.has_edge);
    }

    #[test]
    fn merge_constant_image_has_no_edge() {
        let img = GrayImage::filled(420, 420, 150);
        let r = merge_detectors(&img, &params()).unwrap();
        assert!(!r.has_edge);
    }

    #[test]
    fn merge_fuzzy_compensates_dense_wbc_band() {
        // Void on the left; a dense dark WBC blob sits against the void so the
        // texture detector sees no fiber texture there.
        let mut img = voided(800, 600, 0.3);
        for cy in (80..520).step_by(18) {
            for cx in (252..380).step_by(18) {
                draw_disk(&mut img, cx as f64, cy as f64, 10.0, 70);
            }
        }
        let r = merge_detectors(&img, &params()).unwrap();
        assert!(r.has_edge);
        let split = (0.3 * 800.0) as usize;
        let mut hit = 0usize;
        for y in 0..600 {
            for x in 0..split {
                if r.empty_space.get(x, y) {
                    hit += 1;
                }
            }
        }
        assert!(hit as f64 / (split * 600) as f64 > 0.9);
    }

    #[test]
    fn edge_lies_on_empty_space_boundary() {
        let img = voided(800, 600, 0.4);
        let r = merge_detectors(&img, &params()).unwrap();
        assert!(r.has_edge);
        // Boundary = empty_space minus its erosion; dilate by 2 px and check
        // every edge pixel lands inside.
        let se = StructuringElement::square(1);
        let eroded = crate::imgproc::morph::erode(&r.empty_space, &se);
        let mut boundary = BinaryMask::empty(800, 600);
        for y in 0..600 {
            for x in 0..800 {
                if r.empty_space.get(x, y) && !eroded.get(x, y) {
                    boundary.set(x, y, true);
                }
            }
        }
        let allowed = dilate(&boundary, &StructuringElement::square(2));
        for y in 0..600 {
            for x in 0..800 {
                if r.muscle_edge.get(x, y) {
                    assert!(allowed.get(x, y), "edge pixel off boundary at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn corner_filter_invariant() {
        // A large interior blob with no border or corner contact never
        // survives either detector's filter.
        let mut img = GrayImage::filled(600, 600, 200);
        for y in 100..500 {
            for x in 100..500 {
                img.set(x, y, 60);
            }
        }
        let m = detect_fuzzy_wbc(&img, &params()).unwrap();
        assert_eq!(m.count_ones(), 0);
        let mut strict = params();
        strict.strict_corners = true;
        let m = detect_fuzzy_wbc(&img, &strict).unwrap();
        assert_eq!(m.count_ones(), 0);
    }
}
