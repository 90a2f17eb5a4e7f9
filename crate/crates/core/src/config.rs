//! Flat key=value configuration files and the run/synth settings they
//! populate. Every key can also arrive as a CLI override.

use std::collections::BTreeMap;
use std::path::Path;

use crate::edge::{EdgeDetectorParams, MergeMode};
use crate::error::{Error, Result};
use crate::imgproc::morph::MorphOrder;
use crate::quantify::QuantifyParams;
use crate::raster::SeShape;
use crate::synth::{SynthSpec, VoidKind};
use crate::threshold::LiOtsuConfig;

/// Full settings for one `analyze` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub li_otsu: LiOtsuConfig,
    pub edge: EdgeDetectorParams,
    pub quantify: QuantifyParams,
    /// Side of the segmentation blocks.
    pub segment_block: usize,
    /// Side of the ROI scoring blocks.
    pub roi_block: usize,
    pub bubble_min_intensity: u8,
    pub bubble_min_area: usize,
    pub debug_masks: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            li_otsu: LiOtsuConfig::default(),
            edge: EdgeDetectorParams::default(),
            quantify: QuantifyParams::default(),
            segment_block: 400,
            roi_block: 200,
            bubble_min_intensity: 250,
            bubble_min_area: 2000,
            debug_masks: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.li_otsu.validate()?;
        self.edge.validate()?;
        self.quantify.validate()?;
        if self.segment_block < 64 || self.roi_block == 0 {
            return Err(Error::InvalidConfig(
                "segment_block must be >= 64 and roi_block positive".into(),
            ));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply(&parse_key_values_file(path)?)?;
        Ok(cfg)
    }

    /// Applies key=value settings on top of the current values; unknown keys
    /// are configuration errors.
    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        for (key, value) in kv {
            self.set(key, value)?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "expected_foreground_ratio" => self.li_otsu.expected_foreground_ratio = num(key, value)?,
            "max_object_count" => self.li_otsu.max_object_count = num(key, value)?,
            "step" => self.li_otsu.step = num(key, value)?,
            "t_floor" => self.li_otsu.t_floor = num(key, value)?,
            "max_iters" => self.li_otsu.max_iters = num(key, value)?,
            "min_object_area" => self.li_otsu.min_object_area = num(key, value)?,
            "avg_kernel" => self.edge.avg_kernel = num(key, value)?,
            "sharpen_gain" => self.edge.sharpen_gain = num(key, value)?,
            "gauss_sigma" => self.edge.gauss_sigma = num(key, value)?,
            "k1" => self.edge.k1 = num(key, value)?,
            "corner_window" => self.edge.corner_window = num(key, value)?,
            "min_area_texture" => self.edge.min_area_texture = num(key, value)?,
            "min_area_final" => self.edge.min_area_final = num(key, value)?,
            "edge_exclusion_d" => self.edge.edge_exclusion_d = num(key, value)?,
            "se_shape" => {
                self.edge.se_shape = match value {
                    "square" => SeShape::Square,
                    "disk" => SeShape::Disk,
                    _ => return Err(bad(key, value, "square|disk")),
                }
            }
            "se_radius" => self.edge.se_radius = num(key, value)?,
            "morph_order" => {
                self.edge.morph_order = match value {
                    "erode_dilate" => MorphOrder::ErodeDilate,
                    "dilate_erode" => MorphOrder::DilateErode,
                    _ => return Err(bad(key, value, "erode_dilate|dilate_erode")),
                }
            }
            "merge_mode" => {
                self.edge.merge_mode = match value {
                    "union" => MergeMode::Union,
                    "intersection" => MergeMode::Intersection,
                    _ => return Err(bad(key, value, "union|intersection")),
                }
            }
            "strict_corners" => self.edge.strict_corners = boolean(key, value)?,
            "canny_low" => self.edge.canny_low = num(key, value)?,
            "canny_high" => self.edge.canny_high = num(key, value)?,
            "avg_cell_size" => self.quantify.avg_cell_size = num(key, value)?,
            "cluster_factor" => self.quantify.cluster_factor = num(key, value)?,
            "min_cell_area" => self.quantify.min_cell_area = num(key, value)?,
            "analysis_block" => self.quantify.analysis_block = num(key, value)?,
            "bin_width" => self.quantify.bin_width = num(key, value)?,
            "segment_block" => self.segment_block = num(key, value)?,
            "roi_block" => self.roi_block = num(key, value)?,
            "bubble_min_intensity" => self.bubble_min_intensity = num(key, value)?,
            "bubble_min_area" => self.bubble_min_area = num(key, value)?,
            "debug_masks" => self.debug_masks = boolean(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }
}

impl SynthSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut spec = Self::default();
        for (key, value) in &parse_key_values_file(path)? {
            spec.set(key, value)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "width" => self.width = num(key, value)?,
            "height" => self.height = num(key, value)?,
            "n_discrete" => self.n_discrete = num(key, value)?,
            "n_clusters" => self.n_clusters = num(key, value)?,
            "cluster_size" => self.cluster_size = num(key, value)?,
            "radius_min" => self.radius_min = num(key, value)?,
            "radius_max" => self.radius_max = num(key, value)?,
            "cell_intensity" => self.cell_intensity = num(key, value)?,
            "background" => self.background = num(key, value)?,
            "stripe_amplitude" => self.stripe_amplitude = num(key, value)?,
            "void" => {
                self.void_kind = match value {
                    "none" => VoidKind::None,
                    "half_plane" => VoidKind::HalfPlane { split: 0 },
                    "corner_wedge" => VoidKind::CornerWedge { leg_x: 0, leg_y: 0 },
                    _ => return Err(bad(key, value, "none|half_plane|corner_wedge")),
                }
            }
            "void_fraction" => self.void_fraction = num(key, value)?,
            "void_intensity" => self.void_intensity = num(key, value)?,
            "band_width" => self.band_width = num(key, value)?,
            "band_intensity" => self.band_intensity = num(key, value)?,
            "n_near_edge" => self.n_near_edge = num(key, value)?,
            "noise_sigma" => self.noise_sigma = num(key, value)?,
            "min_gap" => self.min_gap = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown synth key '{key}'"))),
        }
        Ok(())
    }
}

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::InvalidConfig(format!("key '{key}': got '{value}', expected {expected}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("key '{key}': cannot parse '{value}'")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value, "true|false")),
    }
}

/// Parses a flat `key = value` file: UTF-8, one pair per line, `#` starts a
/// comment, blank lines ignored.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected key=value, got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::InvalidConfig(format!("line {}: empty key", lineno + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

pub fn parse_key_values_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Read {
        path: path.to_path_buf(),
        source: Box::new(e),
    })?;
    parse_key_values(&text)
}
