//! Segmentation, counting and spatial characterization of white blood cells
//! in 100x light-microscopy muscle images.
//!
//! The pipeline: localized iterative Otsu segmentation over fixed-size
//! blocks, muscle-edge detection from texture and fuzzy cues, edge-aware
//! region-of-interest selection, and block-based quantification. A synthetic
//! generator produces ground-truthed corpora and a benchmark harness compares
//! threshold methods on them.

pub mod bench;
pub mod config;
pub mod edge;
pub mod error;
pub mod imgproc;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod quantify;
pub mod raster;
pub mod roi;
pub mod synth;
pub mod threshold;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
