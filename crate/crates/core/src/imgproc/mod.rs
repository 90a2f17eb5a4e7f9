//! Image operations the pipeline composes: statistics, filtering,
//! equalization, morphology, connected components and edge extraction.

pub mod canny;
pub mod components;
pub mod filter;
pub mod morph;
pub mod stats;

pub use canny::canny;
pub use components::{connected_components, fill_holes, Connectivity};
pub use filter::{box_filter, gaussian_filter, hist_equalize, unsharp};
pub use morph::{dilate, erode, morph_close, MorphOrder};
pub use stats::{detect_bubbles, fill_artifacts, global_mean, local_std};
