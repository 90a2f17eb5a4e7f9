//! Synthetic image generator with exact ground truth: fiber-striped muscle
//! background, anti-aliased dark disks (discrete cells and merged clusters),
//! optional void region with a darkened boundary band, Gaussian noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{round_u8, BinaryMask, GrayImage};

/// Spacing of the fiber lines in the background texture.
const FIBER_CELL: f64 = 48.0;
/// Width of each fiber line in pixels.
const FIBER_LINE_WIDTH: f64 = 3.0;
/// Amplitude of the sinusoidal wobble applied to the fiber lines.
const FIBER_WOBBLE: f64 = 6.0;
/// Extra darkening of the nuclei-like dimples dotted between fiber lines.
/// They give textured muscle a high countable-object density at any
/// threshold that still includes the texture, which is what drives the
/// localized iteration below it; at 3x3 px they stay under the debris floor.
const FIBER_DOT_DROP: f64 = 70.0;
/// Rejection-sampling budget per planted object.
const MAX_PLACEMENT_ATTEMPTS: usize = 20_000;
/// Center spacing of adjacent cells within a cluster, in cell radii. Close
/// enough to merge into one blob, far enough that the blob area stays near
/// the sum of the member areas.
const CLUSTER_SPACING: f64 = 1.7;

fn fiber_value(x: f64, y: f64, base: f64, drop: f64, cell: f64) -> f64 {
    let xg = x + FIBER_WOBBLE * (2.0 * std::f64::consts::PI * y / (3.7 * cell)).sin();
    let yg = y + FIBER_WOBBLE * (2.0 * std::f64::consts::PI * x / (4.3 * cell)).sin();
    let dx = (xg.rem_euclid(cell) - cell / 2.0).abs();
    let dy = (yg.rem_euclid(cell) - cell / 2.0).abs();
    let d = dx.min(dy);
    let line = (1.0 - d / (FIBER_LINE_WIDTH / 2.0)).clamp(0.0, 1.0);
    // Dimples on a quarter-cell grid in the same warped coordinates.
    let s = cell / 4.0;
    let mx = xg.rem_euclid(s);
    let my = yg.rem_euclid(s);
    let ex = mx.min(s - mx);
    let ey = my.min(s - my);
    let dot = (2.5 - ex.max(ey)).clamp(0.0, 1.0);
    base - (drop * line).max(FIBER_DOT_DROP * dot)
}

/// Muscle-fiber background: a wobbled grid of dark lines `drop` below `base`,
/// one line every `cell` pixels.
pub fn striped_background(w: usize, h: usize, base: u8, drop: f64, cell: f64) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        round_u8(fiber_value(x as f64, y as f64, base as f64, drop, cell))
    })
}

/// Blends an anti-aliased disk of the given intensity into the image.
/// Coverage ramps linearly over the last pixel of the radius.
pub fn blend_disk(img: &mut GrayImage, cx: f64, cy: f64, r: f64, value: u8) {
    let x0 = ((cx - r - 1.0).floor().max(0.0)) as usize;
    let y0 = ((cy - r - 1.0).floor().max(0.0)) as usize;
    let x1 = ((cx + r + 1.0).ceil() as usize).min(img.width().saturating_sub(1));
    let y1 = ((cy + r + 1.0).ceil() as usize).min(img.height().saturating_sub(1));
    for y in y0..=y1 {
        for x in x0..=x1 {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            let cov = (r + 0.5 - d).clamp(0.0, 1.0);
            if cov > 0.0 {
                let old = img.get(x, y) as f64;
                img.set(x, y, round_u8(old * (1.0 - cov) + value as f64 * cov));
            }
        }
    }
}

/// Shape of the planted void (empty space) region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VoidKind {
    None,
    /// Void occupies x < split.
    HalfPlane { split: usize },
    /// Void occupies x/leg_x + y/leg_y < 1 (top-left corner wedge).
    CornerWedge { leg_x: usize, leg_y: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub n_discrete: usize,
    /// Number of merged-disk clusters.
    pub n_clusters: usize,
    /// Cells per cluster.
    pub cluster_size: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    pub cell_intensity: u8,
    pub background: u8,
    /// Depth of the fiber stripes below the background level.
    pub stripe_amplitude: f64,
    pub void_kind: VoidKind,
    /// Fraction of the image claimed by the void region.
    pub void_fraction: f64,
    pub void_intensity: u8,
    /// Width of the darkened band along the void boundary.
    pub band_width: usize,
    pub band_intensity: u8,
    /// Objects deliberately planted within 150 px of the void boundary.
    pub n_near_edge: usize,
    pub noise_sigma: f64,
    /// Minimum clearance between planted objects.
    pub min_gap: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            width: 1600,
            height: 1200,
            n_discrete: 30,
            n_clusters: 0,
            cluster_size: 4,
            radius_min: 11.0,
            radius_max: 13.0,
            cell_intensity: 90,
            background: 210,
            stripe_amplitude: 45.0,
            void_kind: VoidKind::None,
            void_fraction: 0.4,
            void_intensity: 245,
            band_width: 12,
            band_intensity: 60,
            n_near_edge: 0,
            noise_sigma: 0.0,
            min_gap: 10.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return err("image dimensions must be positive");
        }
        if !(self.radius_min > 0.0 && self.radius_max >= self.radius_min) {
            return err("cell radius range must satisfy 0 < min <= max");
        }
        if self.n_clusters > 0 && self.cluster_size < 2 {
            return err("cluster_size must be at least 2");
        }
        if !(0.0..1.0).contains(&self.void_fraction) || !self.noise_sigma.is_finite() {
            return err("void_fraction must be in [0,1) and noise_sigma finite");
        }
        if self.noise_sigma < 0.0 || self.min_gap < 0.0 {
            return err("noise_sigma and min_gap must be non-negative");
        }
        Ok(())
    }
}

/// One planted disk; `cluster` identifies the blob it was merged into.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthObject {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub cluster: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub objects: Vec<TruthObject>,
    #[serde(flatten)]
    pub void_kind: VoidKind,
    pub band_width: usize,
    pub n_discrete: usize,
    pub n_clusters: usize,
    pub n_cells_in_clusters: usize,
    pub n_total: usize,
}

impl GroundTruth {
    /// Rasterizes the true void region (boundary band excluded).
    pub fn void_mask(&self) -> BinaryMask {
        let mut m = BinaryMask::empty(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if void_signed_distance(self.void_kind, x as f64, y as f64) < 0.0 {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    pub fn has_void(&self) -> bool {
        self.void_kind != VoidKind::None
    }
}

/// Signed distance (in pixels, approximately) from the void boundary;
/// negative inside the void. `None` regions are infinitely far away.
pub fn void_signed_distance(kind: VoidKind, x: f64, y: f64) -> f64 {
    match kind {
        VoidKind::None => f64::INFINITY,
        VoidKind::HalfPlane { split } => x - split as f64,
        VoidKind::CornerWedge { leg_x, leg_y } => {
            let (a, b) = (leg_x as f64, leg_y as f64);
            let g = (1.0 / (a * a) + 1.0 / (b * b)).sqrt();
            (x / a + y / b - 1.0) / g
        }
    }
}

fn resolve_void(spec: &SynthSpec) -> VoidKind {
    match spec.void_kind {
        VoidKind::None => VoidKind::None,
        VoidKind::HalfPlane { split: 0 } => VoidKind::HalfPlane {
            split: (spec.void_fraction * spec.width as f64) as usize,
        },
        VoidKind::CornerWedge { leg_x: 0, leg_y: 0 } => {
            // Legs sized so the triangle covers void_fraction of the image.
            let s = (2.0 * spec.void_fraction).sqrt();
            VoidKind::CornerWedge {
                leg_x: (s * spec.width as f64) as usize,
                leg_y: (s * spec.height as f64) as usize,
            }
        }
        explicit => explicit,
    }
}

struct Placer<'a> {
    spec: &'a SynthSpec,
    void: VoidKind,
    placed: Vec<(f64, f64, f64)>,
}

impl Placer<'_> {
    fn clear_of_others(&self, cx: f64, cy: f64, r: f64) -> bool {
        self.placed.iter().all(|&(px, py, pr)| {
            ((px - cx).powi(2) + (py - cy).powi(2)).sqrt() >= pr + r + self.spec.min_gap
        })
    }

    fn in_muscle(&self, cx: f64, cy: f64, r: f64) -> bool {
        let margin = r + 2.0;
        if cx < margin
            || cy < margin
            || cx > self.spec.width as f64 - margin
            || cy > self.spec.height as f64 - margin
        {
            return false;
        }
        void_signed_distance(self.void, cx, cy) >= self.spec.band_width as f64 + margin
    }

    fn sample_center(
        &self,
        rng: &mut ChaCha8Rng,
        r: f64,
        near_edge: bool,
    ) -> Option<(f64, f64)> {
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let cx = rng.gen_range(0.0..self.spec.width as f64);
            let cy = rng.gen_range(0.0..self.spec.height as f64);
            if !self.in_muscle(cx, cy, r) {
                continue;
            }
            if near_edge && void_signed_distance(self.void, cx, cy) > 150.0 {
                continue;
            }
            if self.clear_of_others(cx, cy, r) {
                return Some((cx, cy));
            }
        }
        None
    }
}

/// Renders the image described by `spec` together with its ground truth.
/// Deterministic for a fixed spec.
pub fn generate(spec: &SynthSpec) -> Result<(GrayImage, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let void = resolve_void(spec);

    let mut img = striped_background(
        spec.width,
        spec.height,
        spec.background,
        spec.stripe_amplitude,
        FIBER_CELL,
    );
    if void != VoidKind::None {
        let band = spec.band_width as f64;
        for y in 0..spec.height {
            for x in 0..spec.width {
                let d = void_signed_distance(void, x as f64, y as f64);
                if d < 0.0 {
                    img.set(x, y, spec.void_intensity);
                } else if d < band {
                    img.set(x, y, spec.band_intensity);
                }
            }
        }
    }

    let overfull = |what: &str| {
        Error::Generation(format!(
            "could not place {what} after {MAX_PLACEMENT_ATTEMPTS} attempts; spec is overfull"
        ))
    };
    let mut placer = Placer {
        spec,
        void,
        placed: Vec::new(),
    };
    let mut objects = Vec::new();
    let radius = |rng: &mut ChaCha8Rng| {
        if spec.radius_max > spec.radius_min {
            rng.gen_range(spec.radius_min..=spec.radius_max)
        } else {
            spec.radius_min
        }
    };

    for i in 0..spec.n_discrete {
        let r = radius(&mut rng);
        let near_edge = i < spec.n_near_edge.min(spec.n_discrete);
        let (cx, cy) = placer
            .sample_center(&mut rng, r, near_edge)
            .ok_or_else(|| overfull("a discrete cell"))?;
        placer.placed.push((cx, cy, r));
        objects.push(TruthObject {
            cx,
            cy,
            r,
            cluster: None,
        });
    }

    for cluster in 0..spec.n_clusters {
        // Chain of touching cells: reserve room for the whole chain around
        // the anchor, then walk outward one spacing at a time.
        let r = radius(&mut rng);
        let reach = CLUSTER_SPACING * r * spec.cluster_size as f64;
        let (mut cx, mut cy) = placer
            .sample_center(&mut rng, reach, false)
            .ok_or_else(|| overfull("a cluster"))?;
        let start = placer.placed.len();
        let mut heading = rng.gen_range(0.0..std::f64::consts::TAU);
        for k in 0..spec.cluster_size {
            if k > 0 {
                let (px, py) = (placer.placed[start + k - 1].0, placer.placed[start + k - 1].1);
                // Step from the previous member; steer away if the walk
                // would double over an earlier one.
                let mut tries = 0;
                loop {
                    let hx = px + CLUSTER_SPACING * r * heading.cos();
                    let hy = py + CLUSTER_SPACING * r * heading.sin();
                    let clear = placer.placed[start..start + k - 1]
                        .iter()
                        .all(|&(ox, oy, _)| {
                            ((ox - hx).powi(2) + (oy - hy).powi(2)).sqrt() >= 1.9 * r
                        });
                    if clear {
                        (cx, cy) = (hx, hy);
                        break;
                    }
                    heading += 0.9;
                    tries += 1;
                    if tries > 16 {
                        return Err(overfull("a cluster member"));
                    }
                }
                heading += rng.gen_range(-0.5..0.5);
            }
            placer.placed.push((cx, cy, r));
            objects.push(TruthObject {
                cx,
                cy,
                r,
                cluster: Some(cluster),
            });
        }
    }

    for o in &objects {
        blend_disk(&mut img, o.cx, o.cy, o.r, spec.cell_intensity);
    }

    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::InvalidConfig(format!("noise_sigma: {e}")))?;
        let (w, h) = (img.width(), img.height());
        for y in 0..h {
            for x in 0..w {
                let v = img.get(x, y) as f64 + normal.sample(&mut rng);
                img.set(x, y, round_u8(v));
            }
        }
    }

    let n_cells_in_clusters = spec.n_clusters * spec.cluster_size;
    let truth = GroundTruth {
        width: spec.width,
        height: spec.height,
        objects,
        void_kind: void,
        band_width: spec.band_width,
        n_discrete: spec.n_discrete,
        n_clusters: spec.n_clusters,
        n_cells_in_clusters,
        n_total: spec.n_discrete + n_cells_in_clusters,
    };
    Ok((img, truth))
}
