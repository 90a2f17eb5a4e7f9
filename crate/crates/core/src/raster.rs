//! Raster value types shared by the whole pipeline: 8-bit grayscale images,
//! binary masks, intensity histograms and connected components.

use crate::error::{Error, Result};

/// Rounds half-up, then clamps into the 8-bit intensity range.
#[inline]
pub(crate) fn round_u8(x: f64) -> u8 {
    (x + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// An 8-bit grayscale raster, row-major, 256 intensity levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(
                "image dimensions must be nonzero".into(),
            ));
        }
        if data.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "pixel buffer length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0);
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Samples with edge replication: out-of-bounds coordinates clamp to the
    /// nearest border pixel.
    #[inline]
    pub fn get_replicated(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn histogram(&self) -> Histogram256 {
        let mut counts = [0u64; 256];
        for &p in &self.data {
            counts[p as usize] += 1;
        }
        Histogram256::from_counts(counts)
    }

    pub fn crop(&self, rect: Rect) -> Result<GrayImage> {
        rect.check_within(self.width, self.height)?;
        let mut data = Vec::with_capacity(rect.w * rect.h);
        for y in rect.y..rect.y + rect.h {
            data.extend_from_slice(&self.data[y * self.width + rect.x..y * self.width + rect.x + rect.w]);
        }
        GrayImage::new(rect.w, rect.h, data)
    }
}

/// An interleaved 24-bit RGB raster.
#[derive(Debug, Clone)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(
                "image dimensions must be nonzero".into(),
            ));
        }
        if data.len() != width * height * 3 {
            return Err(Error::InvalidInput(format!(
                "rgb buffer length {} does not match {}x{}x3",
                data.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

/// Converts RGB to grayscale with the standard luma weights.
pub fn to_grayscale(rgb: &RgbImage) -> Result<GrayImage> {
    let mut data = Vec::with_capacity(rgb.width * rgb.height);
    for px in rgb.data.chunks_exact(3) {
        let luma = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
        data.push(round_u8(luma));
    }
    GrayImage::new(rgb.width, rgb.height, data)
}

/// Boolean raster; `true` marks foreground/object pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput(
                "mask dimensions must be nonzero".into(),
            ));
        }
        if bits.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "mask buffer length {} does not match {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    /// Bitwise complement.
    pub fn invert(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.check_dims(other)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.check_dims(other)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    /// Renders foreground as 255 and background as 0.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }

    fn check_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::InvalidInput(format!(
                "mask dimensions {}x{} and {}x{} do not match",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

/// 256-bin intensity histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
    total: u64,
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    #[inline]
    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Returns the intensity level when exactly one bin is populated.
    pub fn single_level(&self) -> Option<u8> {
        let mut level = None;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                if level.is_some() {
                    return None;
                }
                level = Some(i as u8);
            }
        }
        level
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    pub fn contains_f(&self, x: f64, y: f64) -> bool {
        x >= self.x as f64 && x < (self.x + self.w) as f64 && y >= self.y as f64 && y < (self.y + self.h) as f64
    }

    /// Overlap area with another rectangle.
    pub fn intersection_area(&self, other: &Rect) -> usize {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = (self.x + self.w).min(other.x + other.w);
        let y1 = (self.y + self.h).min(other.y + other.h);
        if x1 > x0 && y1 > y0 {
            (x1 - x0) * (y1 - y0)
        } else {
            0
        }
    }

    pub(crate) fn check_within(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 {
            return Err(Error::InvalidInput("empty region".into()));
        }
        if self.x + self.w > width || self.y + self.h > height {
            return Err(Error::InvalidInput(format!(
                "region {:?} exceeds {}x{} bounds",
                self, width, height
            )));
        }
        Ok(())
    }
}

/// Threshold polarity: WBCs are darker than the other constituents, so the
/// segmentation path treats low intensities as foreground.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    /// Foreground iff pixel <= t.
    DarkForeground,
    /// Foreground iff pixel > t.
    BrightForeground,
}

/// Binarizes an image at intensity `t`.
pub fn apply_threshold(img: &GrayImage, t: u8, polarity: Polarity) -> BinaryMask {
    let bits = img
        .pixels()
        .iter()
        .map(|&p| match polarity {
            Polarity::DarkForeground => p <= t,
            Polarity::BrightForeground => p > t,
        })
        .collect();
    BinaryMask {
        width: img.width(),
        height: img.height(),
        bits,
    }
}

/// Structuring element shapes for morphology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeShape {
    Square,
    Disk,
}

/// Morphological structuring element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    pub shape: SeShape,
    pub radius: usize,
}

impl StructuringElement {
    pub fn new(shape: SeShape, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidInput(
                "structuring element radius must be >= 1".into(),
            ));
        }
        Ok(Self { shape, radius })
    }

    pub fn square(radius: usize) -> Self {
        Self::new(SeShape::Square, radius).unwrap()
    }

    pub fn disk(radius: usize) -> Self {
        Self::new(SeShape::Disk, radius).unwrap()
    }

    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let keep = match self.shape {
                    SeShape::Square => true,
                    SeShape::Disk => dx * dx + dy * dy <= r * r,
                };
                if keep {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

/// A connected foreground region.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub label: u32,
    pub area: usize,
    /// (min_x, min_y, max_x, max_y), inclusive.
    pub bbox: (usize, usize, usize, usize),
    /// Sub-pixel centroid (x, y).
    pub centroid: (f64, f64),
    pub pixels: Vec<(u32, u32)>,
}
