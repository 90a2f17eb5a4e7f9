//! Canny edge detection: Gaussian smoothing, Sobel gradients, non-maximum
//! suppression and double-threshold hysteresis.

use crate::error::{Error, Result};
use crate::imgproc::filter::gaussian_smooth_f64;
use crate::raster::{BinaryMask, GrayImage};

const SMOOTH_SIGMA: f64 = 1.4;

/// 8-neighbor offsets indexed by gradient-angle octant.
const DIRS: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

pub fn canny(img: &GrayImage, low: f64, high: f64) -> Result<BinaryMask> {
    if !(0.0 <= low && low < high) {
        return Err(Error::InvalidInput(format!(
            "canny thresholds must satisfy 0 <= low < high, got {low} and {high}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    let smoothed = gaussian_smooth_f64(img, SMOOTH_SIGMA);
    let sample = |x: isize, y: isize| -> f64 {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        smoothed[y * w + x]
    };

    let mut mag = vec![0.0f64; w * h];
    let mut dir = vec![0u8; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = sample(x + 1, y - 1) + 2.0 * sample(x + 1, y) + sample(x + 1, y + 1)
                - sample(x - 1, y - 1)
                - 2.0 * sample(x - 1, y)
                - sample(x - 1, y + 1);
            let gy = sample(x - 1, y + 1) + 2.0 * sample(x, y + 1) + sample(x + 1, y + 1)
                - sample(x - 1, y - 1)
                - 2.0 * sample(x, y - 1)
                - sample(x + 1, y - 1);
            let m = (gx * gx + gy * gy).sqrt();
            let i = y as usize * w + x as usize;
            mag[i] = m;
            if m > 0.0 {
                let octant = (gy.atan2(gx) / std::f64::consts::FRAC_PI_4).round() as i64;
                dir[i] = octant.rem_euclid(8) as u8;
            }
        }
    }

    // Non-maximum suppression along the signed gradient direction. The
    // asymmetric tie-break (strict against the backward neighbor) keeps
    // exactly one pixel on symmetric ramps.
    let mag_at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x as usize >= w || y as usize >= h {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut thin = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if mag[i] < low {
                continue;
            }
            let (dx, dy) = DIRS[dir[i] as usize];
            let forward = mag_at(x as isize + dx, y as isize + dy);
            let backward = mag_at(x as isize - dx, y as isize - dy);
            if mag[i] > backward && mag[i] >= forward {
                thin[i] = true;
            }
        }
    }

    // Hysteresis: grow from strong pixels through weak ones (8-connected).
    let mut out = BinaryMask::empty(w, h);
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if thin[y * w + x] && mag[y * w + x] >= high && !out.get(x, y) {
                out.set(x, y, true);
                stack.push((x, y));
                while let Some((cx, cy)) = stack.pop() {
                    for dy in -1isize..=1 {
                        for dx in -1isize..=1 {
                            let nx = cx as isize + dx;
                            let ny = cy as isize + dy;
                            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                                continue;
                            }
                            let (nx, ny) = (nx as usize, ny as usize);
                            if thin[ny * w + nx] && !out.get(nx, ny) {
                                out.set(nx, ny, true);
                                stack.push((nx, ny));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
