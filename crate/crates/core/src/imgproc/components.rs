//! Connected-component labeling and hole filling.

use crate::raster::{BinaryMask, Component};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn neighbors(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        }
    }
}

/// Maximal connected foreground regions, labeled densely from 1 and ordered
/// by (min_y, min_x) of their bounding boxes.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let neighbors = connectivity.neighbors();
    let mut visited = vec![false; w * h];
    let mut comps: Vec<Component> = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for sy in 0..h {
        for sx in 0..w {
            if !mask.get(sx, sy) || visited[sy * w + sx] {
                continue;
            }
            visited[sy * w + sx] = true;
            stack.push((sx, sy));
            let mut pixels: Vec<(u32, u32)> = Vec::new();
            let (mut min_x, mut min_y, mut max_x, mut max_y) = (sx, sy, sx, sy);
            let (mut sum_x, mut sum_y) = (0u64, 0u64);
            while let Some((x, y)) = stack.pop() {
                pixels.push((x as u32, y as u32));
                sum_x += x as u64;
                sum_y += y as u64;
                min_x = min_x.min(x);
                min_y = min_y.min(y);
                max_x = max_x.max(x);
                max_y = max_y.max(y);
                for &(dx, dy) in neighbors {
                    let nx = x as isize + dx;
                    let ny = y as isize + dy;
                    if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if mask.get(nx, ny) && !visited[ny * w + nx] {
                        visited[ny * w + nx] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            let area = pixels.len();
            comps.push(Component {
                label: 0,
                area,
                bbox: (min_x, min_y, max_x, max_y),
                centroid: (sum_x as f64 / area as f64, sum_y as f64 / area as f64),
                pixels,
            });
        }
    }

    comps.sort_by_key(|c| (c.bbox.1, c.bbox.0));
    for (i, c) in comps.iter_mut().enumerate() {
        c.label = (i + 1) as u32;
    }
    comps
}

/// Fills holes: background regions not 8-connected to the image border
/// become foreground.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    let mut reachable = vec![false; w * h];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let seed = |x: usize, y: usize, stack: &mut Vec<(usize, usize)>, reachable: &mut Vec<bool>| {
        if !mask.get(x, y) && !reachable[y * w + x] {
            reachable[y * w + x] = true;
            stack.push((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut stack, &mut reachable);
        seed(x, h - 1, &mut stack, &mut reachable);
    }
    for y in 0..h {
        seed(0, y, &mut stack, &mut reachable);
        seed(w - 1, y, &mut stack, &mut reachable);
    }
    let neighbors = Connectivity::Eight.neighbors();
    while let Some((x, y)) = stack.pop() {
        for &(dx, dy) in neighbors {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !mask.get(nx, ny) && !reachable[ny * w + nx] {
                reachable[ny * w + nx] = true;
                stack.push((nx, ny));
            }
        }
    }
    let mut out = mask.clone();
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) && !reachable[y * w + x] {
                out.set(x, y, true);
            }
        }
    }
    out
}
