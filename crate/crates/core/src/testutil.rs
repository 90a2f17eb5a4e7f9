//! Seeded helpers shared by the unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::{BinaryMask, GrayImage, Histogram256};

pub(crate) fn seeded_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, |_, _| rng.gen_range(0..=254u8))
}

pub(crate) fn seeded_mask(width: usize, height: usize, seed: u64, density: f64) -> BinaryMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    let bits = (0..width * height).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::new(width, height, bits).unwrap()
}

pub(crate) fn seeded_histogram(seed: u64) -> Histogram256 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545F4914F6CDD1D));
    let mut counts = [0u64; 256];
    for c in &mut counts {
        // Sparse bins included: roughly a third of the bins stay empty.
        if rng.gen_bool(0.66) {
            *c = rng.gen_range(0..1000);
        }
    }
    if counts.iter().all(|&c| c == 0) {
        counts[rng.gen_range(0..256)] = 1;
    }
    Histogram256::from_counts(counts)
}

pub(crate) use crate::synth::blend_disk as draw_disk;
pub(crate) use crate::synth::striped_background;
