use rand::Rng;

use super::ImageBuffer;
use crate::error::Result;
use crate::rng::{stream, Purpose};

/// Deterministic 8-bit test scene: a diagonal ramp, a bright rectangle, a dark
/// disc, thin stripes and a little seeded texture.
pub fn synthetic_image(rows: usize, cols: usize, seed: u64) -> Result<ImageBuffer> {
    let (rf, cf) = (rows as f64, cols as f64);
    ImageBuffer::from_fn(rows, cols, 1, 8, |r, c, _| {
        let (y, x) = (r as f64 / rf, c as f64 / cf);
        let mut v = 40.0 + 120.0 * (x + y) / 2.0;
        if (0.15..0.45).contains(&y) && (0.55..0.9).contains(&x) {
            v = 220.0;
        }
        if (x - 0.3).powi(2) + (y - 0.65).powi(2) < 0.04 {
            v = 25.0;
        }
        if y > 0.8 && (c / 2) % 3 == 0 {
            v = 250.0;
        }
        let jitter = stream(seed, Purpose::Synthetic, (r * cols + c) as u64, 0).random_range(-6.0..=6.0);
        (v + jitter).round().clamp(0.0, 255.0) as u16
    })
}

/// Uniform random 8-bit image.
pub fn random_image(rows: usize, cols: usize, channels: usize, seed: u64) -> Result<ImageBuffer> {
    let mut rng = stream(seed, Purpose::Synthetic, u64::MAX, 0);
    let data = (0..rows * cols * channels).map(|_| rng.random_range(0..=255u16)).collect();
    ImageBuffer::new(rows, cols, channels, 8, data)
}
