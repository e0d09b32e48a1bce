use rayon::prelude::*;

use super::{ImageBuffer, Raster};
use crate::error::{Error, Result};
use crate::interfaces::{equalize, round_levels, Equalizer};

/// Odd-sized square correlation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size.is_multiple_of(2) {
            return Err(Error::domain(format!("kernel size {size} must be odd")));
        }
        if weights.len() != size * size {
            return Err(Error::dims(size * size, weights.len()));
        }
        Ok(Self { size, weights })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut w = vec![0.0; size * size];
        if let Some(center) = w.get_mut(size * size / 2) {
            *center = 1.0;
        }
        Self::new(size, w)
    }

    pub fn mean(size: usize) -> Result<Self> {
        let n = (size * size) as f64;
        Self::new(size, vec![1.0 / n; size * size])
    }

    /// Horizontal derivative `k_H`.
    pub fn sobel_h() -> Self {
        Self { size: 3, weights: vec![-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0] }
    }

    /// Vertical derivative `k_v`.
    pub fn sobel_v() -> Self {
        Self { size: 3, weights: vec![1.0, 2.0, 1.0, 0.0, 0.0, 0.0, -1.0, -2.0, -1.0] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Nonzero taps as `(row offset, col offset, weight)`.
    pub fn taps(&self) -> impl Iterator<Item = (isize, isize, f64)> + '_ {
        let h = (self.size / 2) as isize;
        self.weights.iter().enumerate().filter(|(_, w)| **w != 0.0).map(move |(i, &w)| {
            ((i / self.size) as isize - h, (i % self.size) as isize - h, w)
        })
    }
}

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Correlation with replicate padding, row-major order, no quantization.
pub fn convolve_raster(img: &Raster, k: &Kernel) -> Result<Raster> {
    let (rows, cols, chans) = (img.rows(), img.cols(), img.channels());
    let taps: Vec<_> = k.taps().collect();
    let data = (0..rows * cols * chans)
        .into_par_iter()
        .map(|i| {
            let ch = i % chans;
            let (r, c) = ((i / chans) / cols, (i / chans) % cols);
            taps.iter()
                .map(|&(dr, dc, w)| {
                    w * img.get(clamp_index(r as isize + dr, rows), clamp_index(c as isize + dc, cols), ch)
                })
                .sum()
        })
        .collect();
    img.with_data(data)
}

pub fn convolve(img: &ImageBuffer, k: &Kernel) -> Result<Raster> {
    convolve_raster(&img.to_raster(), k)
}

/// The four line directions of a smoothing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Horizontal,
    Vertical,
    MainDiagonal,
    AntiDiagonal,
}

impl Direction {
    /// In tie-break order.
    pub const ALL: [Direction; 4] = [Direction::Horizontal, Direction::Vertical, Direction::MainDiagonal, Direction::AntiDiagonal];

    fn step(self) -> (isize, isize) {
        match self {
            Direction::Horizontal => (0, 1),
            Direction::Vertical => (1, 0),
            Direction::MainDiagonal => (1, 1),
            Direction::AntiDiagonal => (1, -1),
        }
    }

    /// Offsets of the `window` pixels on this line through the center.
    pub fn offsets(self, window: usize) -> impl Iterator<Item = (isize, isize)> {
        let h = (window / 2) as isize;
        let (sr, sc) = self.step();
        (-h..=h).map(move |d| (d * sr, d * sc))
    }
}

pub fn check_window(window: usize) -> Result<()> {
    if window.is_multiple_of(2) || !(3..=33).contains(&window) {
        return Err(Error::domain(format!("smoothing window {window} must be odd and within 3..=33")));
    }
    Ok(())
}

/// Integer line sums around `(r, c)` for every direction.
pub fn directional_sums(img: &ImageBuffer, r: usize, c: usize, ch: usize, window: usize) -> [i64; 4] {
    Direction::ALL.map(|d| {
        d.offsets(window)
            .map(|(dr, dc)| i64::from(img.get_clamped(r as isize + dr, c as isize + dc, ch)))
            .sum()
    })
}

/// Index of the direction whose average is closest to the center, lowest index on ties.
pub fn select_direction(center: i64, sums: &[i64; 4], n: i64) -> usize {
    let mut best = 0;
    for (i, s) in sums.iter().enumerate().skip(1) {
        if (n * center - s).abs() < (n * center - sums[best]).abs() {
            best = i;
        }
    }
    best
}

/// Replaces each pixel by the directional average closest to it.
pub fn directional_smooth(img: &ImageBuffer, window: usize) -> Result<ImageBuffer> {
    check_window(window)?;
    let n = window as i64;
    let unit = img.unit();
    let data = (0..img.len())
        .into_par_iter()
        .map(|i| {
            let ch = i % img.channels();
            let pix = i / img.channels();
            let (r, c) = (pix / img.cols(), pix % img.cols());
            let sums = directional_sums(img, r, c, ch, window);
            let best = select_direction(i64::from(img.data()[i]), &sums, n);
            (sums[best] as f64 / n as f64).round().clamp(0.0, unit) as u16
        })
        .collect();
    ImageBuffer::new(img.rows(), img.cols(), img.channels(), img.bits(), data)
}

/// Gradient stores keep `D / (8 unit) + 0.5` on the normalized scale, i.e.
/// `(D + 4 unit) / 8` in levels, which lies in `[0, unit]` for Sobel responses.
pub fn offset_store(d: f64, unit: f64) -> f64 {
    (d + 4.0 * unit) / 8.0
}

pub fn offset_restore(s: f64, unit: f64) -> f64 {
    8.0 * s - 4.0 * unit
}

/// Sobel outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SobelOutput {
    /// `sqrt(Dx^2 + Dy^2)` in level units.
    pub magnitude: Raster,
    /// Magnitude scaled to `[0, 1]` by its maximum `4 sqrt(2) unit`.
    pub normalized: Raster,
    pub levels: ImageBuffer,
}

/// Shared magnitude stage, from restored gradients.
pub fn sobel_finish(dx: &Raster, dy: &Raster, bits: u32, unit: f64) -> Result<SobelOutput> {
    if dx.data().len() != dy.data().len() {
        return Err(Error::dims(dx.data().len(), dy.data().len()));
    }
    let full = 4.0 * std::f64::consts::SQRT_2 * unit;
    let magnitude: Vec<f64> = dx.data().iter().zip(dy.data()).map(|(x, y)| (x * x + y * y).sqrt()).collect();
    let normalized: Vec<f64> = magnitude.iter().map(|m| m / full).collect();
    let scaled: Vec<f64> = normalized.iter().map(|s| s * unit).collect();
    let levels = round_levels(&equalize(&scaled, bits, Equalizer::AffineMinMax)?, bits)?;
    Ok(SobelOutput {
        magnitude: dx.with_data(magnitude)?,
        normalized: dx.with_data(normalized)?,
        levels: ImageBuffer::new(dx.rows(), dx.cols(), 1, bits, levels)?,
    })
}

pub fn require_gray(img: &ImageBuffer) -> Result<()> {
    if img.channels() != 1 {
        return Err(Error::dims("single-channel image", format!("{} channels", img.channels())));
    }
    Ok(())
}

/// Sobel edge magnitude on a grayscale image.
pub fn sobel(img: &ImageBuffer) -> Result<SobelOutput> {
    require_gray(img)?;
    let unit = img.unit();
    let store = |d: Raster| d.map(|v| offset_restore(offset_store(v, unit), unit));
    let dx = store(convolve(img, &Kernel::sobel_h())?);
    let dy = store(convolve(img, &Kernel::sobel_v())?);
    sobel_finish(&dx, &dy, img.bits(), unit)
}

/// Luma with weights `0.2989, 0.5870, 0.1140`, rounded.
pub fn rgb_to_gray(img: &ImageBuffer) -> Result<ImageBuffer> {
    if img.channels() != 3 {
        return Err(Error::dims("3-channel image", format!("{} channels", img.channels())));
    }
    let unit = img.unit();
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| {
            let y = 0.2989 * f64::from(p[0]) + 0.5870 * f64::from(p[1]) + 0.1140 * f64::from(p[2]);
            y.round().clamp(0.0, unit) as u16
        })
        .collect();
    ImageBuffer::new(img.rows(), img.cols(), 1, img.bits(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_edge() -> ImageBuffer {
        ImageBuffer::from_fn(5, 6, 1, 8, |_, c, _| u16::from(c >= 3)).unwrap()
    }

    #[test]
    fn kernels() {
        assert_eq!(Kernel::sobel_h().sum(), 0.0);
        assert_eq!(Kernel::sobel_v().sum(), 0.0);
        assert!(Kernel::new(2, vec![0.0; 4]).is_err());
        assert!(Kernel::identity(4).is_err());
    }

    #[test]
    fn identity_and_mean() {
        let img = ImageBuffer::from_fn(4, 5, 3, 8, |r, c, ch| (r * 30 + c * 7 + ch) as u16).unwrap();
        assert_eq!(convolve(&img, &Kernel::identity(3).unwrap()).unwrap(), img.to_raster());
        let flat = ImageBuffer::filled(4, 4, 1, 8, 93).unwrap();
        for v in convolve(&flat, &Kernel::mean(3).unwrap()).unwrap().data() {
            assert!((v - 93.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_edge_response() {
        let img = step_edge();
        let dx = convolve(&img, &Kernel::sobel_h()).unwrap();
        let dy = convolve(&img, &Kernel::sobel_v()).unwrap();
        for r in 0..5 {
            assert_eq!(dx.get(r, 2, 0), 4.0);
            assert_eq!(dx.get(r, 3, 0), 4.0);
            assert_eq!(dx.get(r, 0, 0), 0.0);
            assert_eq!(dx.get(r, 5, 0), 0.0);
        }
        assert!(dy.data().iter().all(|&v| v == 0.0));
        let s = sobel(&img).unwrap();
        assert_eq!(s.magnitude.get(2, 3, 0), 4.0);
        assert_eq!(s.magnitude.get(2, 0, 0), 0.0);
    }

    #[test]
    fn sobel_constant_is_zero() {
        let s = sobel(&ImageBuffer::filled(6, 6, 1, 8, 200).unwrap()).unwrap();
        assert!(s.magnitude.data().iter().all(|&v| v == 0.0));
        assert!(s.levels.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn sobel_rejects_color() {
        assert!(sobel(&ImageBuffer::filled(3, 3, 3, 8, 1).unwrap()).is_err());
    }

    #[test]
    fn sobel_full_scale() {
        // corner of a 0/255 checker: both gradients at their extreme
        let img = ImageBuffer::from_fn(4, 4, 1, 8, |r, c, _| if r < 2 && c >= 2 { 255 } else { 0 }).unwrap();
        let s = sobel(&img).unwrap();
        assert!(s.normalized.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn ds_center_example() {
        let img = ImageBuffer::gray8(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).unwrap();
        assert_eq!(directional_smooth(&img, 3).unwrap().get(1, 1, 0), 5);
        assert!(directional_smooth(&img, 4).is_err());
        assert!(directional_smooth(&img, 35).is_err());
    }

    #[test]
    fn ds_constant() {
        let img = ImageBuffer::filled(7, 7, 3, 8, 42).unwrap();
        assert_eq!(directional_smooth(&img, 5).unwrap(), img);
    }

    #[test]
    fn ds_preserves_a_line() {
        // a one-pixel vertical line survives, a mean filter would blur it
        let img = ImageBuffer::from_fn(7, 7, 1, 8, |_, c, _| if c == 3 { 200 } else { 10 }).unwrap();
        assert_eq!(directional_smooth(&img, 3).unwrap(), img);
    }

    #[test]
    fn gray_conversion() {
        let px = |r, g, b| ImageBuffer::new(1, 1, 3, 8, vec![r, g, b]).unwrap();
        assert_eq!(rgb_to_gray(&px(255, 0, 0)).unwrap().data(), &[76]);
        assert_eq!(rgb_to_gray(&px(0, 0, 255)).unwrap().data(), &[29]);
        for v in [0, 1, 127, 128, 254, 255] {
            assert_eq!(rgb_to_gray(&px(v, v, v)).unwrap().data(), &[v]);
        }
        assert!(rgb_to_gray(&ImageBuffer::filled(1, 1, 1, 8, 0).unwrap()).is_err());
    }
}
