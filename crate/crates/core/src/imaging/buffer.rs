use crate::error::{Error, Result};
use crate::qstate::MAX_BITS;

/// An `rows x cols` raster of integer levels in `[0, 2^bits - 1]`, channels
/// interleaved in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    rows: usize,
    cols: usize,
    channels: usize,
    bits: u32,
    data: Vec<u16>,
}

fn check_shape(rows: usize, cols: usize, channels: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::dims("nonempty image", format!("{rows}x{cols}")));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::dims("1 or 3 channels", channels));
    }
    Ok(())
}

impl ImageBuffer {
    pub fn new(rows: usize, cols: usize, channels: usize, bits: u32, data: Vec<u16>) -> Result<Self> {
        check_shape(rows, cols, channels)?;
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::domain(format!("bit depth {bits} outside 1..={MAX_BITS}")));
        }
        if data.len() != rows * cols * channels {
            return Err(Error::dims(rows * cols * channels, data.len()));
        }
        let max = max_level(bits);
        if let Some(bad) = data.iter().find(|&&v| v > max) {
            return Err(Error::domain(format!("level {bad} exceeds {max} at {bits} bits")));
        }
        Ok(Self { rows, cols, channels, bits, data })
    }

    pub fn filled(rows: usize, cols: usize, channels: usize, bits: u32, level: u16) -> Result<Self> {
        Self::new(rows, cols, channels, bits, vec![level; rows * cols * channels])
    }

    /// Builds an image from `f(row, col, channel)`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        channels: usize,
        bits: u32,
        mut f: impl FnMut(usize, usize, usize) -> u16,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * channels);
        for r in 0..rows {
            for c in 0..cols {
                for ch in 0..channels {
                    data.push(f(r, c, ch));
                }
            }
        }
        Self::new(rows, cols, channels, bits, data)
    }

    /// 8-bit grayscale image from row slices.
    pub fn gray8(rows: &[&[u16]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::dims("rectangular rows", "ragged rows"));
        }
        Self::new(rows.len(), cols, 1, 8, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `2^bits - 1`.
    pub fn max_level(&self) -> u16 {
        max_level(self.bits)
    }

    pub fn unit(&self) -> f64 {
        f64::from(self.max_level())
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u16> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn index(&self, r: usize, c: usize, ch: usize) -> usize {
        (r * self.cols + c) * self.channels + ch
    }

    pub fn get(&self, r: usize, c: usize, ch: usize) -> u16 {
        self.data[self.index(r, c, ch)]
    }

    /// Pixel access with replicate padding.
    pub fn get_clamped(&self, r: isize, c: isize, ch: usize) -> u16 {
        let r = r.clamp(0, self.rows as isize - 1) as usize;
        let c = c.clamp(0, self.cols as isize - 1) as usize;
        self.get(r, c, ch)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.channels == other.channels
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::dims(self.shape_string(), other.shape_string()))
        }
    }

    pub fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.rows, self.cols, self.channels)
    }

    /// One channel as a grayscale image.
    pub fn channel(&self, ch: usize) -> Result<Self> {
        if ch >= self.channels {
            return Err(Error::dims(format!("channel < {}", self.channels), ch));
        }
        let data = self.data.iter().skip(ch).step_by(self.channels).copied().collect();
        Self::new(self.rows, self.cols, 1, self.bits, data)
    }

    /// Interleaves equally shaped grayscale planes.
    pub fn from_channels(planes: &[Self]) -> Result<Self> {
        let first = planes.first().ok_or_else(|| Error::dims("at least one plane", 0))?;
        for p in planes {
            if p.channels != 1 || p.rows != first.rows || p.cols != first.cols || p.bits != first.bits {
                return Err(Error::dims(first.shape_string(), p.shape_string()));
            }
        }
        let n = planes.len();
        let data = (0..first.rows * first.cols * n).map(|i| planes[i % n].data[i / n]).collect();
        Self::new(first.rows, first.cols, n, first.bits, data)
    }

    /// Applies `f` to each channel plane independently.
    pub fn map_channels(&self, mut f: impl FnMut(&Self) -> Result<Self>) -> Result<Self> {
        if self.channels == 1 {
            return f(self);
        }
        let planes = (0..self.channels).map(|ch| f(&self.channel(ch)?)).collect::<Result<Vec<_>>>()?;
        Self::from_channels(&planes)
    }

    /// Levels as reals, same layout.
    pub fn to_raster(&self) -> Raster {
        Raster {
            rows: self.rows,
            cols: self.cols,
            channels: self.channels,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    /// The 90-degree counter-clockwise rotation.
    pub fn rotated_ccw(&self) -> Self {
        let (rows, cols) = (self.cols, self.rows);
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..rows {
            for c in 0..cols {
                for ch in 0..self.channels {
                    data.push(self.get(c, self.cols - 1 - r, ch));
                }
            }
        }
        Self { rows, cols, channels: self.channels, bits: self.bits, data }
    }

    pub fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.cols {
            for c in 0..self.rows {
                for ch in 0..self.channels {
                    data.push(self.get(c, r, ch));
                }
            }
        }
        Self { rows: self.cols, cols: self.rows, channels: self.channels, bits: self.bits, data }
    }
}

/// `2^bits - 1` as a level.
pub fn max_level(bits: u32) -> u16 {
    ((1u32 << bits) - 1) as u16
}

/// Real-valued raster with the same layout as [`ImageBuffer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    rows: usize,
    cols: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(rows: usize, cols: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(rows, cols, channels)?;
        if data.len() != rows * cols * channels {
            return Err(Error::dims(rows * cols * channels, data.len()));
        }
        Ok(Self { rows, cols, channels, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize, ch: usize) -> f64 {
        self.data[(r * self.cols + c) * self.channels + ch]
    }

    pub fn same_shape_as(&self, img: &ImageBuffer) -> bool {
        self.rows == img.rows && self.cols == img.cols && self.channels == img.channels
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { data: self.data.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    /// Same layout with new values.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::new(self.rows, self.cols, self.channels, data)
    }

    pub fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.cols {
            for c in 0..self.rows {
                for ch in 0..self.channels {
                    data.push(self.get(c, r, ch));
                }
            }
        }
        Self { rows: self.cols, cols: self.rows, channels: self.channels, data }
    }
}
