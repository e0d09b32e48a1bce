//! MAD, MSD and PCQR between a classical and a quantum result.

use std::fmt;

use crate::error::{Error, Result};
use crate::imaging::{ImageBuffer, Raster};

/// Anything the metrics can compare: a shape and a flat list of samples.
pub trait Plane {
    fn shape(&self) -> (usize, usize, usize);
    fn samples(&self) -> Vec<f64>;
}

impl Plane for ImageBuffer {
    fn shape(&self) -> (usize, usize, usize) {
        (self.rows(), self.cols(), self.channels())
    }

    fn samples(&self) -> Vec<f64> {
        self.data().iter().map(|&v| f64::from(v)).collect()
    }
}

impl Plane for Raster {
    fn shape(&self) -> (usize, usize, usize) {
        (self.rows(), self.cols(), self.channels())
    }

    fn samples(&self) -> Vec<f64> {
        self.data().to_vec()
    }
}

fn paired<P: Plane + ?Sized>(a: &P, b: &P) -> Result<(Vec<f64>, Vec<f64>)> {
    let (sa, sb) = (a.shape(), b.shape());
    if sa != sb {
        return Err(Error::dims(format!("{}x{}x{}", sa.0, sa.1, sa.2), format!("{}x{}x{}", sb.0, sb.1, sb.2)));
    }
    Ok((a.samples(), b.samples()))
}

fn mean_of(a: &[f64], b: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| f(x - y)).sum::<f64>() / a.len() as f64
}

/// Mean absolute difference over all samples.
pub fn mad<P: Plane + ?Sized>(a: &P, b: &P) -> Result<f64> {
    let (a, b) = paired(a, b)?;
    Ok(mean_of(&a, &b, f64::abs))
}

/// Mean squared difference over all samples.
pub fn msd<P: Plane + ?Sized>(a: &P, b: &P) -> Result<f64> {
    let (a, b) = paired(a, b)?;
    Ok(mean_of(&a, &b, |d| d * d))
}

/// Peak classical-to-quantum ratio in dB; infinite when the images agree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pcqr {
    Finite(f64),
    Infinite,
}

impl Pcqr {
    pub fn value(&self) -> f64 {
        match self {
            Pcqr::Finite(v) => *v,
            Pcqr::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Pcqr::Infinite)
    }
}

impl fmt::Display for Pcqr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pcqr::Finite(v) => write!(f, "{v}"),
            Pcqr::Infinite => f.write_str("inf"),
        }
    }
}

/// `20 log10(peak / sqrt(msd))`.
pub fn pcqr_from_msd(msd: f64, peak: f64) -> Pcqr {
    if msd == 0.0 {
        Pcqr::Infinite
    } else {
        Pcqr::Finite(20.0 * (peak / msd.sqrt()).log10())
    }
}

fn peak_of<P: Plane + ?Sized>(classical: &P) -> f64 {
    classical.samples().into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// PCQR with the classical image's maximum as peak unless overridden.
pub fn pcqr<P: Plane + ?Sized>(classical: &P, quantum: &P, max_ref: Option<f64>) -> Result<Pcqr> {
    let m = msd(classical, quantum)?;
    Ok(pcqr_from_msd(m, max_ref.unwrap_or_else(|| peak_of(classical))))
}

/// All three metrics and the peak they used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mad: f64,
    pub msd: f64,
    pub pcqr: Pcqr,
    pub max_ref: f64,
}

impl MetricReport {
    pub fn compute<P: Plane + ?Sized>(classical: &P, quantum: &P, max_ref: Option<f64>) -> Result<Self> {
        let mad = mad(classical, quantum)?;
        let msd = msd(classical, quantum)?;
        let max_ref = max_ref.unwrap_or_else(|| peak_of(classical));
        Ok(Self { mad, msd, pcqr: pcqr_from_msd(msd, max_ref), max_ref })
    }
}
