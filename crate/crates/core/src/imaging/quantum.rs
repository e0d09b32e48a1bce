//! Filters evaluated with projection arithmetic on encoded states, and the
//! end-to-end classical and quantum pipelines.

use rayon::prelude::*;

use super::filters::{check_window, offset_restore, require_gray, sobel, sobel_finish, Direction, Kernel};
use super::{directional_smooth, ImageBuffer, Raster};
use crate::error::{Error, Result};
use crate::interfaces::{c2q, prepare, q2c, q2c_estimate_lane, C2qReport, ControlLoopConfig, InterfaceConfig, OseConfig, QuantumImage};
use crate::pao::{Domain, PaoArithmetic};
use crate::qstate::Ket;

/// Filter run by a pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    DirectionalSmoothing { window: usize },
    Sobel,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::DirectionalSmoothing { .. } => "ds",
            Algorithm::Sobel => "sobel",
        }
    }
}

fn at_pixel(q: &QuantumImage, i: usize, e: Error) -> Error {
    let ch = i % q.channels();
    let pix = i / q.channels();
    Error::AtPixel { row: pix / q.cols(), col: pix % q.cols(), channel: ch, source: Box::new(e) }
}

/// Directional smoothing on states. Line sums and the center multiple are
/// formed with n-ary addition in the pixel-value domain, their difference and
/// the final average in the derived domain.
pub fn quantum_directional_smooth(q: &QuantumImage, window: usize) -> Result<QuantumImage> {
    check_window(window)?;
    let unit = q.unit();
    let arith = PaoArithmetic::with_unit(unit);
    let d = q.arith_domain();
    let count = arith.constant(window as f64, Domain::Psi);
    let repr = q.representation();
    let kets = (0..q.kets().len())
        .into_par_iter()
        .map(|i| {
            let ch = i % q.channels();
            let pix = i / q.channels();
            let (r, c) = ((pix / q.cols()) as isize, (pix % q.cols()) as isize);
            let center = *q.ket(r as usize, c as usize, ch);
            let n_center = arith.sum(&vec![center; window], d).as_ket();
            let mut best: Option<(f64, Ket)> = None;
            let mut line = Vec::with_capacity(window);
            for dir in Direction::ALL {
                line.clear();
                line.extend(dir.offsets(window).map(|(dr, dc)| *q.ket_clamped(r + dr, c + dc, ch)));
                let sum = arith.sum(&line, d).as_ket();
                let gap = arith.sub(&sum, &n_center, Domain::Psi).first().abs();
                if best.is_none_or(|(g, _)| gap < g) {
                    best = Some((gap, sum));
                }
            }
            let (_, sum) = best.expect("four directions");
            let avg = arith.div_first(&sum, &count, Domain::Psi).map_err(|e| at_pixel(q, i, e))?;
            Ok(prepare(avg, unit, repr))
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumImage::new(q.rows(), q.cols(), q.channels(), q.bits(), repr, kets)
}

/// Weighted correlation on states: every tap is a product with a constant,
/// positive and negative taps are summed separately and subtracted.
pub fn quantum_correlate(q: &QuantumImage, k: &Kernel) -> Result<Raster> {
    let arith = PaoArithmetic::with_unit(q.unit());
    let d = q.arith_domain();
    let taps: Vec<_> = k.taps().map(|(dr, dc, w)| (dr, dc, w > 0.0, arith.constant(w.abs(), d))).collect();
    let values = (0..q.kets().len())
        .into_par_iter()
        .map(|i| {
            let ch = i % q.channels();
            let pix = i / q.channels();
            let (r, c) = ((pix / q.cols()) as isize, (pix % q.cols()) as isize);
            let mut pos = Vec::with_capacity(taps.len());
            let mut neg = Vec::with_capacity(taps.len());
            for (dr, dc, positive, weight) in &taps {
                let term = arith.mul(q.ket_clamped(r + dr, c + dc, ch), weight, d).as_ket();
                if *positive { pos.push(term) } else { neg.push(term) }
            }
            let pos = arith.sum(&pos, Domain::Psi).as_ket();
            let neg = arith.sum(&neg, Domain::Psi).as_ket();
            arith.sub(&pos, &neg, Domain::Psi).first()
        })
        .collect();
    Raster::new(q.rows(), q.cols(), q.channels(), values)
}

/// Offset gradient stores `(D + 4 unit) / 8`, formed with projection arithmetic.
fn quantum_offset_store(d: &Raster, unit: f64) -> Result<Raster> {
    let arith = PaoArithmetic::with_unit(unit);
    let offset = arith.constant(4.0 * unit, Domain::Psi);
    let eight = arith.constant(8.0, Domain::Psi);
    let data = d
        .data()
        .iter()
        .map(|&v| {
            let shifted = arith.add(&Ket::real(v, 0.0), &offset, Domain::Psi).as_ket();
            arith.div_first(&shifted, &eight, Domain::Psi)
        })
        .collect::<Result<Vec<_>>>()?;
    d.with_data(data)
}

/// Result of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub image: ImageBuffer,
    /// Edge magnitudes on `[0, 1]` (Sobel only).
    pub normalized: Option<Raster>,
    /// Control-loop iterations (quantum only).
    pub c2q: Option<C2qReport>,
}

pub fn classical_pipeline(img: &ImageBuffer, algorithm: Algorithm) -> Result<PipelineOutput> {
    match algorithm {
        Algorithm::DirectionalSmoothing { window } => {
            Ok(PipelineOutput { image: directional_smooth(img, window)?, normalized: None, c2q: None })
        }
        Algorithm::Sobel => {
            let s = sobel(img)?;
            Ok(PipelineOutput { image: s.levels, normalized: Some(s.normalized), c2q: None })
        }
    }
}

/// Encode through the control loop, filter with projection arithmetic,
/// measure and estimate, read out. With all noise zero the result equals
/// [`classical_pipeline`].
pub fn quantum_pipeline(
    img: &ImageBuffer,
    algorithm: Algorithm,
    ctl: &ControlLoopConfig,
    ose: &OseConfig,
    iface: &InterfaceConfig,
) -> Result<PipelineOutput> {
    if algorithm == Algorithm::Sobel {
        require_gray(img)?;
    }
    let (q, report) = c2q(img, ctl, iface, ose)?;
    match algorithm {
        Algorithm::DirectionalSmoothing { window } => {
            let smoothed = quantum_directional_smooth(&q, window)?;
            Ok(PipelineOutput { image: q2c(&smoothed, ose, iface)?, normalized: None, c2q: Some(report) })
        }
        Algorithm::Sobel => {
            let unit = q.unit();
            let repr = q.representation();
            let stores = [Kernel::sobel_h(), Kernel::sobel_v()]
                .iter()
                .map(|k| {
                    let s = quantum_offset_store(&quantum_correlate(&q, k)?, unit)?;
                    QuantumImage::from_values(&s, q.bits(), repr)
                })
                .collect::<Result<Vec<_>>>()?;
            let dx = q2c_estimate_lane(&stores[0], ose, 0, 2)?.map(|s| offset_restore(s, unit));
            let dy = q2c_estimate_lane(&stores[1], ose, 1, 2)?.map(|s| offset_restore(s, unit));
            let out = sobel_finish(&dx, &dy, q.bits(), unit)?;
            Ok(PipelineOutput { image: out.levels, normalized: Some(out.normalized), c2q: Some(report) })
        }
    }
}
