//! Quantum-to-classical read-out (Modes I and II), the closed-loop
//! classical-to-quantum source, and the equalizer/rounder.
//!
//! Pixel convention: a gray level `g` is the converted value `mu`, so the
//! state prepared for it has `alpha = unit - g`. A [`QuantumImage`] stores
//! either those states ([`Domain::Psi`], read out in Mode I) or their
//! quantum-converted forms ([`Domain::Mu`], read out in Mode II), whose first
//! component is `g` itself.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{Mode, NoiseForm, ScalarModel, DEFAULT_DELTA, DEFAULT_LAMBDA};
use crate::imaging::{ImageBuffer, Raster};
use crate::measurement::z_channel;
use crate::pao::Domain;
use crate::qstate::{full_scale, Ket, MAX_BITS};
use crate::rng::{stream, Purpose};

/// Range mapping applied before rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Equalizer {
    /// Affine map of `[min(0, lo), max(unit, hi)]` onto `[0, unit]`, where
    /// `lo`/`hi` are the data extremes. In-range data passes through unchanged.
    #[default]
    AffineMinMax,
    /// Clamp to `[0, unit]` only.
    IdentityClamp,
}

/// Bit depth, read-out mode and equalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfaceConfig {
    pub bits: u32,
    pub mode: Mode,
    pub equalizer: Equalizer,
}

impl InterfaceConfig {
    pub fn new(bits: u32, mode: Mode) -> Result<Self> {
        full_scale(bits)?;
        Ok(Self { bits, mode, equalizer: Equalizer::default() })
    }

    pub fn with_equalizer(mut self, equalizer: Equalizer) -> Self {
        self.equalizer = equalizer;
        self
    }

    pub fn unit(&self) -> f64 {
        full_scale(self.bits).expect("validated bit depth")
    }

    /// Representation the states carry in this mode.
    pub fn representation(&self) -> Domain {
        match self.mode {
            Mode::I => Domain::Psi,
            Mode::II => Domain::Mu,
        }
    }
}

/// Proportional controller of the qubit source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlLoopConfig {
    /// Set-point tolerance in levels.
    pub tolerance: f64,
    pub gain: f64,
    pub max_iterations: u32,
}

impl Default for ControlLoopConfig {
    fn default() -> Self {
        Self { tolerance: 0.5, gain: 1.0, max_iterations: 100 }
    }
}

impl ControlLoopConfig {
    pub fn new(tolerance: f64, gain: f64, max_iterations: u32) -> Result<Self> {
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::domain(format!("control tolerance {tolerance} must be positive")));
        }
        if !gain.is_finite() {
            return Err(Error::domain("control gain must be finite"));
        }
        if max_iterations < 1 {
            return Err(Error::domain("max_iterations must be at least 1"));
        }
        Ok(Self { tolerance, gain, max_iterations })
    }
}

/// Per-element measurement and estimation settings. `q` and `r` are variances
/// on the qubit scale (`alpha` in `[0, 1]`); they are rescaled to levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OseConfig {
    pub lambda: f64,
    pub delta: f64,
    /// Observations per element.
    pub steps: u32,
    pub q: f64,
    pub r: f64,
    pub noise_form: NoiseForm,
    pub seed: u64,
}

impl Default for OseConfig {
    fn default() -> Self {
        Self { lambda: DEFAULT_LAMBDA, delta: DEFAULT_DELTA, steps: 16, q: 0.0, r: 0.0, noise_form: NoiseForm::Full, seed: 0 }
    }
}

impl OseConfig {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn noisy(q: f64, r: f64, seed: u64) -> Self {
        Self { q, r, seed, ..Self::default() }
    }

    pub fn is_noiseless(&self) -> bool {
        self.q == 0.0 && self.r == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::domain("at least one observation per element is required"));
        }
        if !(self.q >= 0.0 && self.r >= 0.0 && self.q.is_finite() && self.r.is_finite()) {
            return Err(Error::domain(format!("noise variances q={} r={} must be finite and nonnegative", self.q, self.r)));
        }
        Ok(())
    }

    /// Estimator for one element on a scale of `unit`.
    pub fn scalar_model(&self, unit: f64) -> Result<ScalarModel> {
        self.validate()?;
        let m = z_channel()[(0, 0)];
        let noise = (!self.is_noiseless()).then_some((self.q * unit * unit, self.r * unit * unit));
        let mut model = ScalarModel::new(1.0, m, self.lambda, self.delta, noise)?;
        model.noise_form = self.noise_form;
        Ok(model)
    }
}

/// Which streams feed one read-out.
#[derive(Debug, Clone, Copy)]
struct Channel {
    measurement: Purpose,
    state: Purpose,
    index: u64,
    step0: u64,
}

/// Measures a constant first component `steps` times and runs the estimator.
fn measure_and_estimate(x: f64, model: &ScalarModel, cfg: &OseConfig, unit: f64, ch: Channel) -> Result<f64> {
    let q_sd = cfg.q.sqrt() * unit;
    let r_sd = cfg.r.sqrt() * unit;
    let mut truth = x;
    let mut est = None;
    for t in 0..u64::from(cfg.steps) {
        if q_sd > 0.0 {
            let z: f64 = stream(cfg.seed, ch.state, ch.index, ch.step0 + t).sample(StandardNormal);
            truth += q_sd * z;
        }
        let mut y = model.m * truth;
        if r_sd > 0.0 {
            let z: f64 = stream(cfg.seed, ch.measurement, ch.index, ch.step0 + t).sample(StandardNormal);
            y += r_sd * z;
        }
        let current = match est {
            None => model.init(y / model.m),
            Some(e) => e,
        };
        est = Some(model.step(current, y)?);
    }
    Ok(est.expect("steps >= 1").x_hat)
}

/// Per-element states of an image.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumImage {
    rows: usize,
    cols: usize,
    channels: usize,
    bits: u32,
    representation: Domain,
    kets: Vec<Ket>,
}

impl QuantumImage {
    pub fn new(rows: usize, cols: usize, channels: usize, bits: u32, representation: Domain, kets: Vec<Ket>) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::domain(format!("bit depth {bits} outside 1..={MAX_BITS}")));
        }
        if kets.len() != rows * cols * channels || kets.is_empty() {
            return Err(Error::dims(rows * cols * channels, kets.len()));
        }
        Ok(Self { rows, cols, channels, bits, representation, kets })
    }

    /// States for pixel values `values` (level scale) in the given representation.
    pub fn from_values(values: &Raster, bits: u32, representation: Domain) -> Result<Self> {
        let unit = full_scale(bits)?;
        let kets = values.data().iter().map(|&v| prepare(v, unit, representation)).collect();
        Self::new(values.rows(), values.cols(), values.channels(), bits, representation, kets)
    }

    /// Exact encoding of an image, without the control loop.
    pub fn encode(img: &ImageBuffer, representation: Domain) -> Result<Self> {
        Self::from_values(&img.to_raster(), img.bits(), representation)
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

    pub fn unit(&self) -> f64 {
        full_scale(self.bits).expect("validated bit depth")
    }

    pub fn representation(&self) -> Domain {
        self.representation
    }

    pub fn mode(&self) -> Mode {
        match self.representation {
            Domain::Psi => Mode::I,
            Domain::Mu => Mode::II,
        }
    }

    /// Arithmetic domain in which operands read as pixel values.
    pub fn arith_domain(&self) -> Domain {
        match self.representation {
            Domain::Psi => Domain::Mu,
            Domain::Mu => Domain::Psi,
        }
    }

    pub fn kets(&self) -> &[Ket] {
        &self.kets
    }

    pub fn ket(&self, r: usize, c: usize, ch: usize) -> &Ket {
        &self.kets[(r * self.cols + c) * self.channels + ch]
    }

    /// Pixel access with replicate padding.
    pub fn ket_clamped(&self, r: isize, c: isize, ch: usize) -> &Ket {
        let r = r.clamp(0, self.rows as isize - 1) as usize;
        let c = c.clamp(0, self.cols as isize - 1) as usize;
        self.ket(r, c, ch)
    }

    /// Noise-free pixel values.
    pub fn exact_values(&self) -> Vec<f64> {
        let unit = self.unit();
        self.kets.iter().map(|k| pixel_value(k.first(), unit, self.representation)).collect()
    }

    fn coords(&self, i: usize) -> (usize, usize, usize) {
        let ch = i % self.channels;
        let pix = i / self.channels;
        (pix / self.cols, pix % self.cols, ch)
    }

    fn at_pixel(&self, i: usize, e: Error) -> Error {
        let (row, col, channel) = self.coords(i);
        Error::AtPixel { row, col, channel, source: Box::new(e) }
    }
}

/// The state carrying pixel value `v`.
pub fn prepare(v: f64, unit: f64, representation: Domain) -> Ket {
    let psi = Ket::level(unit - v, unit);
    match representation {
        Domain::Psi => psi,
        Domain::Mu => psi.converted(unit),
    }
}

/// Pixel value of an estimated first component.
fn pixel_value(first: f64, unit: f64, representation: Domain) -> f64 {
    match representation {
        // classical converter
        Domain::Psi => unit - first,
        // the switch: read the converted component directly
        Domain::Mu => first,
    }
}

/// Measures every element `steps` times, estimates its first component and
/// converts it to a pixel value. `lane`/`lanes` interleave several images that
/// share pixel indices onto disjoint noise streams.
pub fn q2c_estimate_lane(img: &QuantumImage, ose: &OseConfig, lane: u64, lanes: u64) -> Result<Raster> {
    let unit = img.unit();
    let model = ose.scalar_model(unit)?;
    let values = img
        .kets
        .par_iter()
        .enumerate()
        .map(|(i, k)| {
            let ch = Channel {
                measurement: Purpose::MeasurementNoise,
                state: Purpose::StateNoise,
                index: i as u64 * lanes + lane,
                step0: 0,
            };
            measure_and_estimate(k.first(), &model, ose, unit, ch)
                .map(|x| pixel_value(x, unit, img.representation))
                .map_err(|e| img.at_pixel(i, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Raster::new(img.rows, img.cols, img.channels, values)
}

/// Estimated pixel values before equalization.
pub fn q2c_estimate(img: &QuantumImage, ose: &OseConfig) -> Result<Raster> {
    q2c_estimate_lane(img, ose, 0, 1)
}

/// Maps reals onto `[0, 2^bits - 1]`.
pub fn equalize(values: &[f64], bits: u32, equalizer: Equalizer) -> Result<Vec<f64>> {
    let unit = full_scale(bits)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("equalizer input must be finite"));
    }
    let clamp = |v: f64| v.clamp(0.0, unit);
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if equalizer == Equalizer::IdentityClamp || values.is_empty() || min == max {
        return Ok(values.iter().map(|&v| clamp(v)).collect());
    }
    let lo = min.min(0.0);
    let hi = max.max(unit);
    let scale = unit / (hi - lo);
    Ok(values.iter().map(|&v| clamp((v - lo) * scale)).collect())
}

/// Round half away from zero, then clamp to `[0, 2^bits - 1]`.
pub fn round_levels(values: &[f64], bits: u32) -> Result<Vec<u16>> {
    let unit = full_scale(bits)?;
    Ok(values.iter().map(|v| v.round().clamp(0.0, unit) as u16).collect())
}

fn finish(values: Raster, iface: &InterfaceConfig) -> Result<ImageBuffer> {
    let eq = equalize(values.data(), iface.bits, iface.equalizer)?;
    let levels = round_levels(&eq, iface.bits)?;
    ImageBuffer::new(values.rows(), values.cols(), values.channels(), iface.bits, levels)
}

fn check_read_out(img: &QuantumImage, iface: &InterfaceConfig, mode: Mode) -> Result<()> {
    if img.mode() != mode {
        return Err(Error::domain(format!("Mode {mode} read-out needs Mode {mode} states, got Mode {}", img.mode())));
    }
    if img.bits != iface.bits {
        return Err(Error::domain(format!("image has {} bits, interface {}", img.bits, iface.bits)));
    }
    Ok(())
}

/// Mode I: measure `alpha`, estimate, classical converter, equalize, round.
pub fn q2c_mode1(img: &QuantumImage, ose: &OseConfig, iface: &InterfaceConfig) -> Result<ImageBuffer> {
    check_read_out(img, iface, Mode::I)?;
    finish(q2c_estimate(img, ose)?, iface)
}

/// Mode II: measure the converted component, estimate, equalize, round.
pub fn q2c_mode2(img: &QuantumImage, ose: &OseConfig, iface: &InterfaceConfig) -> Result<ImageBuffer> {
    check_read_out(img, iface, Mode::II)?;
    finish(q2c_estimate(img, ose)?, iface)
}

/// Read-out in the interface's mode.
pub fn q2c(img: &QuantumImage, ose: &OseConfig, iface: &InterfaceConfig) -> Result<ImageBuffer> {
    match iface.mode {
        Mode::I => q2c_mode1(img, ose, iface),
        Mode::II => q2c_mode2(img, ose, iface),
    }
}

/// Corrections applied per element before latching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct C2qReport {
    pub iterations: Vec<u32>,
}

impl C2qReport {
    pub fn max_iterations(&self) -> u32 {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().map(|&i| f64::from(i)).sum::<f64>() / self.iterations.len() as f64
    }
}

/// Closed-loop preparation of one element. Returns the latched value and the
/// number of corrections.
fn control_element(target: f64, index: u64, ctl: &ControlLoopConfig, model: &ScalarModel, ose: &OseConfig, unit: f64) -> Result<Option<(f64, u32)>> {
    let mut v = 0.0;
    let mut corrections = 0;
    loop {
        let alpha = prepare(v, unit, Domain::Psi).first();
        let ch = Channel {
            measurement: Purpose::ControlLoop,
            state: Purpose::ControlLoopState,
            index,
            step0: u64::from(corrections) * u64::from(ose.steps),
        };
        let reading = pixel_value(measure_and_estimate(alpha, model, ose, unit, ch)?, unit, Domain::Psi);
        let error = target - reading;
        if error.abs() <= ctl.tolerance {
            return Ok(Some((v, corrections)));
        }
        if corrections >= ctl.max_iterations {
            return Ok(None);
        }
        v += ctl.gain * error;
        corrections += 1;
    }
}

/// Prepares a state per element by driving the qubit source until its Mode I
/// reading matches the pixel level, then latches it in the interface's
/// representation.
pub fn c2q(img: &ImageBuffer, ctl: &ControlLoopConfig, iface: &InterfaceConfig, ose: &OseConfig) -> Result<(QuantumImage, C2qReport)> {
    ControlLoopConfig::new(ctl.tolerance, ctl.gain, ctl.max_iterations)?;
    if img.bits() != iface.bits {
        return Err(Error::domain(format!("image has {} bits, interface {}", img.bits(), iface.bits)));
    }
    let unit = iface.unit();
    let model = ose.scalar_model(unit)?;
    let results = img
        .data()
        .par_iter()
        .enumerate()
        .map(|(i, &g)| control_element(f64::from(g), i as u64, ctl, &model, ose, unit))
        .collect::<Result<Vec<_>>>()?;
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| r.is_none()).map(|(i, _)| i).collect();
    if !failed.is_empty() {
        return Err(Error::NonConvergence { pixels: failed });
    }
    let (values, iterations): (Vec<f64>, Vec<u32>) = results.into_iter().map(|r| r.expect("checked")).unzip();
    let raster = Raster::new(img.rows(), img.cols(), img.channels(), values)?;
    let qimg = QuantumImage::from_values(&raster, iface.bits, iface.representation())?;
    Ok((qimg, C2qReport { iterations }))
}
