use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::ImageBuffer;
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};

/// Gamma shape and scale of the multiplicative speckle field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeckleParams {
    pub shape: f64,
    pub scale: f64,
}

impl SpeckleParams {
    /// `shape = +inf` is the noise-free limit.
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if shape.is_nan() || shape < 1.0 {
            return Err(Error::domain(format!("speckle shape {shape} must be at least 1")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::domain(format!("speckle scale {scale} must be positive")));
        }
        Ok(Self { shape, scale })
    }

    /// Unit-mean speckle with variance `v` (`shape = 1 / v`).
    pub fn from_variance(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("speckle variance {v} outside [0, 1]")));
        }
        let shape = if v == 0.0 { f64::INFINITY } else { 1.0 / v };
        Self::new(shape, 1.0)
    }

    /// Variance of the normalized field `S`.
    pub fn variance(&self) -> f64 {
        1.0 / self.shape
    }

    pub fn is_identity(&self) -> bool {
        self.shape.is_infinite()
    }
}

/// `F(g) = g^(α-1) e^(-g/a) / ((α-1)! a^α)`.
pub fn gamma_pdf(g: f64, p: &SpeckleParams) -> Result<f64> {
    if g.is_nan() || g < 0.0 {
        return Err(Error::domain(format!("gamma density needs g >= 0, got {g}")));
    }
    if p.shape.is_infinite() {
        return Err(Error::domain("gamma density is undefined for infinite shape"));
    }
    let (alpha, a) = (p.shape, p.scale);
    if g == 0.0 {
        return Ok(if alpha == 1.0 { 1.0 / a } else { 0.0 });
    }
    let ln = (alpha - 1.0) * g.ln() - g / a - ln_gamma(alpha) - alpha * a.ln();
    Ok(ln.exp())
}

/// Sampler of the unit-mean field `S = G / (α a)`, `G ~ Gamma(α, a)`.
#[derive(Debug, Clone, Copy)]
pub struct SpeckleField {
    gamma: Option<Gamma<f64>>,
    norm: f64,
}

impl SpeckleField {
    pub fn new(p: &SpeckleParams) -> Result<Self> {
        if p.is_identity() {
            return Ok(Self { gamma: None, norm: 1.0 });
        }
        let gamma = Gamma::new(p.shape, p.scale).map_err(|e| Error::domain(format!("gamma parameters: {e}")))?;
        Ok(Self { gamma: Some(gamma), norm: p.shape * p.scale })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.gamma {
            None => 1.0,
            Some(g) => g.sample(rng) / self.norm,
        }
    }

    /// The draw for element `index`.
    pub fn at(&self, seed: u64, index: u64) -> f64 {
        match &self.gamma {
            None => 1.0,
            Some(_) => self.sample(&mut stream(seed, Purpose::Speckle, index, 0)),
        }
    }
}

/// `I_s = I S`, rounded and clamped to levels.
pub fn apply_speckle(img: &ImageBuffer, p: &SpeckleParams, seed: u64) -> Result<ImageBuffer> {
    let field = SpeckleField::new(p)?;
    if p.is_identity() {
        return Ok(img.clone());
    }
    let unit = img.unit();
    let data = img
        .data()
        .par_iter()
        .enumerate()
        .map(|(i, &v)| (f64::from(v) * field.at(seed, i as u64)).round().clamp(0.0, unit) as u16)
        .collect();
    ImageBuffer::new(img.rows(), img.cols(), img.channels(), img.bits(), data)
}

/// Replaces a `density` fraction of pixels (all channels) by 0 or full scale.
pub fn salt_pepper(img: &ImageBuffer, density: f64, seed: u64) -> Result<ImageBuffer> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::domain(format!("noise density {density} outside [0, 1]")));
    }
    let max = img.max_level();
    let chans = img.channels();
    let mut data = img.data().to_vec();
    data.par_chunks_mut(chans).enumerate().for_each(|(p, px)| {
        let mut rng = stream(seed, Purpose::SaltPepper, p as u64, 0);
        if rng.random::<f64>() < density {
            let level = if rng.random::<bool>() { max } else { 0 };
            px.fill(level);
        }
    });
    ImageBuffer::new(img.rows(), img.cols(), chans, img.bits(), data)
}
