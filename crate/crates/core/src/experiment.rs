//! One classical-vs-quantum experiment: corrupt, filter both ways, compare.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimator::{init, step, Mode, SystemModel};
use crate::imaging::{
    apply_speckle, classical_pipeline, quantum_pipeline, rgb_to_gray, salt_pepper, Algorithm, ImageBuffer, PipelineOutput,
    SpeckleParams,
};
use crate::interfaces::{ControlLoopConfig, InterfaceConfig, OseConfig};
use crate::measurement::{measure_with_noise, NoiseSpec};
use crate::metrics::MetricReport;
use crate::report::ReportRow;
use crate::rng::{stream, Purpose};

/// Corruption applied before filtering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    None,
    SaltPepper { density: f64 },
    Speckle { variance: f64 },
}

impl NoiseKind {
    pub fn apply(&self, img: &ImageBuffer, seed: u64) -> Result<ImageBuffer> {
        match *self {
            NoiseKind::None => Ok(img.clone()),
            NoiseKind::SaltPepper { density } => salt_pepper(img, density, seed),
            NoiseKind::Speckle { variance } => apply_speckle(img, &SpeckleParams::from_variance(variance)?, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub image_name: String,
    pub algorithm: Algorithm,
    pub noise: NoiseKind,
    pub seed: u64,
    pub mode: Mode,
    /// Measurement/estimation settings; the seed is taken from `seed`.
    pub ose: OseConfig,
    pub control: ControlLoopConfig,
    /// Convert color input to gray first (always done for Sobel).
    pub gray: bool,
}

impl PipelineConfig {
    pub fn new(image_name: impl Into<String>, algorithm: Algorithm, noise: NoiseKind, seed: u64, mode: Mode) -> Self {
        Self {
            image_name: image_name.into(),
            algorithm,
            noise,
            seed,
            mode,
            ose: OseConfig::default(),
            control: ControlLoopConfig::default(),
            gray: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub noisy: ImageBuffer,
    pub classical: PipelineOutput,
    pub quantum: PipelineOutput,
    /// `|classical - quantum|` stretched for display.
    pub difference: ImageBuffer,
    /// `|classical - quantum|` in levels.
    pub raw_difference: ImageBuffer,
    pub metrics: MetricReport,
    pub row: ReportRow,
}

/// Pixelwise `|a - b|`.
pub fn absolute_difference(a: &ImageBuffer, b: &ImageBuffer) -> Result<ImageBuffer> {
    a.check_same_shape(b)?;
    if a.bits() != b.bits() {
        return Err(Error::dims(format!("{} bits", a.bits()), format!("{} bits", b.bits())));
    }
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| x.abs_diff(y)).collect();
    ImageBuffer::new(a.rows(), a.cols(), a.channels(), a.bits(), data)
}

/// Maps `[min, max]` onto the full level range; a flat image becomes black.
pub fn stretch(img: &ImageBuffer) -> ImageBuffer {
    let min = img.data().iter().copied().min().unwrap_or(0);
    let max = img.data().iter().copied().max().unwrap_or(0);
    let unit = img.unit();
    let data = if max == min {
        vec![0; img.len()]
    } else {
        let scale = unit / f64::from(max - min);
        img.data().iter().map(|&v| (f64::from(v - min) * scale).round() as u16).collect()
    };
    ImageBuffer::new(img.rows(), img.cols(), img.channels(), img.bits(), data).expect("levels stay in range")
}

pub fn run_pipeline(input: &ImageBuffer, cfg: &PipelineConfig) -> Result<PipelineRun> {
    let base = if input.channels() == 3 && (cfg.gray || cfg.algorithm == Algorithm::Sobel) {
        rgb_to_gray(input)?
    } else {
        input.clone()
    };
    let noisy = cfg.noise.apply(&base, cfg.seed)?;
    let iface = InterfaceConfig::new(noisy.bits(), cfg.mode)?;
    let ose = OseConfig { seed: cfg.seed, ..cfg.ose };
    let classical = classical_pipeline(&noisy, cfg.algorithm)?;
    let quantum = quantum_pipeline(&noisy, cfg.algorithm, &cfg.control, &ose, &iface)?;
    let metrics = match (&classical.normalized, &quantum.normalized) {
        (Some(c), Some(q)) => MetricReport::compute(c, q, Some(1.0))?,
        _ => MetricReport::compute(&classical.image, &quantum.image, None)?,
    };
    let raw_difference = absolute_difference(&classical.image, &quantum.image)?;
    let difference = stretch(&raw_difference);
    let row = ReportRow::new(cfg.image_name.clone(), cfg.algorithm.name(), cfg.mode.to_string(), cfg.seed, &metrics);
    Ok(PipelineRun { noisy, classical, quantum, difference, raw_difference, metrics, row })
}

/// Random rotation-like `A` (orthogonal) and well-conditioned `M`
/// (singular values in `[0.5, 2]`) of size `n`.
pub fn random_system(n: usize, seed: u64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n == 0 {
        return Err(Error::domain("system dimension must be positive"));
    }
    let mut rng = stream(seed, Purpose::Estimation, 0, 0);
    let gaussian = |rng: &mut rand_chacha::ChaCha8Rng| DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let a = gaussian(&mut rng).qr().q();
    let u = gaussian(&mut rng).qr().q();
    let v = gaussian(&mut rng).qr().q();
    let s = DVector::from_fn(n, |_, _| rng.random_range(0.5..=2.0));
    Ok((a, u * DMatrix::from_diagonal(&s) * v.transpose()))
}

/// Tracks a random system from a zero initial estimate and returns the
/// relative state error after each step.
pub fn estimator_demo(n: usize, steps: usize, lambda: f64, delta: f64, r: f64, seed: u64) -> Result<Vec<f64>> {
    let (a, m) = random_system(n, seed)?;
    let mut model = SystemModel::new(a.clone(), m.clone(), lambda, delta)?;
    let noise = NoiseSpec::new(DMatrix::zeros(n, n), DMatrix::identity(n, n) * r, seed)?;
    if r > 0.0 {
        model = model.with_noise(noise.clone())?;
    }
    let mut rng = stream(seed, Purpose::Estimation, 1, 0);
    let mut x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut est = init(&model, DVector::zeros(n))?;
    let mut errors = Vec::with_capacity(steps);
    for t in 0..steps {
        x = &a * &x;
        let y = measure_with_noise(&x, &m, &noise, &mut stream(seed, Purpose::MeasurementNoise, 0, t as u64))?;
        est = step(&est, &model, &y)?.0;
        errors.push((&est.x_hat - &x).norm() / x.norm());
    }
    Ok(errors)
}
