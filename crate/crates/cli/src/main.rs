use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pao_core::estimator::{Mode, NoiseForm};
use pao_core::experiment::{absolute_difference, estimator_demo, run_pipeline, NoiseKind, PipelineConfig};
use pao_core::imaging::{
    classical_pipeline, quantum_pipeline, random_image, rgb_to_gray, synthetic_image, Algorithm, ImageBuffer,
};
use pao_core::interfaces::{c2q, q2c, ControlLoopConfig, InterfaceConfig, OseConfig};
use pao_core::io::{load_image, save_image};
use pao_core::metrics::MetricReport;
use pao_core::report::{append_rows, to_csv_string, ReportRow};
use pao_core::Result;

#[derive(Parser, Debug)]
#[command(name = "paoq", version, about = "Classical vs quantum (Bloch-projection) image filtering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inject salt & pepper or speckle noise.
    Noise(NoiseArgs),
    /// Directional smoothing of salt & pepper corrupted images.
    Denoise(FilterArgs),
    /// Directional smoothing of speckled images.
    Despeckle(FilterArgs),
    /// Sobel edge magnitude.
    Edges(EdgeArgs),
    /// Full experiment: noise, classical and quantum filtering, difference image, metrics.
    Pipeline(PipelineArgs),
    /// Compare two images.
    Metrics(MetricsArgs),
    /// Estimator demo on a random linear system.
    Estimate(EstimateArgs),
    /// Encode through the control loop and read back.
    Roundtrip(RoundtripArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum NoiseChoice {
    SaltPepper,
    Speckle,
    None,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Engine {
    Classical,
    Quantum,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AlgoChoice {
    Ds,
    Sobel,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeChoice {
    #[value(name = "I", alias = "1")]
    I,
    #[value(name = "II", alias = "2")]
    II,
}

impl From<ModeChoice> for Mode {
    fn from(m: ModeChoice) -> Self {
        match m {
            ModeChoice::I => Mode::I,
            ModeChoice::II => Mode::II,
        }
    }
}

/// Measurement, estimator and control-loop parameters of the quantum path.
#[derive(Args, Debug, Clone)]
struct QuantumArgs {
    /// Read-out mode.
    #[arg(long, value_enum, default_value = "I")]
    mode: ModeChoice,
    /// State noise variance Q on the qubit scale.
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Measurement noise variance R on the qubit scale.
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    /// Forgetting factor.
    #[arg(long, default_value_t = pao_core::estimator::DEFAULT_LAMBDA)]
    lambda: f64,
    /// Initial covariance scale.
    #[arg(long, default_value_t = pao_core::estimator::DEFAULT_DELTA)]
    delta: f64,
    /// Observations per pixel.
    #[arg(long, default_value_t = 16)]
    steps: u32,
    /// Fold state noise into the measurement noise.
    #[arg(long)]
    unique_noise: bool,
    /// Control-loop tolerance in levels.
    #[arg(long, default_value_t = 0.5)]
    tolerance: f64,
    /// Control-loop proportional gain.
    #[arg(long, default_value_t = 1.0)]
    gain: f64,
    /// Control-loop iteration limit.
    #[arg(long, default_value_t = 100)]
    max_iterations: u32,
}

impl QuantumArgs {
    fn ose(&self, seed: u64) -> Result<OseConfig> {
        let cfg = OseConfig {
            lambda: self.lambda,
            delta: self.delta,
            steps: self.steps,
            q: self.q,
            r: self.r,
            noise_form: if self.unique_noise { NoiseForm::Unique } else { NoiseForm::Full },
            seed,
        };
        cfg.validate()?;
        cfg.scalar_model(1.0)?;
        Ok(cfg)
    }

    fn control(&self) -> Result<ControlLoopConfig> {
        ControlLoopConfig::new(self.tolerance, self.gain, self.max_iterations)
    }
}

#[derive(Args, Debug)]
struct NoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "salt-pepper")]
    kind: NoiseChoice,
    /// Salt & pepper density.
    #[arg(long, default_value_t = 0.05)]
    density: f64,
    /// Speckle variance (unit-mean gamma field).
    #[arg(long, default_value_t = 0.05)]
    variance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct FilterArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Odd window size, 3 to 33.
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, value_enum, default_value = "classical")]
    engine: Engine,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    quantum: QuantumArgs,
}

#[derive(Args, Debug)]
struct EdgeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "classical")]
    engine: Engine,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    quantum: QuantumArgs,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// Input image; a synthetic scene is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Side of the synthetic scene.
    #[arg(long, default_value_t = 64)]
    synthetic_size: usize,
    /// Name written to the report (defaults to the input file stem).
    #[arg(long)]
    image_name: Option<String>,
    #[arg(long, value_enum, default_value = "ds")]
    algo: AlgoChoice,
    #[arg(long, default_value_t = 3)]
    window: usize,
    #[arg(long, value_enum, default_value = "salt-pepper")]
    noise: NoiseChoice,
    #[arg(long, default_value_t = 0.05)]
    noise_density: f64,
    #[arg(long, default_value_t = 0.05)]
    speckle_variance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Convert color input to gray before filtering.
    #[arg(long)]
    gray: bool,
    #[command(flatten)]
    quantum: QuantumArgs,
    /// Directory for the output images.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// CSV report to append to.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the unstretched difference image.
    #[arg(long)]
    raw_diff: bool,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Classical result.
    classical: PathBuf,
    /// Quantum result.
    quantum: PathBuf,
    /// Peak value; defaults to the classical image maximum.
    #[arg(long)]
    max_ref: Option<f64>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    algorithm: String,
    #[arg(long, default_value = "-")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// State dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1e6)]
    delta: f64,
    /// Measurement noise variance.
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct RoundtripArgs {
    /// Input image; a random image of `--bits` depth is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    size: usize,
    #[arg(long, default_value_t = 8)]
    bits: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    quantum: QuantumArgs,
}

fn noise_kind(choice: NoiseChoice, density: f64, variance: f64) -> NoiseKind {
    match choice {
        NoiseChoice::SaltPepper => NoiseKind::SaltPepper { density },
        NoiseChoice::Speckle => NoiseKind::Speckle { variance },
        NoiseChoice::None => NoiseKind::None,
    }
}

fn filter(img: &ImageBuffer, algorithm: Algorithm, engine: Engine, seed: u64, q: &QuantumArgs) -> Result<ImageBuffer> {
    match engine {
        Engine::Classical => Ok(classical_pipeline(img, algorithm)?.image),
        Engine::Quantum => {
            let iface = InterfaceConfig::new(img.bits(), q.mode.into())?;
            Ok(quantum_pipeline(img, algorithm, &q.control()?, &q.ose(seed)?, &iface)?.image)
        }
    }
}

fn cmd_noise(a: &NoiseArgs) -> Result<()> {
    let img = load_image(&a.input)?;
    let out = noise_kind(a.kind, a.density, a.variance).apply(&img, a.seed)?;
    save_image(&a.output, &out)
}

fn cmd_filter(a: &FilterArgs) -> Result<()> {
    let img = load_image(&a.input)?;
    let out = filter(&img, Algorithm::DirectionalSmoothing { window: a.window }, a.engine, a.seed, &a.quantum)?;
    save_image(&a.output, &out)
}

fn cmd_edges(a: &EdgeArgs) -> Result<()> {
    let mut img = load_image(&a.input)?;
    if img.channels() == 3 {
        img = rgb_to_gray(&img)?;
    }
    save_image(&a.output, &filter(&img, Algorithm::Sobel, a.engine, a.seed, &a.quantum)?)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "image".to_string(), |s| s.to_string_lossy().into_owned())
}

fn cmd_pipeline(a: &PipelineArgs) -> Result<()> {
    let (img, default_name) = match &a.input {
        Some(p) => (load_image(p)?, file_stem(p)),
        None => (synthetic_image(a.synthetic_size, a.synthetic_size, a.seed)?, format!("synthetic{}", a.synthetic_size)),
    };
    let algorithm = match a.algo {
        AlgoChoice::Ds => Algorithm::DirectionalSmoothing { window: a.window },
        AlgoChoice::Sobel => Algorithm::Sobel,
    };
    let mut cfg = PipelineConfig::new(
        a.image_name.clone().unwrap_or(default_name),
        algorithm,
        noise_kind(a.noise, a.noise_density, a.speckle_variance),
        a.seed,
        a.quantum.mode.into(),
    );
    cfg.ose = a.quantum.ose(a.seed)?;
    cfg.control = a.quantum.control()?;
    cfg.gray = a.gray;
    let run = run_pipeline(&img, &cfg)?;
    std::fs::create_dir_all(&a.out_dir)?;
    save_image(&a.out_dir.join("noisy.png"), &run.noisy)?;
    save_image(&a.out_dir.join("classical.png"), &run.classical.image)?;
    save_image(&a.out_dir.join("quantum.png"), &run.quantum.image)?;
    save_image(&a.out_dir.join("difference.png"), &run.difference)?;
    if a.raw_diff {
        save_image(&a.out_dir.join("difference_raw.png"), &run.raw_difference)?;
    }
    emit(&[run.row], a.report.as_deref())
}

fn emit(rows: &[ReportRow], report: Option<&Path>) -> Result<()> {
    print!("{}", to_csv_string(rows)?);
    if let Some(path) = report {
        append_rows(path, rows)?;
    }
    Ok(())
}

fn cmd_metrics(a: &MetricsArgs) -> Result<()> {
    let c = load_image(&a.classical)?;
    let q = load_image(&a.quantum)?;
    let m = MetricReport::compute(&c, &q, a.max_ref)?;
    let row = ReportRow::new(file_stem(&a.classical), a.algorithm.clone(), a.mode.clone(), a.seed, &m);
    emit(&[row], a.report.as_deref())
}

fn cmd_estimate(a: &EstimateArgs) -> Result<()> {
    let errors = estimator_demo(a.dim, a.steps, a.lambda, a.delta, a.r, a.seed)?;
    println!("step,relative_error");
    for (t, e) in errors.iter().enumerate() {
        println!("{},{e}", t + 1);
    }
    Ok(())
}

fn cmd_roundtrip(a: &RoundtripArgs) -> Result<()> {
    let img = match &a.input {
        Some(p) => load_image(p)?,
        None => {
            let base = random_image(a.size, a.size, 1, a.seed)?;
            let max = f64::from(pao_core::imaging::max_level(a.bits));
            ImageBuffer::from_fn(a.size, a.size, 1, a.bits, |r, c, _| {
                (f64::from(base.get(r, c, 0)) * max / 255.0).round() as u16
            })?
        }
    };
    let iface = InterfaceConfig::new(img.bits(), a.quantum.mode.into())?;
    let ose = a.quantum.ose(a.seed)?;
    let (states, report) = c2q(&img, &a.quantum.control()?, &iface, &ose)?;
    let back = q2c(&states, &ose, &iface)?;
    let diff = absolute_difference(&img, &back)?;
    let mismatched = diff.data().iter().filter(|&&d| d != 0).count();
    println!("pixels,mismatched,max_iterations,mean_iterations");
    println!("{},{mismatched},{},{}", img.len(), report.max_iterations(), report.mean_iterations());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Noise(a) => cmd_noise(a),
        Command::Denoise(a) | Command::Despeckle(a) => cmd_filter(a),
        Command::Edges(a) => cmd_edges(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("paoq: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
