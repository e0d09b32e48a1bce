//! Bloch-projection image encoding, simulated noisy measurement, a recursive
//! optimal state estimator, and classical vs quantum versions of directional
//! smoothing and Sobel edge detection compared by MAD, MSD and PCQR.

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod imaging;
pub mod interfaces;
pub mod io;
pub mod measurement;
pub mod metrics;
pub mod pao;
pub mod qstate;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
