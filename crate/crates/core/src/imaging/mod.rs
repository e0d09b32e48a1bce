//! Rasters, noise models, directional smoothing, Sobel edges and the
//! classical and quantum filter pipelines.

mod buffer;
mod filters;
mod noise;
mod quantum;
mod synthetic;

pub use buffer::{max_level, ImageBuffer, Raster};
pub use filters::{
    check_window, convolve, convolve_raster, directional_smooth, directional_sums, offset_restore, offset_store, rgb_to_gray,
    select_direction, sobel, sobel_finish, Direction, Kernel, SobelOutput,
};
pub use noise::{apply_speckle, gamma_pdf, salt_pepper, SpeckleField, SpeckleParams};
pub use quantum::{classical_pipeline, quantum_correlate, quantum_directional_smooth, quantum_pipeline, Algorithm, PipelineOutput};
pub use synthetic::{random_image, synthetic_image};
