//! Despeckling toolkit for SAR-style rasters.
//!
//! The crate is organised around one currency type, [`raster::ImageGrid`],
//! and four capability areas:
//!
//! - [`raster`]: grid representation, PNG/PGM/SGRID I/O, cropping,
//!   quantization for display export.
//! - [`synth`]: phantom scenes and seeded multiplicative gamma speckle for
//!   ground-truth evaluation.
//! - [`filters`]: Lee, Frost, Kuan, Gaussian, median, and bilateral
//!   despeckling, built on a shared summed-area-table statistics engine.
//! - [`metrics`]: PSNR, MSE, SSIM, ENL, and SSI.
//! - [`bench`]: config-driven benchmark runs rendering CSV/Markdown/JSON
//!   comparison tables.
//!
//! Everything is deterministic: filters read only their immutable input
//! with a fixed per-pixel accumulation order, so outputs are bit-identical
//! for any worker count, and speckle fields are reproducible from a seed.

pub mod bench;
pub mod error;
pub mod filters;
pub mod metrics;
pub mod raster;
pub mod synth;

pub use error::{Error, Result};
pub use filters::{apply_filter, FilterSpec};
pub use raster::{ImageGrid, QuantizeMode, RasterFormat, Region};
