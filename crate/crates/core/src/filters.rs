//! Despeckling filters over [`ImageGrid`].
//!
//! Six filters share the conventions fixed here: square `(2r+1)^2` windows,
//! symmetric boundary padding everywhere, and per-pixel accumulation in a
//! fixed order so results are bit-identical for any worker count.

mod adaptive;
mod smoothing;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ImageGrid;

pub use adaptive::{frost_filter, kuan_filter, lee_filter};
pub use smoothing::{bilateral_filter, gaussian_filter, median_filter};
pub use stats::{local_stats, LocalStats};

pub(crate) use smoothing::gaussian_taps;
pub(crate) use stats::reflect;

pub const DEFAULT_ADAPTIVE_RADIUS: usize = 3;
pub const DEFAULT_MEDIAN_RADIUS: usize = 1;
pub const DEFAULT_LOOKS: f64 = 1.0;
pub const DEFAULT_DAMPING: f64 = 2.0;
pub const DEFAULT_SIGMA_SPATIAL: f64 = 1.0;
/// Default `sigma_range` as a fraction of the image `max_value`.
pub const DEFAULT_SIGMA_RANGE_FRACTION: f64 = 0.1;

/// A filter choice with its parameter set.
///
/// `looks` is the number of looks `L` of the speckled input and defines the
/// noise variation `C_u^2 = 1/L`; it may be `inf` to model a noise-free
/// input. A missing bilateral `sigma_range` resolves to
/// `0.1 * max_value` of the image being filtered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterSpec {
    Lee {
        #[serde(default = "default_adaptive_radius")]
        window_radius: usize,
        #[serde(default = "default_looks")]
        looks: f64,
    },
    Frost {
        #[serde(default = "default_adaptive_radius")]
        window_radius: usize,
        #[serde(default = "default_looks")]
        looks: f64,
        #[serde(default = "default_damping")]
        damping: f64,
    },
    Kuan {
        #[serde(default = "default_adaptive_radius")]
        window_radius: usize,
        #[serde(default = "default_looks")]
        looks: f64,
    },
    Gaussian {
        #[serde(default = "default_sigma_spatial")]
        sigma_spatial: f64,
    },
    Median {
        #[serde(default = "default_median_radius")]
        window_radius: usize,
    },
    Bilateral {
        #[serde(default = "default_sigma_spatial")]
        sigma_spatial: f64,
        #[serde(default)]
        sigma_range: Option<f64>,
    },
}

fn default_adaptive_radius() -> usize {
    DEFAULT_ADAPTIVE_RADIUS
}

fn default_median_radius() -> usize {
    DEFAULT_MEDIAN_RADIUS
}

fn default_looks() -> f64 {
    DEFAULT_LOOKS
}

fn default_damping() -> f64 {
    DEFAULT_DAMPING
}

fn default_sigma_spatial() -> f64 {
    DEFAULT_SIGMA_SPATIAL
}

impl FilterSpec {
    pub fn lee(window_radius: usize, looks: f64) -> Self {
        FilterSpec::Lee {
            window_radius,
            looks,
        }
    }

    pub fn frost(window_radius: usize, looks: f64, damping: f64) -> Self {
        FilterSpec::Frost {
            window_radius,
            looks,
            damping,
        }
    }

    pub fn kuan(window_radius: usize, looks: f64) -> Self {
        FilterSpec::Kuan {
            window_radius,
            looks,
        }
    }

    pub fn gaussian(sigma_spatial: f64) -> Self {
        FilterSpec::Gaussian { sigma_spatial }
    }

    pub fn median(window_radius: usize) -> Self {
        FilterSpec::Median { window_radius }
    }

    pub fn bilateral(sigma_spatial: f64, sigma_range: f64) -> Self {
        FilterSpec::Bilateral {
            sigma_spatial,
            sigma_range: Some(sigma_range),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FilterSpec::Lee { .. } => "lee",
            FilterSpec::Frost { .. } => "frost",
            FilterSpec::Kuan { .. } => "kuan",
            FilterSpec::Gaussian { .. } => "gaussian",
            FilterSpec::Median { .. } => "median",
            FilterSpec::Bilateral { .. } => "bilateral",
        }
    }

    /// Check the parameter set against a target image.
    pub fn validate_for(&self, grid: &ImageGrid) -> Result<()> {
        match *self {
            FilterSpec::Lee {
                window_radius,
                looks,
            }
            | FilterSpec::Kuan {
                window_radius,
                looks,
            } => {
                check_radius(window_radius)?;
                stats::check_window(grid, window_radius)?;
                check_looks(looks)
            }
            FilterSpec::Frost {
                window_radius,
                looks,
                damping,
            } => {
                check_radius(window_radius)?;
                stats::check_window(grid, window_radius)?;
                check_looks(looks)?;
                check_positive(damping, "damping")
            }
            FilterSpec::Gaussian { sigma_spatial } => {
                check_positive(sigma_spatial, "sigma_spatial")
            }
            FilterSpec::Median { window_radius } => {
                check_radius(window_radius)?;
                stats::check_window(grid, window_radius)
            }
            FilterSpec::Bilateral {
                sigma_spatial,
                sigma_range,
            } => {
                check_positive(sigma_spatial, "sigma_spatial")?;
                match sigma_range {
                    Some(s) => check_positive(s, "sigma_range"),
                    None => Ok(()),
                }
            }
        }
    }
}

/// Apply the filter selected by `spec`. Output dimensions and `max_value`
/// equal the input's.
pub fn apply_filter(grid: &ImageGrid, spec: &FilterSpec) -> Result<ImageGrid> {
    spec.validate_for(grid)?;
    match *spec {
        FilterSpec::Lee {
            window_radius,
            looks,
        } => lee_filter(grid, window_radius, looks),
        FilterSpec::Frost {
            window_radius,
            damping,
            ..
        } => frost_filter(grid, window_radius, damping),
        FilterSpec::Kuan {
            window_radius,
            looks,
        } => kuan_filter(grid, window_radius, looks),
        FilterSpec::Gaussian { sigma_spatial } => gaussian_filter(grid, sigma_spatial),
        FilterSpec::Median { window_radius } => median_filter(grid, window_radius),
        FilterSpec::Bilateral {
            sigma_spatial,
            sigma_range,
        } => {
            let range =
                sigma_range.unwrap_or(DEFAULT_SIGMA_RANGE_FRACTION * grid.max_value());
            bilateral_filter(grid, sigma_spatial, range)
        }
    }
}

fn check_radius(radius: usize) -> Result<()> {
    if radius >= 1 {
        Ok(())
    } else {
        Err(Error::invalid_param("window_radius must be at least 1"))
    }
}

fn check_looks(looks: f64) -> Result<()> {
    // +inf is allowed: it models a noise-free input (C_u^2 = 0).
    if looks > 0.0 && !looks.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("looks must be positive, got {looks}")))
    }
}

fn check_positive(value: f64, name: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}
