//! Synthetic test scenes and seeded multiplicative speckle.
//!
//! Speckle follows the fully developed intensity model: i.i.d.
//! `Gamma(shape = L, scale = 1/L)` draws with mean 1 and variance `1/L`,
//! multiplied into a clean scene. Sampling uses the Marsaglia–Tsang method
//! (via `rand_distr::Gamma`) driven by a ChaCha8 stream, so a given
//! `(looks, seed, width, height)` always regenerates the identical field.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::raster::ImageGrid;

/// Dynamic-range ceiling assigned to generated phantoms.
pub const PHANTOM_MAX_VALUE: f64 = 255.0;

/// Parameters of the multiplicative gamma speckle model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeckleParams {
    /// Number of looks `L` (gamma shape); variance of the field is `1/L`.
    pub looks: f64,
    pub seed: u64,
}

impl SpeckleParams {
    pub fn new(looks: f64, seed: u64) -> Self {
        SpeckleParams { looks, seed }
    }
}

/// Ground-truth scene layouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhantomKind {
    Constant {
        level: f64,
    },
    /// Four equal rectangles (floor split), levels in row-major order:
    /// top-left, top-right, bottom-left, bottom-right.
    Quadrants {
        levels: [f64; 4],
    },
    /// Left half `low`, right half `high`, boundary at `floor(width / 2)`.
    StepEdge {
        low: f64,
        high: f64,
    },
    /// `count` single-pixel targets of value `amplitude` on a uniform
    /// background, placed row-major on a near-square lattice at even
    /// fractional offsets of each dimension.
    PointTargets {
        background: f64,
        amplitude: f64,
        count: usize,
    },
}

/// Generate a unit-mean speckle field with variance `1/looks`.
///
/// `max_value` of the result is 1.0. The same parameters always produce a
/// bit-identical field; pixels are drawn sequentially in row-major order.
pub fn generate_speckle_field(
    width: usize,
    height: usize,
    params: SpeckleParams,
) -> Result<ImageGrid> {
    if width == 0 || height == 0 {
        return Err(Error::invalid_param("field dimensions must be at least 1x1"));
    }
    if !params.looks.is_finite() || params.looks <= 0.0 {
        return Err(Error::invalid_param("looks must be positive and finite"));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::invalid_param("field dimensions overflow"))?;
    let gamma = Gamma::new(params.looks, 1.0 / params.looks)
        .map_err(|e| Error::InvalidParam(format!("gamma sampler: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pixels: Vec<f64> = (0..count).map(|_| gamma.sample(&mut rng)).collect();
    ImageGrid::new(width, height, pixels, 1.0)
}

/// Pixelwise product of a clean scene and a speckle field.
/// `max_value` is copied from `clean`.
pub fn apply_multiplicative(clean: &ImageGrid, field: &ImageGrid) -> Result<ImageGrid> {
    clean.check_same_dims(field)?;
    let pixels = clean
        .pixels()
        .iter()
        .zip(field.pixels())
        .map(|(c, f)| c * f)
        .collect();
    ImageGrid::new(clean.width(), clean.height(), pixels, clean.max_value())
}

/// Build a ground-truth phantom scene. `max_value` is
/// [`PHANTOM_MAX_VALUE`]; pixel levels are not constrained to it.
pub fn make_phantom(width: usize, height: usize, kind: PhantomKind) -> Result<ImageGrid> {
    if width == 0 || height == 0 {
        return Err(Error::invalid_param("phantom dimensions must be at least 1x1"));
    }
    let check_level = |v: f64, what: &str| -> Result<()> {
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!(
                "{what} must be finite and non-negative, got {v}"
            )))
        }
    };
    let pixels = match kind {
        PhantomKind::Constant { level } => {
            check_level(level, "level")?;
            vec![level; width * height]
        }
        PhantomKind::Quadrants { levels } => {
            for (i, l) in levels.iter().enumerate() {
                check_level(*l, &format!("quadrant level {}", i + 1))?;
            }
            if width < 2 || height < 2 {
                return Err(Error::invalid_param("quadrants phantom requires at least 2x2"));
            }
            let split_x = width / 2;
            let split_y = height / 2;
            let mut pixels = Vec::with_capacity(width * height);
            for y in 0..height {
                for x in 0..width {
                    let idx = usize::from(y >= split_y) * 2 + usize::from(x >= split_x);
                    pixels.push(levels[idx]);
                }
            }
            pixels
        }
        PhantomKind::StepEdge { low, high } => {
            check_level(low, "low")?;
            check_level(high, "high")?;
            let split_x = width / 2;
            let mut pixels = Vec::with_capacity(width * height);
            for _y in 0..height {
                for x in 0..width {
                    pixels.push(if x < split_x { low } else { high });
                }
            }
            pixels
        }
        PhantomKind::PointTargets {
            background,
            amplitude,
            count,
        } => {
            check_level(background, "background")?;
            check_level(amplitude, "amplitude")?;
            let mut pixels = vec![background; width * height];
            if count > 0 {
                let cols = (count as f64).sqrt().ceil() as usize;
                let rows = count.div_ceil(cols);
                for k in 0..count {
                    let row = k / cols;
                    let col = k % cols;
                    let x = width * (col + 1) / (cols + 1);
                    let y = height * (row + 1) / (rows + 1);
                    pixels[y.min(height - 1) * width + x.min(width - 1)] = amplitude;
                }
            }
            pixels
        }
    };
    ImageGrid::new(width, height, pixels, PHANTOM_MAX_VALUE)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_phantom() {
        let g = make_phantom(4, 4, PhantomKind::Constant { level: 128.0 }).unwrap();
        assert!(g.pixels().iter().all(|&v| v == 128.0));
        assert_eq!(g.max_value(), 255.0);
    }

    #[test]
    fn quadrants_phantom_layout() {
        let g = make_phantom(
            4,
            4,
            PhantomKind::Quadrants {
                levels: [50.0, 100.0, 150.0, 200.0],
            },
        )
        .unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let expected = match (y < 2, x < 2) {
                    (true, true) => 50.0,
                    (true, false) => 100.0,
                    (false, true) => 150.0,
                    (false, false) => 200.0,
                };
                assert_eq!(g.get(x, y), expected, "pixel ({x},{y})");
            }
        }
    }

    #[test]
    fn step_edge_phantom() {
        let g = make_phantom(4, 1, PhantomKind::StepEdge { low: 0.0, high: 255.0 }).unwrap();
        assert_eq!(g.pixels(), &[0.0, 0.0, 255.0, 255.0]);
    }

    #[test]
    fn point_targets_deterministic_and_counted() {
        let kind = PhantomKind::PointTargets {
            background: 10.0,
            amplitude: 200.0,
            count: 5,
        };
        let a = make_phantom(64, 64, kind).unwrap();
        let b = make_phantom(64, 64, kind).unwrap();
        assert_eq!(a, b);
        let hits = a.pixels().iter().filter(|&&v| v == 200.0).count();
        assert_eq!(hits, 5);
        // single target lands at the centre
        let c = make_phantom(9, 9, PhantomKind::PointTargets {
            background: 0.0,
            amplitude: 1.0,
            count: 1,
        })
        .unwrap();
        assert_eq!(c.get(4, 4), 1.0);
    }

    #[test]
    fn invalid_phantom_params() {
        assert!(make_phantom(1, 4, PhantomKind::Quadrants { levels: [1.0; 4] }).is_err());
        assert!(make_phantom(4, 4, PhantomKind::Constant { level: -1.0 }).is_err());
    }

    #[test]
    fn speckle_rejects_nonpositive_looks() {
        assert!(matches!(
            generate_speckle_field(8, 8, SpeckleParams::new(0.0, 1)),
            Err(Error::InvalidParam(_))
        ));
    }

    #[test]
    fn speckle_is_seed_stable() {
        let p = SpeckleParams::new(1.0, 42);
        let a = generate_speckle_field(32, 32, p).unwrap();
        let b = generate_speckle_field(32, 32, p).unwrap();
        assert_eq!(a, b);
        let c = generate_speckle_field(32, 32, SpeckleParams::new(1.0, 43)).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.max_value(), 1.0);
    }

    #[test]
    fn speckle_moments_are_plausible() {
        let p = SpeckleParams::new(4.0, 7);
        let g = generate_speckle_field(500, 500, p).unwrap();
        let n = g.pixels().len() as f64;
        let mean = g.pixels().iter().sum::<f64>() / n;
        let var = g.pixels().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
        assert!((var - 0.25).abs() < 0.02, "var {var}");
    }

    #[test]
    fn multiplicative_examples() {
        let clean = ImageGrid::new(2, 1, vec![2.0, 3.0], 255.0).unwrap();
        let field = ImageGrid::new(2, 1, vec![0.5, 2.0], 1.0).unwrap();
        let noisy = apply_multiplicative(&clean, &field).unwrap();
        assert_eq!(noisy.pixels(), &[1.0, 6.0]);
        assert_eq!(noisy.max_value(), 255.0);

        let ones = ImageGrid::constant(2, 1, 1.0, 1.0).unwrap();
        let same = apply_multiplicative(&clean, &ones).unwrap();
        assert_eq!(same.pixels(), clean.pixels());

        let small = ImageGrid::constant(3, 3, 1.0, 1.0).unwrap();
        assert!(matches!(
            apply_multiplicative(&clean, &small),
            Err(Error::DimensionMismatch(..))
        ));
    }
}
