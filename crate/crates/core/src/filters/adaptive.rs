//! Adaptive local-statistics filters: Lee, Kuan, and Frost.
//!
//! All three derive per-pixel behaviour from the window mean and variance.
//! The noise coefficient of variation squared is `C_u^2 = 1/looks`; the
//! local (image) counterpart is `C_I^2 = var / mean^2`, defined as 0 for
//! zero-mean windows, which carry no multiplicative-noise information.

use rayon::prelude::*;

use crate::error::Result;
use crate::raster::ImageGrid;

use super::stats::{check_window, reflect, WindowSums};
use super::{check_looks, check_positive, check_radius};

/// Lee MMSE filter: `out = mean + W * (x - mean)` with
/// `W = v_x / (v_x + mean^2 * C_u^2)` and signal variance
/// `v_x = max(0, (var - mean^2 * C_u^2) / (1 + C_u^2))`.
pub fn lee_filter(grid: &ImageGrid, window_radius: usize, looks: f64) -> Result<ImageGrid> {
    check_radius(window_radius)?;
    check_window(grid, window_radius)?;
    check_looks(looks)?;
    let cu2 = 1.0 / looks;
    let sums = WindowSums::build(grid, window_radius);
    let (width, height) = grid.dims();
    let pixels = grid.pixels();
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let (mean, var) = sums.stats(x, y);
            let noise = mean * mean * cu2;
            let signal = ((var - noise) / (1.0 + cu2)).max(0.0);
            let denom = signal + noise;
            let weight = if denom == 0.0 { 0.0 } else { signal / denom };
            let value = pixels[y * width + x];
            // weight 1 must reproduce the input bit-exactly
            *slot = if weight == 1.0 {
                value
            } else {
                mean + weight * (value - mean)
            };
        }
    });
    Ok(ImageGrid::from_valid_parts(
        width,
        height,
        out,
        grid.max_value(),
    ))
}

/// Kuan filter: `out = mean + W * (x - mean)` with
/// `W = clamp01((1 - C_u^2 / C_I^2) / (1 + C_u^2))`, `W = 0` when
/// `C_I^2 = 0`.
pub fn kuan_filter(grid: &ImageGrid, window_radius: usize, looks: f64) -> Result<ImageGrid> {
    check_radius(window_radius)?;
    check_window(grid, window_radius)?;
    check_looks(looks)?;
    let cu2 = 1.0 / looks;
    let sums = WindowSums::build(grid, window_radius);
    let (width, height) = grid.dims();
    let pixels = grid.pixels();
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let (mean, var) = sums.stats(x, y);
            let ci2 = if mean == 0.0 { 0.0 } else { var / (mean * mean) };
            let weight = if ci2 == 0.0 {
                0.0
            } else {
                ((1.0 - cu2 / ci2) / (1.0 + cu2)).clamp(0.0, 1.0)
            };
            let value = pixels[y * width + x];
            *slot = if weight == 1.0 {
                value
            } else {
                mean + weight * (value - mean)
            };
        }
    });
    Ok(ImageGrid::from_valid_parts(
        width,
        height,
        out,
        grid.max_value(),
    ))
}

/// Frost filter: every window neighbour `q` is weighted by
/// `exp(-damping * C_I^2 * dist(p, q))` with Euclidean pixel distance, and
/// the output is the weighted window mean.
pub fn frost_filter(grid: &ImageGrid, window_radius: usize, damping: f64) -> Result<ImageGrid> {
    check_radius(window_radius)?;
    check_window(grid, window_radius)?;
    check_positive(damping, "damping")?;
    let sums = WindowSums::build(grid, window_radius);
    let (width, height) = grid.dims();
    let pixels = grid.pixels();
    let r = window_radius as isize;
    let distances: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| ((dx * dx + dy * dy) as f64).sqrt()))
        .collect();
    let mut out = vec![0.0; width * height];
    out.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for (x, slot) in row.iter_mut().enumerate() {
            let (mean, var) = sums.stats(x, y);
            let ci2 = if mean == 0.0 { 0.0 } else { var / (mean * mean) };
            let decay = damping * ci2;
            let mut num = 0.0;
            let mut den = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                let sy = reflect(y as isize + dy, height);
                let src = &pixels[sy * width..(sy + 1) * width];
                for dx in -r..=r {
                    let v = src[reflect(x as isize + dx, width)];
                    let m = (-decay * distances[k]).exp();
                    k += 1;
                    num += m * v;
                    den += m;
                }
            }
            *slot = num / den;
        }
    });
    Ok(ImageGrid::from_valid_parts(
        width,
        height,
        out,
        grid.max_value(),
    ))
}
