//! Windowed local statistics backed by summed-area tables.
//!
//! Two prefix-sum planes (over `I` and `I*I`) are built once over the
//! symmetrically padded image; every window mean/variance after that is a
//! constant number of lookups regardless of radius. Accumulation is in
//! `f64`; variances are clamped at zero after the subtraction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::ImageGrid;

/// Map an index onto `[0, n)` with symmetric (mirror-with-edge-duplication)
/// boundary extension: `-1 -> 0`, `-2 -> 1`, `n -> n-1`, `n+1 -> n-2`, ...
#[inline]
pub(crate) fn reflect(idx: isize, n: usize) -> usize {
    let n = n as isize;
    debug_assert!(n > 0);
    let period = 2 * n;
    let mut m = idx % period;
    if m < 0 {
        m += period;
    }
    let m = if m < n { m } else { period - 1 - m };
    m as usize
}

pub(crate) fn check_window(grid: &ImageGrid, radius: usize) -> Result<()> {
    let side = 2 * radius + 1;
    if side <= grid.width() && side <= grid.height() {
        Ok(())
    } else {
        Err(Error::WindowTooLarge {
            side,
            width: grid.width(),
            height: grid.height(),
        })
    }
}

/// Per-pixel window means and population variances.
#[derive(Debug, Clone)]
pub struct LocalStats {
    width: usize,
    height: usize,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl LocalStats {
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    #[inline]
    pub fn mean_at(&self, x: usize, y: usize) -> f64 {
        self.mean[y * self.width + x]
    }

    #[inline]
    pub fn variance_at(&self, x: usize, y: usize) -> f64 {
        self.variance[y * self.width + x]
    }
}

/// Window mean and population variance over the `(2r+1)^2` neighbourhood of
/// every pixel, with symmetric boundary padding.
pub fn local_stats(grid: &ImageGrid, radius: usize) -> Result<LocalStats> {
    check_window(grid, radius)?;
    let sums = WindowSums::build(grid, radius);
    let (width, height) = grid.dims();
    let mut mean = vec![0.0; width * height];
    let mut variance = vec![0.0; width * height];
    mean.par_chunks_mut(width)
        .zip(variance.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (mrow, vrow))| {
            for x in 0..width {
                let (m, v) = sums.stats(x, y);
                mrow[x] = m;
                vrow[x] = v;
            }
        });
    Ok(LocalStats {
        width,
        height,
        mean,
        variance,
    })
}

/// Prefix-sum planes over the padded image, indexed by original pixel
/// coordinates.
pub(crate) struct WindowSums {
    sat: Vec<f64>,
    sat_sq: Vec<f64>,
    /// Row stride of the tables (`padded width + 1`).
    cols: usize,
    radius: usize,
    inv_count: f64,
}

impl WindowSums {
    pub(crate) fn build(grid: &ImageGrid, radius: usize) -> Self {
        let (w, h) = grid.dims();
        let r = radius;
        let pw = w + 2 * r;
        let ph = h + 2 * r;
        let cols = pw + 1;
        let mut sat = vec![0.0; cols * (ph + 1)];
        let mut sat_sq = vec![0.0; cols * (ph + 1)];

        // Row pass: running sums of each padded row. Rows are independent.
        let pixels = grid.pixels();
        sat[cols..]
            .par_chunks_mut(cols)
            .zip(sat_sq[cols..].par_chunks_mut(cols))
            .enumerate()
            .for_each(|(py, (srow, qrow))| {
                let sy = reflect(py as isize - r as isize, h);
                let src = &pixels[sy * w..(sy + 1) * w];
                let mut acc = 0.0;
                let mut acc_sq = 0.0;
                for px in 0..pw {
                    let v = src[reflect(px as isize - r as isize, w)];
                    acc += v;
                    acc_sq += v * v;
                    srow[px + 1] = acc;
                    qrow[px + 1] = acc_sq;
                }
            });

        // Column pass: accumulate each row onto the next. Each output cell
        // is a fixed sequential sum down its column, so the result does not
        // depend on how the row pass was scheduled.
        for py in 1..=ph {
            let (prev, cur) = sat.split_at_mut(py * cols);
            let prev = &prev[(py - 1) * cols..];
            for (c, p) in cur[..cols].iter_mut().zip(prev) {
                *c += *p;
            }
            let (prev, cur) = sat_sq.split_at_mut(py * cols);
            let prev = &prev[(py - 1) * cols..];
            for (c, p) in cur[..cols].iter_mut().zip(prev) {
                *c += *p;
            }
        }

        let side = (2 * r + 1) as f64;
        WindowSums {
            sat,
            sat_sq,
            cols,
            radius,
            inv_count: 1.0 / (side * side),
        }
    }

    /// Sum and sum-of-squares of the window centred at original pixel
    /// `(x, y)`.
    #[inline]
    pub(crate) fn window_sums(&self, x: usize, y: usize) -> (f64, f64) {
        let span = 2 * self.radius + 1;
        let x1 = x + span;
        let y1 = y + span;
        let top = y * self.cols;
        let bottom = y1 * self.cols;
        let sum = self.sat[bottom + x1] - self.sat[bottom + x] - self.sat[top + x1]
            + self.sat[top + x];
        let sum_sq = self.sat_sq[bottom + x1] - self.sat_sq[bottom + x] - self.sat_sq[top + x1]
            + self.sat_sq[top + x];
        (sum, sum_sq)
    }

    /// Window mean and clamped population variance at `(x, y)`.
    #[inline]
    pub(crate) fn stats(&self, x: usize, y: usize) -> (f64, f64) {
        let (sum, sum_sq) = self.window_sums(x, y);
        let mean = sum * self.inv_count;
        let variance = (sum_sq * self.inv_count - mean * mean).max(0.0);
        (mean, variance)
    }
}
