use crate::error::{Error, Result};
use crate::image::Image;

use super::patch::{hat_weight, nlm_kernel};
use super::PatchParams;

/// Largest image (in pixels) accepted by [`build_dense_weights`].
pub const DENSE_PIXEL_LIMIT: usize = 4096;

/// Explicit `n x n` DSG-NLM weight matrix, row-major, pixels in raster order.
#[derive(Debug, Clone)]
pub struct DenseWeights {
    n: usize,
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DenseWeights {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: usize, r: usize) -> f64 {
        self.data[s * self.n + r]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| row.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for row in self.data.chunks_exact(self.n) {
            for (acc, v) in sums.iter_mut().zip(row) {
                *acc += v;
            }
        }
        sums
    }

    /// `max |W - W^T|`
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..self.n {
            for r in (s + 1)..self.n {
                worst = worst.max((self.get(s, r) - self.get(r, s)).abs());
            }
        }
        worst
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Matrix-vector product `W input`.
    pub fn apply(&self, input: &Image) -> Result<Image> {
        if input.width() != self.width || input.height() != self.height {
            return Err(Error::DimensionMismatch(format!(
                "dense weights for {}x{} applied to {}x{}",
                self.width,
                self.height,
                input.width(),
                input.height()
            )));
        }
        let v = input.data();
        let out = self
            .data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(v).map(|(w, x)| w * x).sum())
            .collect();
        Image::new(self.width, self.height, out)
    }
}

/// Builds `W` by applying the three normalization steps literally to the
/// tapered kernel matrix: hat taper, `(row sum)^{-1/2} (column sum)^{-1/2}`
/// scaling, division by the maximum row sum, and the diagonal correction
/// that restores unit row sums.
pub fn build_dense_weights(guide: &Image, p: &PatchParams) -> Result<DenseWeights> {
    let (w, h) = (guide.width(), guide.height());
    let n = w * h;
    if n > DENSE_PIXEL_LIMIT {
        return Err(Error::ImageTooLarge {
            pixels: n,
            limit: DENSE_PIXEL_LIMIT,
        });
    }
    let ns = p.window_radius();
    let mut data = vec![0.0; n * n];
    for sy in 0..h {
        for sx in 0..w {
            let s = sy * w + sx;
            for ry in sy.saturating_sub(ns)..(sy + ns + 1).min(h) {
                for rx in sx.saturating_sub(ns)..(sx + ns + 1).min(w) {
                    let r = ry * w + rx;
                    data[s * n + r] = hat_weight((sx, sy), (rx, ry), ns) * nlm_kernel(guide, (sx, sy), (rx, ry), p);
                }
            }
        }
    }

    let mut weights = DenseWeights {
        n,
        width: w,
        height: h,
        data,
    };

    let rows = weights.row_sums();
    let cols = weights.col_sums();
    for (s, row) in weights.data.chunks_exact_mut(n).enumerate() {
        for (r, v) in row.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= (rows[s]).powf(-0.5) * (cols[r]).powf(-0.5);
            }
        }
    }

    let rows = weights.row_sums();
    let alpha = 1.0 / rows.iter().copied().fold(0.0, f64::max);
    for v in weights.data.iter_mut() {
        *v *= alpha;
    }
    let rows = weights.row_sums();
    for s in 0..n {
        weights.data[s * n + s] += 1.0 - rows[s];
    }
    Ok(weights)
}
