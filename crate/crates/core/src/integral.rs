//! Summed-area tables.

use crate::error::{Error, Result};
use crate::image::Image;

/// Zero-padded cumulative sums: entry `(i, j)` is the sum of source values
/// over rows `< i` and columns `< j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    sums: Vec<f64>,
}

impl IntegralImage {
    pub fn new(img: &Image) -> Self {
        let mut ii = IntegralImage {
            width: 0,
            height: 0,
            sums: Vec::new(),
        };
        ii.rebuild(img.width(), img.height(), img.data());
        ii
    }

    /// Recomputes the table for a `width`x`height` row-major buffer, reusing
    /// the allocation.
    pub(crate) fn rebuild(&mut self, width: usize, height: usize, src: &[f64]) {
        debug_assert_eq!(src.len(), width * height);
        let stride = width + 1;
        self.width = width;
        self.height = height;
        self.sums.clear();
        self.sums.resize(stride * (height + 1), 0.0);
        for y in 0..height {
            let row = &src[y * width..(y + 1) * width];
            let (above, rest) = self.sums.split_at_mut((y + 1) * stride);
            let prev = &above[y * stride..];
            let cur = &mut rest[..stride];
            let mut acc = 0.0;
            for x in 0..width {
                acc += row[x];
                cur[x + 1] = prev[x + 1] + acc;
            }
        }
    }

    /// Width of the source image (the table has one more column).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Cumulative entry at table row `i`, column `j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.sums[i * (self.width + 1) + j]
    }

    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, top: usize, left: usize, h: usize, w: usize) -> f64 {
        let stride = self.width + 1;
        let a = top * stride + left;
        let b = (top + h) * stride + left;
        self.sums[b + w] - self.sums[b] - self.sums[a + w] + self.sums[a]
    }

    /// Sum over the `size`x`size` box whose top-left source pixel is
    /// `(row = top, col = left)`, using four lookups.
    pub fn box_sum(&self, top: usize, left: usize, size: usize) -> Result<f64> {
        if size == 0 || top + size > self.height || left + size > self.width {
            return Err(Error::OutOfRange(format!(
                "{size}x{size} box at row {top}, col {left} outside {}x{}",
                self.width, self.height
            )));
        }
        Ok(self.rect_sum_unchecked(top, left, size, size))
    }
}

pub fn integral_image(img: &Image) -> IntegralImage {
    IntegralImage::new(img)
}
