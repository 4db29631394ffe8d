//! Dense grayscale image container and the pixel-wise operations shared by
//! every other module: boundary extension, projections and PSNR.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A pixel location `(x, y)`, column first.
pub type Pixel = (usize, usize);

/// Row-major 2-D field of `f64` intensities.
///
/// Values are nominally in `[0, 1]` but nothing is clamped on intermediates.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} image needs {} values, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; images have at least one pixel.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn ensure_same_dims(&self, other: &Image, what: &str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixel-wise combination of two images of equal size.
    ///
    /// # Panics
    /// If the dimensions differ.
    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Image {
        assert!(self.same_dims(other), "zip_map on images of different size");
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Image) -> Image {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Image) -> Image {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Image {
        self.map(|v| s * v)
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Image) {
        assert!(self.same_dims(other), "axpy on images of different size");
        for (d, &o) in self.data.iter_mut().zip(&other.data) {
            *d += a * o;
        }
    }

    pub fn dot(&self, other: &Image) -> f64 {
        assert!(self.same_dims(other), "dot on images of different size");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        assert!(self.same_dims(other), "max_abs_diff on images of different size");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copy of the `w`x`h` window whose top-left corner is `(left, top)`.
    pub fn crop(&self, left: usize, top: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || left + w > self.width || top + h > self.height {
            return Err(Error::OutOfRange(format!(
                "crop {w}x{h} at ({left},{top}) outside {}x{}",
                self.width, self.height
            )));
        }
        Ok(Image::from_fn(w, h, |x, y| self.get(left + x, top + y)))
    }
}

impl Index<Pixel> for Image {
    type Output = f64;

    #[inline]
    fn index(&self, (x, y): Pixel) -> &f64 {
        &self.data[y * self.width + x]
    }
}

impl IndexMut<Pixel> for Image {
    #[inline]
    fn index_mut(&mut self, (x, y): Pixel) -> &mut f64 {
        &mut self.data[y * self.width + x]
    }
}

/// Half-sample symmetric reflection of an index into `0..n`.
///
/// `-1 -> 0`, `-2 -> 1`, `n -> n-1`. Repeats with period `2n`, so any
/// integer maps to a valid index.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Periodic wrap of an index into `0..n`.
#[inline]
pub fn wrap_index(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

/// Extends the image by `margin` pixels on each side with half-sample
/// symmetric reflection (the edge pixel is repeated once, not skipped).
pub fn pad_symmetric(img: &Image, margin: usize) -> Result<Image> {
    let limit = img.width.min(img.height);
    if margin > limit {
        return Err(Error::MarginTooLarge { margin, limit });
    }
    Ok(pad_reflect(img, margin))
}

/// Same mapping as [`pad_symmetric`] without the single-reflection limit.
pub(crate) fn pad_reflect(img: &Image, margin: usize) -> Image {
    let m = margin as isize;
    let cols: Vec<usize> = (0..img.width + 2 * margin)
        .map(|x| reflect_index(x as isize - m, img.width))
        .collect();
    let mut data = Vec::with_capacity(cols.len() * (img.height + 2 * margin));
    for y in 0..img.height + 2 * margin {
        let row = img.row(reflect_index(y as isize - m, img.height));
        data.extend(cols.iter().map(|&c| row[c]));
    }
    Image {
        width: img.width + 2 * margin,
        height: img.height + 2 * margin,
        data,
    }
}

/// Closed convex set the linearized ADMM iterate is projected onto.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintSet {
    Unconstrained,
    NonNegative,
    Box { lo: f64, hi: f64 },
}

impl ConstraintSet {
    pub fn boxed(lo: f64, hi: f64) -> Result<Self> {
        let c = ConstraintSet::Box { lo, hi };
        c.validate()?;
        Ok(c)
    }

    pub fn unit_box() -> Self {
        ConstraintSet::Box { lo: 0.0, hi: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ConstraintSet::Box { lo, hi } if !(lo < hi) => Err(Error::InvalidParameter(format!(
                "box constraint needs lo < hi, got [{lo}, {hi}]"
            ))),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn project_value(&self, v: f64) -> f64 {
        match *self {
            ConstraintSet::Unconstrained => v,
            ConstraintSet::NonNegative => v.max(0.0),
            ConstraintSet::Box { lo, hi } => v.clamp(lo, hi),
        }
    }
}

/// Euclidean projection onto `c`, i.e. a per-pixel clamp.
pub fn project(img: &Image, c: ConstraintSet) -> Image {
    match c {
        ConstraintSet::Unconstrained => img.clone(),
        _ => img.map(|v| c.project_value(v)),
    }
}

pub fn project_in_place(img: &mut Image, c: ConstraintSet) {
    if c != ConstraintSet::Unconstrained {
        for v in img.data_mut() {
            *v = c.project_value(*v);
        }
    }
}

pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    reference.ensure_same_dims(test, "mse")?;
    let sse: f64 = reference
        .data
        .iter()
        .zip(&test.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sse / reference.len() as f64)
}

/// Peak signal-to-noise ratio in dB. Identical images give `+inf`.
pub fn psnr(reference: &Image, test: &Image, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "psnr peak must be positive, got {peak}"
        )));
    }
    let mse = mse(reference, test)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}
