use crate::error::{Error, Result};
use crate::image::Image;

/// Square blur kernel of odd side `2 * radius + 1`, nonnegative, unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct BlurKernel {
    radius: usize,
    data: Vec<f64>,
}

impl BlurKernel {
    /// Normalizes `weights` (row-major, odd square side) to unit sum.
    pub fn from_weights(side: usize, weights: Vec<f64>) -> Result<Self> {
        if side % 2 == 0 || weights.len() != side * side {
            return Err(Error::InvalidParameter(format!(
                "kernel must be an odd square, got side {side} with {} weights",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "kernel weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("kernel weights sum to zero".into()));
        }
        Ok(BlurKernel {
            radius: side / 2,
            data: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// Kernel stored as an image (e.g. read from a PFM file).
    pub fn from_image(img: &Image) -> Result<Self> {
        if img.width() != img.height() {
            return Err(Error::InvalidParameter(format!(
                "kernel image must be square, got {}x{}",
                img.width(),
                img.height()
            )));
        }
        Self::from_weights(img.width(), img.data().to_vec())
    }

    pub fn delta() -> Self {
        BlurKernel {
            radius: 0,
            data: vec![1.0],
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Weight at offset `(i, j)`, both in `-radius..=radius`.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let r = self.radius as isize;
        self.data[((j + r) * (2 * r + 1) + (i + r)) as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.data
    }

    /// Even in each axis: `h(i, j) = h(-i, j) = h(i, -j)` to `1e-12`
    /// relative to the largest weight.
    pub fn is_symmetric(&self) -> bool {
        let r = self.radius as isize;
        let tol = 1e-12 * self.data.iter().copied().fold(0.0, f64::max);
        (-r..=r).all(|j| {
            (-r..=r).all(|i| {
                let h = self.at(i, j);
                (h - self.at(-i, j)).abs() <= tol && (h - self.at(i, -j)).abs() <= tol
            })
        })
    }
}

/// Sampled Gaussian `exp(-(i^2 + j^2) / (2 sigma^2))` on a
/// `(2 radius + 1)^2` grid, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<BlurKernel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    if radius == 0 {
        return Err(Error::InvalidParameter(
            "gaussian kernel radius must be at least 1".into(),
        ));
    }
    let r = radius as isize;
    let two_var = 2.0 * sigma * sigma;
    let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
    for j in -r..=r {
        for i in -r..=r {
            weights.push((-((i * i + j * j) as f64) / two_var).exp());
        }
    }
    BlurKernel::from_weights(2 * radius + 1, weights)
}

/// `ceil(3 sigma)`, at least 1.
pub fn default_radius(sigma: f64) -> usize {
    ((3.0 * sigma).ceil() as usize).max(1)
}
