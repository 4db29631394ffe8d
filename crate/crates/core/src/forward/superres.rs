//! Blur + downsample forward model `A`, its adjoint, and the quadratic
//! data term `f(x) = 0.5 ||y - A x||^2`.

use crate::error::{Error, Result};
use crate::image::{reflect_index, wrap_index, Image};

use super::kernel::BlurKernel;
use super::rng::Rng;
use super::DataTerm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Half-sample reflection, as in [`crate::image::pad_symmetric`].
    Symmetric,
}

impl Boundary {
    #[inline]
    fn extend(self, i: isize, n: usize) -> usize {
        match self {
            Boundary::Periodic => wrap_index(i, n),
            Boundary::Symmetric => reflect_index(i, n),
        }
    }
}

/// `A x`: convolve with `blur` under `boundary`, keep samples at `(k i, k j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperResOp {
    blur: BlurKernel,
    factor: usize,
    boundary: Boundary,
}

impl SuperResOp {
    pub fn new(blur: BlurKernel, factor: usize, boundary: Boundary) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidParameter("downsampling factor must be at least 1".into()));
        }
        Ok(SuperResOp { blur, factor, boundary })
    }

    pub fn blur(&self) -> &BlurKernel {
        &self.blur
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    fn check_high_res(&self, x: &Image) -> Result<()> {
        if x.width() % self.factor != 0 || x.height() % self.factor != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image is not divisible by factor {}",
                x.width(),
                x.height(),
                self.factor
            )));
        }
        Ok(())
    }

    /// `h(-i, -j)` in row-major order, so that a forward sweep over the
    /// taps visits `x(p + t)` in memory order.
    fn flipped_weights(&self) -> Vec<f64> {
        self.blur.weights().iter().rev().copied().collect()
    }

    /// Index table mapping `p + t + radius` to the extended source index.
    fn extension_table(&self, n: usize) -> Vec<usize> {
        let r = self.blur.radius() as isize;
        (-r..n as isize + r).map(|i| self.boundary.extend(i, n)).collect()
    }
}

pub fn sr_apply(op: &SuperResOp, x: &Image) -> Result<Image> {
    op.check_high_res(x)?;
    let k = op.factor;
    let (w, h) = (x.width(), x.height());
    let r = op.blur.radius();
    let side = 2 * r + 1;
    let cols = op.extension_table(w);
    let rows = op.extension_table(h);
    let flipped = op.flipped_weights();
    Ok(Image::from_fn(w / k, h / k, |a, b| {
        let (px, py) = (k * a, k * b);
        let interior = px >= r && px + r < w;
        let mut acc = 0.0;
        // out(p) = sum_t h(-t) x(p + t)
        for (jj, taps) in flipped.chunks_exact(side).enumerate() {
            let src = x.row(rows[py + jj]);
            if interior {
                acc += taps.iter().zip(&src[px - r..=px + r]).map(|(t, s)| t * s).sum::<f64>();
            } else {
                acc += taps
                    .iter()
                    .zip(&cols[px..px + side])
                    .map(|(t, &c)| t * src[c])
                    .sum::<f64>();
            }
        }
        acc
    }))
}

/// `A^T y`, requiring an axis-symmetric blur so that it equals zero-fill
/// upsampling followed by the same blur under the same boundary rule.
pub fn sr_adjoint(op: &SuperResOp, y: &Image) -> Result<Image> {
    if !op.blur.is_symmetric() {
        return Err(Error::NonSymmetricKernel);
    }
    let k = op.factor;
    let (w, h) = (y.width() * k, y.height() * k);
    let r = op.blur.radius();
    let side = 2 * r + 1;
    let cols = op.extension_table(w);
    let rows = op.extension_table(h);
    let flipped = op.flipped_weights();
    let mut out = Image::zeros(w, h);
    // Transpose of the gather in `sr_apply`.
    for b in 0..y.height() {
        for a in 0..y.width() {
            let v = y.get(a, b);
            if v == 0.0 {
                continue;
            }
            let (px, py) = (k * a, k * b);
            let interior = px >= r && px + r < w;
            for (jj, taps) in flipped.chunks_exact(side).enumerate() {
                let ty = rows[py + jj];
                let dst = &mut out.data_mut()[ty * w..(ty + 1) * w];
                if interior {
                    for (d, t) in dst[px - r..=px + r].iter_mut().zip(taps) {
                        *d += t * v;
                    }
                } else {
                    for (&c, t) in cols[px..px + side].iter().zip(taps) {
                        dst[c] += t * v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Full-resolution convolution `sum_{i,j} h(i, j) x(p - (i, j))` under
/// `boundary`.
pub fn convolve(x: &Image, blur: &BlurKernel, boundary: Boundary) -> Image {
    let op = SuperResOp {
        blur: blur.clone(),
        factor: 1,
        boundary,
    };
    sr_apply(&op, x).expect("factor 1 accepts any size")
}

/// Places `y(i, j)` at `(k i, k j)` of a zero image `k` times larger.
pub fn zero_fill_upsample(y: &Image, k: usize) -> Image {
    let mut out = Image::zeros(y.width() * k, y.height() * k);
    for b in 0..y.height() {
        for a in 0..y.width() {
            out.set(k * a, k * b, y.get(a, b));
        }
    }
    out
}

fn check_low_res(op: &SuperResOp, x: &Image, y: &Image) -> Result<()> {
    op.check_high_res(x)?;
    if x.width() / op.factor != y.width() || x.height() / op.factor != y.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} observation does not match {}x{} image at factor {}",
            y.width(),
            y.height(),
            x.width(),
            x.height(),
            op.factor
        )));
    }
    Ok(())
}

/// `0.5 ||y - A x||^2`
pub fn sr_data_term(op: &SuperResOp, x: &Image, y: &Image) -> Result<f64> {
    check_low_res(op, x, y)?;
    Ok(0.5 * sr_apply(op, x)?.sub(y).norm_sq())
}

/// `A^T (A x - y)`, the gradient of [`sr_data_term`].
pub fn sr_gradient(op: &SuperResOp, x: &Image, y: &Image) -> Result<Image> {
    check_low_res(op, x, y)?;
    sr_adjoint(op, &sr_apply(op, x)?.sub(y))
}

/// Largest eigenvalue of `A^T A` on `width x height` images by power
/// iteration from a seeded random start; returns the final Rayleigh
/// quotient `||A x||^2` with `||x|| = 1`.
pub fn power_iteration_lipschitz(op: &SuperResOp, width: usize, height: usize, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(Error::InvalidParameter(
            "power iteration needs at least one step".into(),
        ));
    }
    let mut rng = Rng::new(seed);
    let mut x = Image::from_fn(width, height, |_, _| rng.next_f64() - 0.5);
    op.check_high_res(&x)?;
    let mut estimate = 0.0;
    for _ in 0..iters {
        let norm = x.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x = x.scale(1.0 / norm);
        let ax = sr_apply(op, &x)?;
        estimate = ax.norm_sq();
        x = sr_adjoint(op, &ax)?;
    }
    Ok(estimate)
}

pub const POWER_ITERATIONS: usize = 200;

/// Safety factor applied to the Lipschitz estimate when choosing `alpha`.
pub const LIPSCHITZ_SAFETY: f64 = 1.05;

/// `y = A x + noise_sigma * n` with `n` standard normal in raster order.
pub fn sr_simulate(x: &Image, op: &SuperResOp, noise_sigma: f64, seed: u64) -> Result<Image> {
    if !(noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be nonnegative, got {noise_sigma}"
        )));
    }
    let mut y = sr_apply(op, x)?;
    if noise_sigma > 0.0 {
        let mut rng = Rng::new(seed);
        for v in y.data_mut() {
            *v += noise_sigma * rng.next_normal();
        }
    }
    Ok(y)
}

/// Quadratic super-resolution data term bound to an observation.
#[derive(Debug, Clone)]
pub struct SuperResProblem {
    pub op: SuperResOp,
    pub observation: Image,
}

impl SuperResProblem {
    pub fn new(op: SuperResOp, observation: Image) -> Self {
        SuperResProblem { op, observation }
    }

    pub fn high_res_dims(&self) -> (usize, usize) {
        (
            self.observation.width() * self.op.factor,
            self.observation.height() * self.op.factor,
        )
    }

    /// Starting image: zero-filled upsampling of the observation smoothed by
    /// the blur, scaled by `k^2` to keep the mean intensity (`k^2 A^T y`).
    pub fn initial_estimate(&self) -> Result<Image> {
        let k = self.op.factor as f64;
        Ok(sr_adjoint(&self.op, &self.observation)?.scale(k * k))
    }

    pub fn lipschitz(&self, seed: u64) -> Result<f64> {
        let (w, h) = self.high_res_dims();
        power_iteration_lipschitz(&self.op, w, h, POWER_ITERATIONS, seed)
    }

    /// `A^T y`
    pub fn adjoint_observation(&self) -> Result<Image> {
        sr_adjoint(&self.op, &self.observation)
    }

    /// `A^T A x`
    pub fn normal_apply(&self, x: &Image) -> Result<Image> {
        sr_adjoint(&self.op, &sr_apply(&self.op, x)?)
    }
}

impl DataTerm for SuperResProblem {
    fn gradient(&self, x: &Image) -> Result<Image> {
        sr_gradient(&self.op, x, &self.observation)
    }

    fn value(&self, x: &Image) -> Result<f64> {
        sr_data_term(&self.op, x, &self.observation)
    }
}
