//! Nonlocal-means denoisers.
//!
//! [`nlm_denoise`] is the classical row-normalized filter. [`dsg_nlm_denoise`]
//! applies the symmetric, doubly stochastic variant `W v` without ever
//! materializing `W`: three aggregation sweeps over the pixel pairs, with
//! patch distances read from summed-area tables so the per-pixel cost does
//! not depend on the patch size. [`build_dense_weights`] builds `W`
//! explicitly for small images and serves as a verification oracle.

mod dense;
mod dsg;
mod nlm;
mod patch;

pub use dense::{build_dense_weights, DenseWeights, DENSE_PIXEL_LIMIT};
pub use dsg::{dsg_nlm_denoise, dsg_nlm_denoise_brute_force, freeze_guide, FrozenGuide};
pub use nlm::nlm_denoise;
pub use patch::{hat_weight, nlm_kernel, patch_distance_map};

use crate::error::{Error, Result};

/// Patch side `N_p`, search-window radius `N_s` and kernel bandwidth.
///
/// The search window around `s` is the `(2 N_s + 1)^2` square clipped to
/// the image. Patches are `N_p x N_p` squares read from the symmetrically
/// reflected guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchParams {
    patch_side: usize,
    window_radius: usize,
    bandwidth: f64,
}

impl PatchParams {
    pub fn new(patch_side: usize, window_radius: usize, bandwidth: f64) -> Result<Self> {
        if patch_side == 0 || patch_side % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "patch side must be odd and positive, got {patch_side}"
            )));
        }
        if window_radius == 0 {
            return Err(Error::InvalidParameter("window radius must be at least 1".into()));
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self {
            patch_side,
            window_radius,
            bandwidth,
        })
    }

    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    pub fn window_radius(&self) -> usize {
        self.window_radius
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `(N_p - 1) / 2`
    pub fn patch_half(&self) -> usize {
        self.patch_side / 2
    }

    pub fn with_bandwidth(self, bandwidth: f64) -> Result<Self> {
        Self::new(self.patch_side, self.window_radius, bandwidth)
    }

    /// Factor multiplying a squared patch distance inside the exponential,
    /// `1 / (2 N_p^2 sigma^2)`.
    pub(crate) fn distance_scale(&self) -> f64 {
        let np = self.patch_side as f64;
        1.0 / (2.0 * np * np * self.bandwidth * self.bandwidth)
    }
}
