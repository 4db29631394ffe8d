//! Doubly stochastic NLM as three aggregation sweeps.
//!
//! With `c_{s,r} = Lambda_{s,r} k_{s,r}` the operator is
//!
//! ```text
//! g_s     = sum_{r in Omega_s} c_{s,r}                          (sweep 1)
//! m       = max_s sum_{r in Omega_s} c_{s,r} / sqrt(g_s g_r)    (sweep 2)
//! w_{s,r} = c_{s,r} / (m sqrt(g_s g_r))
//! out_s   = sum_r w_{s,r} v_r + (1 - sum_r w_{s,r}) v_s         (sweep 3)
//! ```
//!
//! Sweeps 1 and 2 depend only on the guide, so a [`FrozenGuide`] keeps `g`
//! and `m` and every later application costs one sweep.

use crate::error::Result;
use crate::image::Image;

use super::patch::{for_each_pair, sweep_guide, DistanceMethod, PaddedGuide};
use super::PatchParams;

/// Lower bound applied to `g_s` before taking `g_s^{-1/2}`.
const ROW_SUM_FLOOR: f64 = 1e-300;

/// Guide snapshot with its normalization; applying it is a fixed linear map.
#[derive(Debug, Clone)]
pub struct FrozenGuide {
    guide: Image,
    params: PatchParams,
    method: DistanceMethod,
    inv_sqrt_row: Vec<f64>,
    inv_max: f64,
}

impl FrozenGuide {
    fn build(guide: &Image, p: &PatchParams, method: DistanceMethod) -> Self {
        let padded = sweep_guide(guide, p);
        let n = guide.len();

        let mut g = vec![1.0; n];
        for_each_pair(&padded, p, true, method, |s, r, c| {
            g[s] += c;
            g[r] += c;
        });
        let inv_sqrt_row: Vec<f64> = g.iter().map(|&v| 1.0 / v.max(ROW_SUM_FLOOR).sqrt()).collect();

        let mut delta: Vec<f64> = inv_sqrt_row.iter().map(|v| v * v).collect();
        for_each_pair(&padded, p, true, method, |s, r, c| {
            let w = c * inv_sqrt_row[s] * inv_sqrt_row[r];
            delta[s] += w;
            delta[r] += w;
        });
        let m = delta.iter().copied().fold(0.0, f64::max);

        FrozenGuide {
            guide: guide.clone(),
            params: *p,
            method,
            inv_sqrt_row,
            inv_max: 1.0 / m,
        }
    }

    pub fn guide(&self) -> &Image {
        &self.guide
    }

    pub fn params(&self) -> &PatchParams {
        &self.params
    }

    /// Maximum row sum `m` after the symmetric normalization.
    pub fn max_row_sum(&self) -> f64 {
        1.0 / self.inv_max
    }

    /// `W input` for the frozen `W`.
    pub fn apply(&self, input: &Image) -> Result<Image> {
        input.ensure_same_dims(&self.guide, "dsg_nlm input vs guide")?;
        let padded = sweep_guide(&self.guide, &self.params);
        Ok(self.apply_with(&padded, input))
    }

    fn apply_with(&self, padded: &PaddedGuide, input: &Image) -> Image {
        let v = input.data();
        let isg = &self.inv_sqrt_row;
        let inv_m = self.inv_max;
        let mut h: Vec<f64> = isg.iter().map(|a| a * a * inv_m).collect();
        let mut acc: Vec<f64> = h.iter().zip(v).map(|(w, x)| w * x).collect();
        for_each_pair(padded, &self.params, true, self.method, |s, r, c| {
            let w = c * isg[s] * isg[r] * inv_m;
            acc[s] += w * v[r];
            acc[r] += w * v[s];
            h[s] += w;
            h[r] += w;
        });
        let out = acc
            .iter()
            .zip(&h)
            .zip(v)
            .map(|((a, hs), x)| a + (1.0 - hs) * x)
            .collect();
        Image::new(input.width(), input.height(), out).expect("dimensions preserved")
    }
}

/// Snapshots `guide` and precomputes the normalization of its weight matrix.
pub fn freeze_guide(guide: &Image, p: &PatchParams) -> FrozenGuide {
    FrozenGuide::build(guide, p, DistanceMethod::SummedArea)
}

/// DSG-NLM filtering `W input`, with `W` built from `guide`.
pub fn dsg_nlm_denoise(input: &Image, guide: &Image, p: &PatchParams) -> Result<Image> {
    input.ensure_same_dims(guide, "dsg_nlm input vs guide")?;
    let frozen = FrozenGuide::build(guide, p, DistanceMethod::SummedArea);
    let padded = sweep_guide(guide, p);
    Ok(frozen.apply_with(&padded, input))
}

/// The same three sweeps with every patch distance computed by an explicit
/// `N_p x N_p` loop. Cost grows with `N_p^2`; used as the benchmark baseline.
pub fn dsg_nlm_denoise_brute_force(input: &Image, guide: &Image, p: &PatchParams) -> Result<Image> {
    input.ensure_same_dims(guide, "dsg_nlm input vs guide")?;
    let frozen = FrozenGuide::build(guide, p, DistanceMethod::Direct);
    let padded = sweep_guide(guide, p);
    Ok(frozen.apply_with(&padded, input))
}
