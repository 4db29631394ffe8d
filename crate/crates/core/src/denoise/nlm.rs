use crate::error::Result;
use crate::image::Image;

use super::patch::{for_each_pair, sweep_guide, DistanceMethod};
use super::PatchParams;

/// Classical nonlocal means: each output pixel is the kernel-weighted mean
/// of `input` over its clipped search window, with weights from `guide`.
pub fn nlm_denoise(input: &Image, guide: &Image, p: &PatchParams) -> Result<Image> {
    input.ensure_same_dims(guide, "nlm_denoise input vs guide")?;
    let v = input.data();
    let mut num = v.to_vec();
    let mut den = vec![1.0; v.len()];
    let padded = sweep_guide(guide, p);
    for_each_pair(&padded, p, false, DistanceMethod::SummedArea, |s, r, k| {
        num[s] += k * v[r];
        num[r] += k * v[s];
        den[s] += k;
        den[r] += k;
    });
    let out = num.iter().zip(&den).map(|(n, d)| n / d).collect();
    Image::new(input.width(), input.height(), out)
}
