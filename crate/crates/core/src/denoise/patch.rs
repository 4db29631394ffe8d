//! Patch kernels, hat taper, and the summed-area-table patch distances.

use crate::error::{Error, Result};
use crate::image::{pad_reflect, reflect_index, Image, Pixel};
use crate::integral::IntegralImage;

use super::PatchParams;

/// `exp(-||P_s - P_r||^2 / (2 N_p^2 sigma^2))` with both patches read
/// directly from the reflected guide.
pub fn nlm_kernel(guide: &Image, s: Pixel, r: Pixel, p: &PatchParams) -> f64 {
    let h = p.patch_half() as isize;
    let (w, ht) = (guide.width(), guide.height());
    let mut ssd = 0.0;
    for b in -h..=h {
        let ys = reflect_index(s.1 as isize + b, ht);
        let yr = reflect_index(r.1 as isize + b, ht);
        for a in -h..=h {
            let xs = reflect_index(s.0 as isize + a, w);
            let xr = reflect_index(r.0 as isize + a, w);
            let d = guide.get(xs, ys) - guide.get(xr, yr);
            ssd += d * d;
        }
    }
    (-ssd * p.distance_scale()).exp()
}

/// Separable hat taper `(1 - |dx|/(N_s+1)) (1 - |dy|/(N_s+1))`, zero
/// outside the search window.
pub fn hat_weight(s: Pixel, r: Pixel, window_radius: usize) -> f64 {
    let dx = s.0.abs_diff(r.0);
    let dy = s.1.abs_diff(r.1);
    if dx > window_radius || dy > window_radius {
        return 0.0;
    }
    hat(dx, dy, window_radius)
}

#[inline]
pub(crate) fn hat(dx: usize, dy: usize, window_radius: usize) -> f64 {
    let span = (window_radius + 1) as f64;
    (1.0 - dx as f64 / span) * (1.0 - dy as f64 / span)
}

/// Squared distance `||P_s - P_{s+t}||^2` for every pixel `s`, for one
/// offset `t = (dx, dy)` with `max(|dx|, |dy|) <= N_s`.
///
/// Computed by padding the guide by `N_s + (N_p - 1)/2`, forming the
/// squared-difference image, and reading one `N_p x N_p` box sum per pixel
/// from its summed-area table.
pub fn patch_distance_map(guide: &Image, offset: (isize, isize), p: &PatchParams) -> Result<Image> {
    let ns = p.window_radius() as isize;
    if offset.0.abs() > ns || offset.1.abs() > ns {
        return Err(Error::OutOfRange(format!(
            "offset ({}, {}) exceeds window radius {ns}",
            offset.0, offset.1
        )));
    }
    let padded = PaddedGuide::new(guide, p.window_radius() + p.patch_half(), p.patch_side());
    let mut scratch = DistanceScratch::default();
    let (w, h) = (guide.width(), guide.height());
    let region = Region {
        x0: 0,
        x1: w,
        y0: 0,
        y1: h,
    };
    let mut out = Vec::new();
    padded.integral_distances(offset, region, &mut scratch, &mut out);
    Image::new(w, h, out)
}

/// Rectangle of anchor pixels `[x0, x1) x [y0, y1)` in guide coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Region {
    pub x0: usize,
    pub x1: usize,
    pub y0: usize,
    pub y1: usize,
}

impl Region {
    fn width(&self) -> usize {
        self.x1 - self.x0
    }

    fn height(&self) -> usize {
        self.y1 - self.y0
    }
}

#[derive(Default)]
pub(crate) struct DistanceScratch {
    diff: Vec<f64>,
    table: Option<IntegralImage>,
}

/// Guide reflected by a fixed margin, addressed in original coordinates.
pub(crate) struct PaddedGuide {
    data: Vec<f64>,
    stride: usize,
    margin: usize,
    width: usize,
    height: usize,
    patch_side: usize,
}

impl PaddedGuide {
    pub fn new(guide: &Image, margin: usize, patch_side: usize) -> Self {
        let padded = pad_reflect(guide, margin);
        PaddedGuide {
            stride: padded.width(),
            data: padded.into_data(),
            margin,
            width: guide.width(),
            height: guide.height(),
            patch_side,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row slice of the padded guide starting at original column `x`.
    #[inline]
    fn row_from(&self, x: isize, y: isize, len: usize) -> &[f64] {
        let px = (x + self.margin as isize) as usize;
        let py = (y + self.margin as isize) as usize;
        let start = py * self.stride + px;
        &self.data[start..start + len]
    }

    /// Patch distances for every anchor in `region` against the anchor
    /// shifted by `offset`, via the squared-difference summed-area table.
    /// Output is row-major over `region`.
    pub fn integral_distances(
        &self,
        offset: (isize, isize),
        region: Region,
        scratch: &mut DistanceScratch,
        out: &mut Vec<f64>,
    ) {
        let half = (self.patch_side / 2) as isize;
        let np = self.patch_side;
        let (dx, dy) = offset;
        let rw = region.width() + np - 1;
        let rh = region.height() + np - 1;
        let qx0 = region.x0 as isize - half;
        let qy0 = region.y0 as isize - half;

        scratch.diff.clear();
        scratch.diff.reserve(rw * rh);
        for j in 0..rh as isize {
            let a = self.row_from(qx0, qy0 + j, rw);
            let b = self.row_from(qx0 + dx, qy0 + j + dy, rw);
            scratch.diff.extend(a.iter().zip(b).map(|(u, v)| {
                let d = u - v;
                d * d
            }));
        }
        let table = scratch
            .table
            .get_or_insert_with(|| IntegralImage::new(&Image::zeros(1, 1)));
        table.rebuild(rw, rh, &scratch.diff);

        out.clear();
        out.reserve(region.width() * region.height());
        for y in 0..region.height() {
            for x in 0..region.width() {
                out.push(table.rect_sum_unchecked(y, x, np, np));
            }
        }
    }

    /// Same distances as [`Self::integral_distances`] from explicit
    /// per-pair patch loops.
    pub fn direct_distances(&self, offset: (isize, isize), region: Region, out: &mut Vec<f64>) {
        let half = (self.patch_side / 2) as isize;
        let np = self.patch_side;
        let (dx, dy) = offset;
        out.clear();
        out.reserve(region.width() * region.height());
        for y in region.y0 as isize..region.y1 as isize {
            for x in region.x0 as isize..region.x1 as isize {
                let mut ssd = 0.0;
                for b in -half..=half {
                    let pa = self.row_from(x - half, y + b, np);
                    let pb = self.row_from(x - half + dx, y + b + dy, np);
                    for (u, v) in pa.iter().zip(pb) {
                        let d = u - v;
                        ssd += d * d;
                    }
                }
                out.push(ssd);
            }
        }
    }
}

/// How pair distances are produced during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DistanceMethod {
    SummedArea,
    Direct,
}

/// Visits every unordered pair `{s, r}` with `r = s + t` inside the image,
/// `t` ranging over the half window `dy > 0 || (dy == 0 && dx > 0)`.
///
/// The visitor receives linear indices `(s, r)` and the pair weight
/// `Lambda_{s,r} k_{s,r}` (or `k_{s,r}` when `taper` is false). Offsets are
/// visited in raster order and anchors in raster order within each offset,
/// which fixes the accumulation order of every consumer. Self pairs are not
/// visited; their weight is exactly 1.
pub(crate) fn for_each_pair(
    padded: &PaddedGuide,
    p: &PatchParams,
    taper: bool,
    method: DistanceMethod,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let (w, h) = (padded.width(), padded.height());
    let ns = p.window_radius() as isize;
    let scale = p.distance_scale();
    let mut scratch = DistanceScratch::default();
    let mut dist = Vec::new();

    for dy in 0..=ns {
        for dx in -ns..=ns {
            if dy == 0 && dx <= 0 {
                continue;
            }
            let x0 = (-dx).max(0) as usize;
            let x1 = (w as isize).min(w as isize - dx).max(0) as usize;
            let y1 = (h as isize - dy).max(0) as usize;
            if x0 >= x1 || y1 == 0 {
                continue;
            }
            let region = Region { x0, x1, y0: 0, y1 };
            match method {
                DistanceMethod::SummedArea => padded.integral_distances((dx, dy), region, &mut scratch, &mut dist),
                DistanceMethod::Direct => padded.direct_distances((dx, dy), region, &mut dist),
            }
            let taper_weight = if taper {
                hat(dx.unsigned_abs(), dy as usize, p.window_radius())
            } else {
                1.0
            };
            let shift = dy * w as isize + dx;
            let rw = x1 - x0;
            for (j, row) in dist.chunks_exact(rw).enumerate() {
                let base = j * w + x0;
                for (i, &d) in row.iter().enumerate() {
                    let s = base + i;
                    let r = (s as isize + shift) as usize;
                    visit(s, r, taper_weight * (-d * scale).exp());
                }
            }
        }
    }
}

/// Margin a sweep needs: anchors and partners both lie inside the image,
/// so only the patch half-width reaches outside.
pub(crate) fn sweep_guide(guide: &Image, p: &PatchParams) -> PaddedGuide {
    PaddedGuide::new(guide, p.patch_half(), p.patch_side())
}
