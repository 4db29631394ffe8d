//! Timing harness comparing the summed-area and direct DSG-NLM paths.

use std::time::Instant;

use crate::denoise::{dsg_nlm_denoise, dsg_nlm_denoise_brute_force, PatchParams};
use crate::error::{Error, Result};
use crate::forward::Rng;
use crate::image::Image;

/// Header of the benchmark CSV.
pub const BENCH_HEADER: &str = "np,fast_s,brute_s,speedup";

/// Largest tolerated max-abs difference between the two paths.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub size: usize,
    pub window_radius: usize,
    pub patch_sides: Vec<usize>,
    pub bandwidth: f64,
    /// Timed runs per path; the median is reported.
    pub repeats: usize,
    /// Skip the direct path and report NaN for it.
    pub fast_only: bool,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            size: 256,
            window_radius: 21,
            patch_sides: vec![11, 17, 23, 29],
            bandwidth: 0.1,
            repeats: 3,
            fast_only: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub patch_side: usize,
    pub fast_s: f64,
    pub brute_s: f64,
    pub max_abs_diff: f64,
}

impl BenchRow {
    pub fn speedup(&self) -> f64 {
        self.brute_s / self.fast_s
    }
}

/// Piecewise-smooth test scene with additive Gaussian noise.
pub fn bench_image(size: usize, seed: u64) -> Image {
    let mut rng = Rng::new(seed);
    let s = size as f64;
    Image::from_fn(size, size, |x, y| {
        let (fx, fy) = (x as f64 / s, y as f64 / s);
        let disc = ((fx - 0.5).powi(2) + (fy - 0.45).powi(2)).sqrt() < 0.25;
        let base = if disc { 0.75 } else { 0.25 + 0.3 * fx };
        let stripes = 0.1 * (fy * 40.0).sin() * f64::from(u8::from(fx > 0.7));
        base + stripes + 0.05 * rng.next_normal()
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn timed(repeats: usize, mut f: impl FnMut() -> Result<Image>) -> Result<(f64, Image)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t = Instant::now();
        let out = f()?;
        times.push(t.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((median(times), last.expect("at least one run")))
}

/// Times both paths for every patch side. Fails with [`Error::Mismatch`]
/// when their outputs differ by more than [`AGREEMENT_TOLERANCE`].
pub fn bench_denoiser(opts: &BenchOptions) -> Result<Vec<BenchRow>> {
    let img = bench_image(opts.size, opts.seed);
    let mut rows = Vec::with_capacity(opts.patch_sides.len());
    for &np in &opts.patch_sides {
        let p = PatchParams::new(np, opts.window_radius, opts.bandwidth)?;
        let (fast_s, fast) = timed(opts.repeats, || dsg_nlm_denoise(&img, &img, &p))?;
        let (brute_s, max_abs_diff) = if opts.fast_only {
            (f64::NAN, f64::NAN)
        } else {
            let (t, brute) = timed(opts.repeats, || dsg_nlm_denoise_brute_force(&img, &img, &p))?;
            let diff = fast.max_abs_diff(&brute);
            if !(diff <= AGREEMENT_TOLERANCE) {
                return Err(Error::Mismatch(format!(
                    "fast and direct DSG-NLM differ by {diff:e} at patch side {np}"
                )));
            }
            (t, diff)
        };
        rows.push(BenchRow {
            patch_side: np,
            fast_s,
            brute_s,
            max_abs_diff,
        });
    }
    Ok(rows)
}

/// CSV with [`BENCH_HEADER`]; skipped brute-force columns read `nan`.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let fixed = |v: f64, digits: usize| {
        if v.is_nan() {
            "nan".to_string()
        } else {
            format!("{v:.digits$}")
        }
    };
    let mut out = format!("{BENCH_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.patch_side,
            fixed(r.fast_s, 6),
            fixed(r.brute_s, 6),
            fixed(r.speedup(), 3)
        ));
    }
    out
}
