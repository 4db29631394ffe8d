//! One-bit quanta image sensor model.
//!
//! Each pixel is observed by `K` jots. A jot sees a Poisson photon count
//! with mean `eta x / K` and reports 1 when the count is at least one. With
//! `K1` firing jots and `K0 = K - K1` silent ones, the negative
//! log-likelihood per pixel is
//! `h(t) = K0 (eta t / K) - K1 log(1 - exp(-eta t / K))`.

use crate::error::{Error, Result};
use crate::image::Image;

use super::rng::Rng;
use super::DataTerm;

/// Default lower clamp applied to `x` before evaluating `h` or `h'`.
pub const DEFAULT_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QisModel {
    oversampling: usize,
    gain: f64,
    guard: f64,
}

impl QisModel {
    pub fn new(oversampling: usize, gain: f64) -> Result<Self> {
        Self::with_guard(oversampling, gain, DEFAULT_GUARD)
    }

    pub fn with_guard(oversampling: usize, gain: f64, guard: f64) -> Result<Self> {
        if oversampling == 0 {
            return Err(Error::InvalidParameter("oversampling K must be at least 1".into()));
        }
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sensor gain must be positive, got {gain}"
            )));
        }
        if !(guard > 0.0) || !guard.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "domain guard must be positive, got {guard}"
            )));
        }
        Ok(QisModel {
            oversampling,
            gain,
            guard,
        })
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    /// Photon exposure per jot, `eta / K`.
    fn rate(&self) -> f64 {
        self.gain / self.oversampling as f64
    }
}

/// Per-pixel counts of firing (`ones`) and silent (`zeros`) jots.
#[derive(Debug, Clone, PartialEq)]
pub struct QisCounts {
    ones: Image,
    zeros: Image,
    oversampling: usize,
}

impl QisCounts {
    /// Validates that `ones` holds integers in `[0, K]` and derives the zeros.
    pub fn from_ones(ones: Image, oversampling: usize) -> Result<Self> {
        let k = oversampling as f64;
        if let Some(bad) = ones
            .data()
            .iter()
            .find(|&&v| v.fract() != 0.0 || !(0.0..=k).contains(&v))
        {
            return Err(Error::InvalidParameter(format!(
                "jot count {bad} is not an integer in [0, {oversampling}]"
            )));
        }
        let zeros = ones.map(|v| k - v);
        Ok(QisCounts {
            ones,
            zeros,
            oversampling,
        })
    }

    pub fn ones(&self) -> &Image {
        &self.ones
    }

    pub fn zeros(&self) -> &Image {
        &self.zeros
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    fn check(&self, x: &Image, m: &QisModel) -> Result<()> {
        x.ensure_same_dims(&self.ones, "qis image vs counts")?;
        if self.oversampling != m.oversampling {
            return Err(Error::InvalidParameter(format!(
                "counts recorded with K = {} used with K = {}",
                self.oversampling, m.oversampling
            )));
        }
        Ok(())
    }
}

/// Simulates the binary jot readout of `x` (clamped to `[0, 1]`).
///
/// The stream is consumed pixel by pixel in raster order and jot by jot
/// within each pixel; every jot draws one Knuth Poisson sample.
pub fn qis_simulate(x: &Image, m: &QisModel, seed: u64) -> QisCounts {
    let mut rng = Rng::new(seed);
    let rate = m.rate();
    let ones = x.map(|v| {
        let mean = rate * v.clamp(0.0, 1.0);
        (0..m.oversampling).filter(|_| rng.next_poisson(mean) >= 1).count() as f64
    });
    QisCounts::from_ones(ones, m.oversampling).expect("counts are within [0, K]")
}

/// `sum_i h(max(x_i, guard))`
pub fn qis_data_term(x: &Image, counts: &QisCounts, m: &QisModel) -> Result<f64> {
    counts.check(x, m)?;
    let rate = m.rate();
    Ok(x.data()
        .iter()
        .zip(counts.zeros.data())
        .zip(counts.ones.data())
        .map(|((&xi, &k0), &k1)| {
            let a = rate * xi.max(m.guard);
            let fired = if k1 == 0.0 { 0.0 } else { k1 * (-(-a).exp_m1()).ln() };
            k0 * a - fired
        })
        .sum())
}

/// Per-pixel `h'(max(x_i, guard)) = (eta/K) (K0 - K1 / (exp(eta t / K) - 1))`.
pub fn qis_gradient(x: &Image, counts: &QisCounts, m: &QisModel) -> Result<Image> {
    counts.check(x, m)?;
    let rate = m.rate();
    let data = x
        .data()
        .iter()
        .zip(counts.zeros.data())
        .zip(counts.ones.data())
        .map(|((&xi, &k0), &k1)| {
            let a = rate * xi.max(m.guard);
            let fired = if k1 == 0.0 { 0.0 } else { k1 / a.exp_m1() };
            rate * (k0 - fired)
        })
        .collect();
    Image::new(x.width(), x.height(), data)
}

/// QIS likelihood bound to recorded counts.
#[derive(Debug, Clone)]
pub struct QisProblem {
    pub model: QisModel,
    pub counts: QisCounts,
}

impl QisProblem {
    pub fn new(model: QisModel, counts: QisCounts) -> Result<Self> {
        if counts.oversampling != model.oversampling {
            return Err(Error::InvalidParameter(format!(
                "counts recorded with K = {} used with K = {}",
                counts.oversampling, model.oversampling
            )));
        }
        Ok(QisProblem { model, counts })
    }

    /// `K1 / K` clamped to `[guard, 1]`.
    pub fn initial_estimate(&self) -> Image {
        let k = self.model.oversampling as f64;
        let guard = self.model.guard;
        self.counts.ones.map(|v| (v / k).clamp(guard, 1.0))
    }

    /// `2 eta max(K0) / K`, the default linearization coefficient.
    pub fn default_alpha(&self) -> f64 {
        2.0 * self.model.rate() * self.counts.zeros.max()
    }
}

impl DataTerm for QisProblem {
    fn gradient(&self, x: &Image) -> Result<Image> {
        qis_gradient(x, &self.counts, &self.model)
    }

    fn value(&self, x: &Image) -> Result<f64> {
        qis_data_term(x, &self.counts, &self.model)
    }
}
