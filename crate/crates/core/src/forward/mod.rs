//! Data-fidelity terms and measurement simulators.

mod kernel;
mod qis;
mod rng;
mod superres;

pub use kernel::{default_radius, gaussian_kernel, BlurKernel};
pub use qis::{qis_data_term, qis_gradient, qis_simulate, QisCounts, QisModel, QisProblem, DEFAULT_GUARD};
pub use rng::Rng;
pub use superres::{
    convolve, power_iteration_lipschitz, sr_adjoint, sr_apply, sr_data_term, sr_gradient, sr_simulate,
    zero_fill_upsample, Boundary, SuperResOp, SuperResProblem, LIPSCHITZ_SAFETY, POWER_ITERATIONS,
};

use crate::error::Result;
use crate::image::Image;

/// Differentiable data term `f(x)`.
pub trait DataTerm {
    /// `grad f(x)`
    fn gradient(&self, x: &Image) -> Result<Image>;

    /// `f(x)`
    fn value(&self, x: &Image) -> Result<f64>;
}
