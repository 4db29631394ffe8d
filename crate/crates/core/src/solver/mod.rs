//! Plug-and-play ADMM solvers.
//!
//! Both solvers iterate on `(x, v, u)` and differ only in the x-update:
//! [`linearized_pnp_admm`] takes one gradient step, [`standard_pnp_admm_cg`]
//! solves the quadratic subproblem with conjugate gradients.

mod cg;
mod config;
mod denoiser;
mod linearized;
mod log;
mod standard;

pub use cg::{cg_solve, CgOutcome};
pub use config::{DenoiserKind, SolverConfig, DEFAULT_FREEZE_AT, DEFAULT_MAX_ITERS, EARLY_STOP_TOLERANCE};
pub use denoiser::{Denoiser, ScheduledDenoiser};
pub use linearized::{linearized_pnp_admm, linearized_pnp_admm_with};
pub use log::{IterationLog, IterationRecord, CSV_HEADER};
pub use standard::{standard_pnp_admm_cg, standard_pnp_admm_cg_with};

use crate::error::Result;
use crate::forward::{DataTerm, QisProblem, SuperResProblem};
use crate::image::{psnr, Image};

/// Quadratic data term `f(x) = 1/2 ||y - A x||^2` with access to `A^T A`
/// and `A^T y`, as needed by the exact x-update.
pub trait QuadraticTerm: DataTerm {
    /// `A^T A x`
    fn normal_apply(&self, x: &Image) -> Result<Image>;

    /// `A^T y`
    fn adjoint_observation(&self) -> Result<Image>;
}

impl QuadraticTerm for SuperResProblem {
    fn normal_apply(&self, x: &Image) -> Result<Image> {
        SuperResProblem::normal_apply(self, x)
    }

    fn adjoint_observation(&self) -> Result<Image> {
        SuperResProblem::adjoint_observation(self)
    }
}

/// A restoration problem: data term, starting point, optional reference.
pub struct ProblemSpec<'a> {
    pub data_term: &'a dyn DataTerm,
    /// Set only for quadratic data terms; required by the CG baseline.
    pub quadratic: Option<&'a dyn QuadraticTerm>,
    /// Projected onto the constraint set before the first iteration.
    pub initial: Image,
    pub ground_truth: Option<&'a Image>,
}

impl<'a> ProblemSpec<'a> {
    pub fn new(data_term: &'a dyn DataTerm, initial: Image) -> Self {
        ProblemSpec {
            data_term,
            quadratic: None,
            initial,
            ground_truth: None,
        }
    }

    /// Starts from `k^2 A^T y`, the blurred zero-fill upsampling of `y`.
    pub fn super_res(problem: &'a SuperResProblem) -> Result<Self> {
        Ok(ProblemSpec {
            data_term: problem,
            quadratic: Some(problem),
            initial: problem.initial_estimate()?,
            ground_truth: None,
        })
    }

    /// Starts from the clamped firing fraction `K1 / K`.
    pub fn qis(problem: &'a QisProblem) -> Self {
        ProblemSpec::new(problem, problem.initial_estimate())
    }

    pub fn with_ground_truth(mut self, truth: &'a Image) -> Self {
        self.ground_truth = Some(truth);
        self
    }

    pub(crate) fn psnr_of(&self, v: &Image) -> Result<f64> {
        match self.ground_truth {
            Some(truth) => psnr(truth, v, 1.0),
            None => Ok(f64::NAN),
        }
    }
}

/// Final iterates and the per-iteration log.
#[derive(Debug, Clone)]
pub struct SolverOutput {
    /// The returned image (the denoised iterate `v`).
    pub estimate: Image,
    pub x: Image,
    pub v: Image,
    pub u: Image,
    pub log: IterationLog,
}

/// `(||x - v||^2 / n, ||rho (v - v_prev)||^2 / n)`
pub fn residuals(x: &Image, v: &Image, v_prev: &Image, rho: f64) -> Result<(f64, f64)> {
    x.ensure_same_dims(v, "residual x vs v")?;
    v.ensure_same_dims(v_prev, "residual v vs previous v")?;
    let n = x.len() as f64;
    let primal = x
        .data()
        .iter()
        .zip(v.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let dual = v
        .data()
        .iter()
        .zip(v_prev.data())
        .map(|(a, b)| {
            let d = rho * (a - b);
            d * d
        })
        .sum::<f64>()
        / n;
    Ok((primal, dual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_formulas() {
        let x = Image::from_fn(5, 4, |i, j| (i * j) as f64);
        assert_eq!(residuals(&x, &x, &x, 2.0).unwrap(), (0.0, 0.0));
        let v = x.map(|a| a - 0.5);
        let (p, d) = residuals(&x, &v, &x, 2.0).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
        assert!((d - 1.0).abs() < 1e-15);
        assert!(residuals(&x, &Image::zeros(4, 4), &x, 1.0).is_err());
    }
}
