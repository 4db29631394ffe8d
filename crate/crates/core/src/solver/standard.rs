use std::time::Instant;

use crate::error::{Error, Result};
use crate::image::{project, Image};

use super::cg::cg_solve;
use super::config::SolverConfig;
use super::denoiser::{Denoiser, ScheduledDenoiser};
use super::log::{IterationLog, IterationRecord};
use super::{residuals, ProblemSpec, SolverOutput};

/// PnP-ADMM whose x-update solves `(A^T A + rho I) x = A^T y + rho (v - u)`
/// by conjugate gradients.
pub fn standard_pnp_admm_cg(problem: &ProblemSpec<'_>, cfg: &SolverConfig) -> Result<SolverOutput> {
    cfg.validate()?;
    let mut denoiser = ScheduledDenoiser::from_config(cfg)?;
    standard_pnp_admm_cg_with(problem, cfg, &mut denoiser, &mut |_, _, _, _| {})
}

/// The constraint set is ignored inside the iterations; only the returned
/// estimate is projected.
pub fn standard_pnp_admm_cg_with(
    problem: &ProblemSpec<'_>,
    cfg: &SolverConfig,
    denoiser: &mut dyn Denoiser,
    observer: &mut dyn FnMut(usize, &Image, &Image, &Image),
) -> Result<SolverOutput> {
    cfg.validate()?;
    let quad = problem
        .quadratic
        .ok_or_else(|| Error::InvalidParameter("the CG baseline needs a quadratic data term".into()))?;
    let start = Instant::now();
    let rho = cfg.rho;
    let aty = quad.adjoint_observation()?;
    aty.ensure_same_dims(&problem.initial, "initial estimate")?;

    let mut x = project(&problem.initial, cfg.constraint);
    let mut v = x.clone();
    let mut u = Image::zeros(x.width(), x.height());
    let mut log = IterationLog::default();

    for iter in 1..=cfg.max_iters {
        let rhs = aty.zip_map(&v.sub(&u), |a, d| a + rho * d);
        let solved = cg_solve(
            |z| {
                let mut out = quad.normal_apply(z)?;
                out.axpy(rho, z);
                Ok(out)
            },
            &rhs,
            cfg.cg_tol,
            cfg.cg_max_iters,
            Some(&x),
        )?;
        x = solved.solution;
        if !x.is_finite() {
            return Err(Error::Diverged { iteration: iter });
        }

        let v_prev = std::mem::replace(&mut v, denoiser.denoise(iter, &x.add(&u))?);
        if !v.is_finite() {
            return Err(Error::Diverged { iteration: iter });
        }
        u.axpy(1.0, &x);
        u.axpy(-1.0, &v);

        let (primal, dual) = residuals(&x, &v, &v_prev, rho)?;
        let objective = problem.data_term.value(&x)?;
        let psnr = problem.psnr_of(&project(&v, cfg.constraint))?;
        log.records.push(IterationRecord {
            iter,
            primal,
            dual,
            psnr,
            time_ms: start.elapsed().as_secs_f64() * 1e3,
            objective,
        });
        observer(iter, &x, &v, &u);
        if let Some(tol) = cfg.tolerance {
            if primal < tol && dual < tol {
                break;
            }
        }
    }

    Ok(SolverOutput {
        estimate: project(&v, cfg.constraint),
        x,
        v,
        u,
        log,
    })
}
