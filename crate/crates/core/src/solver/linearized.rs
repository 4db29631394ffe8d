use std::time::Instant;

use crate::error::{Error, Result};
use crate::image::{project, project_in_place, Image};

use super::config::SolverConfig;
use super::denoiser::{Denoiser, ScheduledDenoiser};
use super::log::{IterationLog, IterationRecord};
use super::{residuals, ProblemSpec, SolverOutput};

/// Linearized PnP-ADMM with the denoiser selected by `cfg`.
pub fn linearized_pnp_admm(problem: &ProblemSpec<'_>, cfg: &SolverConfig) -> Result<SolverOutput> {
    cfg.validate()?;
    let mut denoiser = ScheduledDenoiser::from_config(cfg)?;
    linearized_pnp_admm_with(problem, cfg, &mut denoiser, &mut |_, _, _, _| {})
}

/// Linearized PnP-ADMM with a caller-supplied denoiser and observer.
///
/// Per iteration:
/// `x <- P_C(mu (alpha x + rho (v - u) - grad f(x)))`,
/// `v <- D(x + u)`, `u <- u + x - v`, with `mu = 1 / (alpha + rho)`.
pub fn linearized_pnp_admm_with(
    problem: &ProblemSpec<'_>,
    cfg: &SolverConfig,
    denoiser: &mut dyn Denoiser,
    observer: &mut dyn FnMut(usize, &Image, &Image, &Image),
) -> Result<SolverOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let mu = cfg.mu();
    let rho = cfg.rho;

    let mut x = project(&problem.initial, cfg.constraint);
    let mut v = x.clone();
    let mut u = Image::zeros(x.width(), x.height());
    let mut log = IterationLog::default();

    for iter in 1..=cfg.max_iters {
        let grad = problem.data_term.gradient(&x)?;
        x.ensure_same_dims(&grad, "gradient")?;
        for (((xi, &vi), &ui), &gi) in x.data_mut().iter_mut().zip(v.data()).zip(u.data()).zip(grad.data()) {
            // Same as mu (alpha x + rho (v - u) - g), but exact at fixed points.
            *xi += mu * (rho * (vi - ui - *xi) - gi);
        }
        project_in_place(&mut x, cfg.constraint);
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
        let psnr = problem.psnr_of(&v)?;
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
        estimate: v.clone(),
        x,
        v,
        u,
        log,
    })
}
