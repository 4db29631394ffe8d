use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Image,
    pub iterations: usize,
    /// `||rhs - Op(x)|| / ||rhs||` of the returned solution.
    pub relative_residual: f64,
    /// Whether the tolerance was met before `max_iters`.
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive definite operator on images.
pub fn cg_solve(
    mut apply: impl FnMut(&Image) -> Result<Image>,
    rhs: &Image,
    tol: f64,
    max_iters: usize,
    x0: Option<&Image>,
) -> Result<CgOutcome> {
    let rhs_norm = rhs.norm();
    if rhs_norm == 0.0 {
        return Ok(CgOutcome {
            solution: Image::zeros(rhs.width(), rhs.height()),
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let mut x = match x0 {
        Some(x0) => {
            rhs.ensure_same_dims(x0, "cg initial guess")?;
            x0.clone()
        }
        None => Image::zeros(rhs.width(), rhs.height()),
    };
    let mut r = match x0 {
        Some(_) => rhs.sub(&apply(&x)?),
        None => rhs.clone(),
    };
    let mut rs = r.norm_sq();
    if rs.sqrt() / rhs_norm <= tol {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: rs.sqrt() / rhs_norm,
            converged: true,
        });
    }
    let mut p = r.clone();
    for iteration in 1..=max_iters {
        let ap = apply(&p)?;
        let curvature = p.dot(&ap);
        if !(curvature > 0.0) || !curvature.is_finite() {
            return Err(Error::CgBreakdown { iteration, curvature });
        }
        let step = rs / curvature;
        x.axpy(step, &p);
        r.axpy(-step, &ap);
        let rs_new = r.norm_sq();
        if !rs_new.is_finite() {
            return Err(Error::CgBreakdown {
                iteration,
                curvature: f64::NAN,
            });
        }
        let relative = rs_new.sqrt() / rhs_norm;
        if relative <= tol || iteration == max_iters {
            return Ok(CgOutcome {
                solution: x,
                iterations: iteration,
                relative_residual: relative,
                converged: relative <= tol,
            });
        }
        let beta = rs_new / rs;
        rs = rs_new;
        p = r.zip_map(&p, |ri, pi| ri + beta * pi);
    }
    unreachable!("max_iters >= 1 returns inside the loop")
}
