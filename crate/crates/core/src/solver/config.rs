use crate::denoise::PatchParams;
use crate::error::{Error, Result};
use crate::image::ConstraintSet;

/// Regularization step of the ADMM loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenoiserKind {
    /// Classical NLM, weights recomputed from the denoiser input each time.
    Nlm,
    /// DSG-NLM with the guide equal to the denoiser input at every iteration.
    DsgAdaptive,
    /// DSG-NLM adapted until `freeze_at`, then a fixed linear operator.
    DsgFixed,
    /// `v = x + u`
    Identity,
}

impl DenoiserKind {
    pub fn name(&self) -> &'static str {
        match self {
            DenoiserKind::Nlm => "nlm",
            DenoiserKind::DsgAdaptive => "dsg-adaptive",
            DenoiserKind::DsgFixed => "dsg-fixed",
            DenoiserKind::Identity => "identity",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "nlm" => Ok(DenoiserKind::Nlm),
            "dsg-adaptive" | "a-dsg-nlm" => Ok(DenoiserKind::DsgAdaptive),
            "dsg-fixed" | "f-dsg-nlm" => Ok(DenoiserKind::DsgFixed),
            "identity" => Ok(DenoiserKind::Identity),
            other => Err(Error::InvalidParameter(format!(
                "unknown denoiser {other:?} (expected nlm, dsg-adaptive, dsg-fixed or identity)"
            ))),
        }
    }
}

/// Default iteration at which F-DSG-NLM stops adapting its weights.
pub const DEFAULT_FREEZE_AT: usize = 15;

/// Default iteration budget.
pub const DEFAULT_MAX_ITERS: usize = 250;

/// Residual threshold used when early stopping is enabled.
pub const EARLY_STOP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Penalty `rho > 0`.
    pub rho: f64,
    /// Regularization weight `lambda >= 0`; zero bypasses the denoiser.
    pub lambda: f64,
    /// Linearization coefficient `alpha > 0`.
    pub alpha: f64,
    pub max_iters: usize,
    /// First iteration (1-based) run with frozen DSG-NLM weights.
    pub freeze_at: Option<usize>,
    pub constraint: ConstraintSet,
    pub denoiser: DenoiserKind,
    pub patch_side: usize,
    pub window_radius: usize,
    /// Kernel bandwidth; `None` means `sqrt(lambda / rho)`.
    pub bandwidth: Option<f64>,
    /// Stop once both residuals fall below this value.
    pub tolerance: Option<f64>,
    /// Relative residual target of the baseline's inner CG solves.
    pub cg_tol: f64,
    pub cg_max_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rho: 1.0,
            lambda: 0.01,
            alpha: 1.05,
            max_iters: DEFAULT_MAX_ITERS,
            freeze_at: Some(DEFAULT_FREEZE_AT),
            constraint: ConstraintSet::unit_box(),
            denoiser: DenoiserKind::DsgFixed,
            patch_side: 5,
            window_radius: 5,
            bandwidth: None,
            tolerance: None,
            cg_tol: 1e-6,
            cg_max_iters: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.freeze_at == Some(0) {
            return bad("freeze_at must be at least 1".into());
        }
        if !(self.cg_tol > 0.0) {
            return bad(format!("cg_tol must be positive, got {}", self.cg_tol));
        }
        if self.cg_max_iters == 0 {
            return bad("cg_max_iters must be at least 1".into());
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return bad(format!("tolerance must be positive, got {t}"));
            }
        }
        self.constraint.validate()?;
        if self.denoiser != DenoiserKind::Identity {
            PatchParams::new(self.patch_side, self.window_radius, self.bandwidth.unwrap_or(1.0))?;
        }
        Ok(())
    }

    /// Noise level of the denoising step, `sqrt(lambda / rho)`.
    pub fn sigma(&self) -> f64 {
        (self.lambda / self.rho).sqrt()
    }

    /// `1 / (alpha + rho)`
    pub fn mu(&self) -> f64 {
        1.0 / (self.alpha + self.rho)
    }

    /// Patch parameters of the denoiser, or `None` when the step is the
    /// identity (identity denoiser or `lambda = 0`).
    pub fn patch_params(&self) -> Result<Option<PatchParams>> {
        if self.denoiser == DenoiserKind::Identity || self.lambda == 0.0 {
            return Ok(None);
        }
        let bandwidth = self.bandwidth.unwrap_or_else(|| self.sigma());
        PatchParams::new(self.patch_side, self.window_radius, bandwidth).map(Some)
    }

    pub fn freeze_iteration(&self) -> usize {
        self.freeze_at.unwrap_or(DEFAULT_FREEZE_AT)
    }
}
