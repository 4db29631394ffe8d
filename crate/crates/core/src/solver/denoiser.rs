use crate::denoise::{dsg_nlm_denoise, freeze_guide, nlm_denoise, FrozenGuide, PatchParams};
use crate::error::Result;
use crate::image::Image;

use super::config::{DenoiserKind, SolverConfig};

/// The `v`-update of the ADMM loop, `v = D(x + u)`.
pub trait Denoiser {
    /// `iteration` is 1-based.
    fn denoise(&mut self, iteration: usize, input: &Image) -> Result<Image>;
}

/// Built-in denoisers with the A-/F-DSG-NLM schedule.
///
/// The guide is always the denoiser input. For [`DenoiserKind::DsgFixed`]
/// the guide seen at iteration `freeze_at` is kept for every later call.
#[derive(Debug, Clone)]
pub struct ScheduledDenoiser {
    kind: DenoiserKind,
    params: Option<PatchParams>,
    freeze_at: usize,
    frozen: Option<FrozenGuide>,
}

impl ScheduledDenoiser {
    pub fn new(kind: DenoiserKind, params: Option<PatchParams>, freeze_at: usize) -> Self {
        ScheduledDenoiser {
            kind,
            params,
            freeze_at,
            frozen: None,
        }
    }

    pub fn from_config(cfg: &SolverConfig) -> Result<Self> {
        Ok(Self::new(cfg.denoiser, cfg.patch_params()?, cfg.freeze_iteration()))
    }

    pub fn kind(&self) -> DenoiserKind {
        self.kind
    }

    /// The frozen operator, once the schedule has reached `freeze_at`.
    pub fn frozen(&self) -> Option<&FrozenGuide> {
        self.frozen.as_ref()
    }
}

impl Denoiser for ScheduledDenoiser {
    fn denoise(&mut self, iteration: usize, input: &Image) -> Result<Image> {
        let Some(p) = self.params else {
            return Ok(input.clone());
        };
        match self.kind {
            DenoiserKind::Identity => Ok(input.clone()),
            DenoiserKind::Nlm => nlm_denoise(input, input, &p),
            DenoiserKind::DsgAdaptive => dsg_nlm_denoise(input, input, &p),
            DenoiserKind::DsgFixed if iteration < self.freeze_at => dsg_nlm_denoise(input, input, &p),
            DenoiserKind::DsgFixed => self.frozen.get_or_insert_with(|| freeze_guide(input, &p)).apply(input),
        }
    }
}

/// Any closure `(iteration, input) -> output` works as a denoiser.
impl<F> Denoiser for F
where
    F: FnMut(usize, &Image) -> Result<Image>,
{
    fn denoise(&mut self, iteration: usize, input: &Image) -> Result<Image> {
        self(iteration, input)
    }
}
