//! Run configuration: a TOML file with `[problem]`, `[superres]`, `[qis]`,
//! `[denoiser]` and `[solver]` sections. Every key has a default; see
//! `configs/` for annotated examples.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pnp_core::denoise::PatchParams;
use pnp_core::forward::{default_radius, gaussian_kernel, BlurKernel, Boundary, QisModel, SuperResOp, DEFAULT_GUARD};
use pnp_core::solver::{DenoiserKind, SolverConfig, EARLY_STOP_TOLERANCE};
use pnp_core::ConstraintSet;

/// Invalid configuration or input; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    SuperRes,
    Qis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Linearized,
    StandardCg,
}

impl SolverMethod {
    pub fn parse(s: &str) -> anyhow::Result<Self> {
        match s {
            "linearized" => Ok(SolverMethod::Linearized),
            "standard-cg" => Ok(SolverMethod::StandardCg),
            other => Err(config_error(format!(
                "unknown solver {other:?} (expected linearized or standard-cg)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    /// `sr` or `qis`.
    pub kind: String,
    pub ground_truth: Option<PathBuf>,
    /// Super-resolution: the low-resolution image. QIS: the per-pixel
    /// count of firing jots (PFM). Simulated from `ground_truth` if absent.
    pub observation: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            kind: "sr".into(),
            ground_truth: None,
            observation: None,
            output_dir: "runs".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SuperResSection {
    pub factor: usize,
    /// Gaussian blur standard deviation; 0 selects the identity kernel.
    pub blur_sigma: f64,
    /// Defaults to `max(ceil(3 sigma), 1)`.
    pub blur_radius: Option<usize>,
    /// `periodic` or `symmetric`.
    pub boundary: String,
    pub noise_sigma: f64,
}

impl Default for SuperResSection {
    fn default() -> Self {
        SuperResSection {
            factor: 2,
            blur_sigma: 1.5,
            blur_radius: None,
            boundary: "periodic".into(),
            noise_sigma: 2.0 / 255.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct QisSection {
    pub oversampling: usize,
    /// Sensor gain; defaults to `oversampling`.
    pub gain: Option<f64>,
    pub guard: f64,
}

impl Default for QisSection {
    fn default() -> Self {
        QisSection {
            oversampling: 16,
            gain: None,
            guard: DEFAULT_GUARD,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiserSection {
    /// `nlm`, `dsg-adaptive`, `dsg-fixed` or `identity`.
    pub kind: String,
    pub patch_side: usize,
    pub window_radius: usize,
    /// Defaults to `sqrt(lambda / rho)`.
    pub bandwidth: Option<f64>,
}

impl Default for DenoiserSection {
    fn default() -> Self {
        DenoiserSection {
            kind: "dsg-fixed".into(),
            patch_side: 5,
            window_radius: 5,
            bandwidth: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// `linearized` or `standard-cg`.
    pub method: String,
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    /// Super-resolution: `1.05` times the power-iteration Lipschitz
    /// estimate. QIS: `2 eta max(K0) / K`.
    pub alpha: Option<f64>,
    pub max_iters: usize,
    pub freeze_at: usize,
    /// `unit-box`, `nonnegative` or `none`.
    pub constraint: String,
    pub early_stop: bool,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    /// Fill the `time_ms` column; off by default so logs are reproducible.
    pub record_time: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let base = SolverConfig::default();
        SolverSection {
            method: "linearized".into(),
            rho: None,
            lambda: None,
            alpha: None,
            max_iters: base.max_iters,
            freeze_at: base.freeze_iteration(),
            constraint: "unit-box".into(),
            early_stop: false,
            cg_tol: base.cg_tol,
            cg_max_iters: base.cg_max_iters,
            record_time: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub superres: SuperResSection,
    pub qis: QisSection,
    pub denoiser: DenoiserSection,
    pub solver: SolverSection,
}

/// Command-line values that replace config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub rho: Option<f64>,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    pub solver: Option<String>,
    pub denoiser: Option<String>,
    pub freeze_at: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub record_time: bool,
}

impl RunConfig {
    /// Reads `path`; relative paths inside are resolved against its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.problem.ground_truth.as_mut().map(rebase);
        cfg.problem.observation.as_mut().map(rebase);
        rebase(&mut cfg.problem.output_dir);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.rho {
            self.solver.rho = Some(v);
        }
        if let Some(v) = o.lambda {
            self.solver.lambda = Some(v);
        }
        if let Some(v) = o.alpha {
            self.solver.alpha = Some(v);
        }
        if let Some(v) = o.iters {
            self.solver.max_iters = v;
        }
        if let Some(v) = o.seed {
            self.problem.seed = v;
        }
        if let Some(v) = &o.solver {
            self.solver.method = v.clone();
        }
        if let Some(v) = &o.denoiser {
            self.denoiser.kind = v.clone();
        }
        if let Some(v) = o.freeze_at {
            self.solver.freeze_at = v;
        }
        if let Some(v) = &o.output_dir {
            self.problem.output_dir = v.clone();
        }
        if o.record_time {
            self.solver.record_time = true;
        }
    }

    pub fn kind(&self) -> anyhow::Result<ProblemKind> {
        match self.problem.kind.as_str() {
            "sr" => Ok(ProblemKind::SuperRes),
            "qis" => Ok(ProblemKind::Qis),
            other => Err(config_error(format!("problem.kind must be sr or qis, got {other:?}"))),
        }
    }

    pub fn method(&self) -> anyhow::Result<SolverMethod> {
        SolverMethod::parse(&self.solver.method)
    }

    pub fn superres_op(&self) -> anyhow::Result<SuperResOp> {
        let s = &self.superres;
        let boundary = match s.boundary.as_str() {
            "periodic" => Boundary::Periodic,
            "symmetric" => Boundary::Symmetric,
            other => {
                return Err(config_error(format!(
                    "superres.boundary must be periodic or symmetric, got {other:?}"
                )))
            }
        };
        if !(s.noise_sigma >= 0.0) || !s.noise_sigma.is_finite() {
            return Err(config_error(format!(
                "superres.noise_sigma must be nonnegative, got {}",
                s.noise_sigma
            )));
        }
        let blur = if s.blur_sigma == 0.0 {
            BlurKernel::delta()
        } else {
            let radius = s.blur_radius.unwrap_or_else(|| default_radius(s.blur_sigma));
            gaussian_kernel(s.blur_sigma, radius).map_err(|e| config_error(format!("superres: {e}")))?
        };
        SuperResOp::new(blur, s.factor, boundary).map_err(|e| config_error(format!("superres: {e}")))
    }

    pub fn qis_model(&self) -> anyhow::Result<QisModel> {
        let q = &self.qis;
        let gain = q.gain.unwrap_or(q.oversampling as f64);
        QisModel::with_guard(q.oversampling, gain, q.guard).map_err(|e| config_error(format!("qis: {e}")))
    }

    /// Tuned defaults for `rho` and `lambda` per problem kind.
    fn default_rho_lambda(&self) -> anyhow::Result<(f64, f64)> {
        Ok(match self.kind()? {
            ProblemKind::SuperRes => (0.01, 4e-5),
            ProblemKind::Qis => (100.0, 4.0),
        })
    }

    /// Solver settings; `alpha` is filled by the caller when unset.
    pub fn solver_config(&self, alpha: f64) -> anyhow::Result<SolverConfig> {
        let (rho0, lambda0) = self.default_rho_lambda()?;
        let s = &self.solver;
        let constraint = match s.constraint.as_str() {
            "unit-box" => ConstraintSet::unit_box(),
            "nonnegative" => ConstraintSet::NonNegative,
            "none" => ConstraintSet::Unconstrained,
            other => {
                return Err(config_error(format!(
                    "solver.constraint must be unit-box, nonnegative or none, got {other:?}"
                )))
            }
        };
        let denoiser = DenoiserKind::parse(&self.denoiser.kind).map_err(|e| config_error(format!("denoiser: {e}")))?;
        let cfg = SolverConfig {
            rho: s.rho.unwrap_or(rho0),
            lambda: s.lambda.unwrap_or(lambda0),
            alpha,
            max_iters: s.max_iters,
            freeze_at: Some(s.freeze_at),
            constraint,
            denoiser,
            patch_side: self.denoiser.patch_side,
            window_radius: self.denoiser.window_radius,
            bandwidth: self.denoiser.bandwidth,
            tolerance: s.early_stop.then_some(EARLY_STOP_TOLERANCE),
            cg_tol: s.cg_tol,
            cg_max_iters: s.cg_max_iters,
        };
        cfg.validate().map_err(|e| config_error(format!("solver: {e}")))?;
        Ok(cfg)
    }

    pub fn patch_params(&self) -> anyhow::Result<PatchParams> {
        let d = &self.denoiser;
        PatchParams::new(d.patch_side, d.window_radius, d.bandwidth.unwrap_or(0.1))
            .map_err(|e| config_error(format!("denoiser: {e}")))
    }

    /// Checks every section that `kind` uses, without touching the disk
    /// beyond checking that referenced inputs exist.
    pub fn validate(&self) -> anyhow::Result<()> {
        match self.kind()? {
            ProblemKind::SuperRes => {
                self.superres_op()?;
            }
            ProblemKind::Qis => {
                self.qis_model()?;
            }
        }
        self.method()?;
        if let Some(a) = self.solver.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(config_error(format!("solver.alpha must be positive, got {a}")));
            }
        }
        self.solver_config(self.solver.alpha.unwrap_or(1.0))?;
        if self.method()? == SolverMethod::StandardCg && self.kind()? == ProblemKind::Qis {
            return Err(config_error(
                "solver standard-cg needs a quadratic data term (problem.kind = sr)",
            ));
        }
        for p in [&self.problem.ground_truth, &self.problem.observation]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(config_error(format!("{}: file not found", p.display())));
            }
        }
        Ok(())
    }

    /// First 12 hex digits of the SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))[..12].to_string()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `<output_dir>/<command>-<hash>-seed<seed>`
    pub fn run_dir(&self, command: &str) -> PathBuf {
        self.problem
            .output_dir
            .join(format!("{command}-{}-seed{}", self.hash(), self.problem.seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("[solver]\nrhoo = 1.0\n").is_err());
    }

    #[test]
    fn overrides_change_hash() {
        let base = RunConfig::default();
        let mut other = base.clone();
        other.apply(&Overrides {
            rho: Some(2.0),
            ..Overrides::default()
        });
        assert_eq!(other.solver.rho, Some(2.0));
        assert_ne!(base.hash(), other.hash());
        assert_eq!(base.hash(), RunConfig::default().hash());
    }

    #[test]
    fn bad_values() {
        let mut cfg = RunConfig::default();
        cfg.solver.cg_tol = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.problem.kind = "deblur".into();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.superres.boundary = "zero".into();
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.problem.kind = "qis".into();
        cfg.solver.method = "standard-cg".into();
        assert!(cfg.validate().is_err());
    }
}
