use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;

use pnp_core::bench::{bench_csv, bench_denoiser, BenchOptions};
use pnp_core::denoise::{build_dense_weights, dsg_nlm_denoise, nlm_denoise};
use pnp_core::forward::{
    qis_simulate, sr_simulate, QisCounts, QisModel, QisProblem, SuperResProblem, LIPSCHITZ_SAFETY,
};
use pnp_core::io::{read_image, write_image, ImageFormat};
use pnp_core::solver::{linearized_pnp_admm, standard_pnp_admm_cg, DenoiserKind, ProblemSpec, SolverOutput};
use pnp_core::Image;

use crate::config::{config_error, Overrides, ProblemKind, RunConfig, SolverMethod};

pub struct DenoiseArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub guide: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub denoiser: Option<String>,
    pub patch_side: Option<usize>,
    pub window_radius: Option<usize>,
    pub bandwidth: Option<f64>,
    pub oracle: bool,
}

pub fn denoise(a: &DenoiseArgs) -> anyhow::Result<()> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &a.denoiser {
        cfg.denoiser.kind = d.clone();
    }
    if let Some(v) = a.patch_side {
        cfg.denoiser.patch_side = v;
    }
    if let Some(v) = a.window_radius {
        cfg.denoiser.window_radius = v;
    }
    if a.bandwidth.is_some() {
        cfg.denoiser.bandwidth = a.bandwidth;
    }
    let kind = DenoiserKind::parse(&cfg.denoiser.kind).map_err(|e| config_error(e.to_string()))?;
    let p = cfg.patch_params()?;
    if a.oracle && !matches!(kind, DenoiserKind::DsgAdaptive | DenoiserKind::DsgFixed) {
        return Err(config_error(
            "--oracle compares against the dense DSG-NLM matrix; use a dsg denoiser",
        ));
    }

    let input = read_image(&a.input)?;
    let guide = match &a.guide {
        Some(g) => read_image(g)?,
        None => input.clone(),
    };
    input.ensure_same_dims(&guide, "input vs guide")?;
    let format = ImageFormat::from_path(&a.output);

    let t = Instant::now();
    let out = match kind {
        DenoiserKind::Nlm => nlm_denoise(&input, &guide, &p)?,
        DenoiserKind::DsgAdaptive | DenoiserKind::DsgFixed => dsg_nlm_denoise(&input, &guide, &p)?,
        DenoiserKind::Identity => input.clone(),
    };
    let elapsed = t.elapsed().as_secs_f64();
    if a.oracle {
        let dense = build_dense_weights(&guide, &p).map_err(|e| config_error(format!("--oracle: {e}")))?;
        let reference = dense.apply(&input)?;
        println!("oracle_max_abs_diff={:e}", out.max_abs_diff(&reference));
    }
    write_image(&out, &a.output, format)?;
    println!("time_s={elapsed:.6}");
    Ok(())
}

fn load_truth(cfg: &RunConfig, required: bool) -> anyhow::Result<Option<Image>> {
    match &cfg.problem.ground_truth {
        Some(p) => Ok(Some(read_image(p)?)),
        None if required => Err(config_error("problem.ground_truth is required")),
        None => Ok(None),
    }
}

fn create_run_dir(cfg: &RunConfig, command: &str) -> anyhow::Result<PathBuf> {
    let dir = cfg.run_dir(command);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()).with_context(|| format!("writing {}", dir.display()))?;
    println!("run_dir={}", dir.display());
    Ok(dir)
}

fn write_qis_header(dir: &Path, model: &QisModel, seed: u64) -> anyhow::Result<()> {
    let text = format!(
        "oversampling = {}\ngain = {:?}\nseed = {}\n",
        model.oversampling(),
        model.gain(),
        seed
    );
    let path = dir.join("qis.toml");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_counts(dir: &Path, counts: &QisCounts) -> anyhow::Result<()> {
    write_image(counts.ones(), dir.join("ones.pfm"), ImageFormat::Pfm)?;
    let k = counts.oversampling() as f64;
    write_image(
        &counts.ones().map(|v| v / k),
        dir.join("ones_fraction.pgm"),
        ImageFormat::Pgm8,
    )?;
    Ok(())
}

fn load_config(path: &Path, o: &Overrides) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    cfg.apply(o);
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate_sr(config: &Path, o: &Overrides) -> anyhow::Result<()> {
    let mut cfg = load_config(config, o)?;
    cfg.problem.kind = "sr".into();
    cfg.validate()?;
    let op = cfg.superres_op()?;
    let truth = load_truth(&cfg, true)?.expect("required");
    let y = sr_simulate(&truth, &op, cfg.superres.noise_sigma, cfg.problem.seed)?;
    let dir = create_run_dir(&cfg, "simulate-sr")?;
    write_image(&y, dir.join("observation.pfm"), ImageFormat::Pfm)?;
    write_image(&y, dir.join("observation.pgm"), ImageFormat::Pgm8)?;
    Ok(())
}

pub fn simulate_qis(config: &Path, o: &Overrides) -> anyhow::Result<()> {
    let mut cfg = load_config(config, o)?;
    cfg.problem.kind = "qis".into();
    cfg.validate()?;
    let model = cfg.qis_model()?;
    let truth = load_truth(&cfg, true)?.expect("required");
    let counts = qis_simulate(&truth, &model, cfg.problem.seed);
    let dir = create_run_dir(&cfg, "simulate-qis")?;
    write_counts(&dir, &counts)?;
    write_qis_header(&dir, &model, cfg.problem.seed)?;
    Ok(())
}

pub fn restore(config: &Path, o: &Overrides) -> anyhow::Result<()> {
    let cfg = load_config(config, o)?;
    let truth = load_truth(&cfg, false)?;
    let observation = cfg.problem.observation.as_ref().map(read_image).transpose()?;
    if observation.is_none() && truth.is_none() {
        return Err(config_error(
            "restore needs problem.observation or problem.ground_truth",
        ));
    }
    let seed = cfg.problem.seed;
    let method = cfg.method()?;

    match cfg.kind()? {
        ProblemKind::SuperRes => {
            let op = cfg.superres_op()?;
            let simulated = observation.is_none();
            let y = match observation {
                Some(y) => y,
                None => sr_simulate(truth.as_ref().expect("checked"), &op, cfg.superres.noise_sigma, seed)?,
            };
            let problem = SuperResProblem::new(op, y);
            let spec = ProblemSpec::super_res(&problem)?;
            if let Some(t) = &truth {
                t.ensure_same_dims(&spec.initial, "ground truth vs restored size")?;
            }
            let alpha = match cfg.solver.alpha {
                Some(a) => a,
                None => LIPSCHITZ_SAFETY * problem.lipschitz(seed)?,
            };
            let solver_cfg = cfg.solver_config(alpha)?;
            let spec = match &truth {
                Some(t) => spec.with_ground_truth(t),
                None => spec,
            };
            let dir = create_run_dir(&cfg, "restore")?;
            if simulated {
                write_image(&problem.observation, dir.join("observation.pfm"), ImageFormat::Pfm)?;
            }
            let out = match method {
                SolverMethod::Linearized => linearized_pnp_admm(&spec, &solver_cfg)?,
                SolverMethod::StandardCg => standard_pnp_admm_cg(&spec, &solver_cfg)?,
            };
            finish(&cfg, &dir, &out, truth.is_some())
        }
        ProblemKind::Qis => {
            let model = cfg.qis_model()?;
            let simulated = observation.is_none();
            let counts = match observation {
                Some(ones) => QisCounts::from_ones(ones, model.oversampling())
                    .map_err(|e| config_error(format!("problem.observation: {e}")))?,
                None => qis_simulate(truth.as_ref().expect("checked"), &model, seed),
            };
            let problem = QisProblem::new(model, counts)?;
            let spec = ProblemSpec::qis(&problem);
            if let Some(t) = &truth {
                t.ensure_same_dims(&spec.initial, "ground truth vs counts")?;
            }
            let alpha = cfg
                .solver
                .alpha
                .unwrap_or_else(|| problem.default_alpha().max(f64::MIN_POSITIVE));
            let solver_cfg = cfg.solver_config(alpha)?;
            let spec = match &truth {
                Some(t) => spec.with_ground_truth(t),
                None => spec,
            };
            let dir = create_run_dir(&cfg, "restore")?;
            if simulated {
                write_counts(&dir, &problem.counts)?;
            }
            write_qis_header(&dir, &problem.model, seed)?;
            let out = linearized_pnp_admm(&spec, &solver_cfg)?;
            finish(&cfg, &dir, &out, truth.is_some())
        }
    }
}

fn finish(cfg: &RunConfig, dir: &Path, out: &SolverOutput, has_truth: bool) -> anyhow::Result<()> {
    write_image(&out.estimate, dir.join("restored.pfm"), ImageFormat::Pfm)?;
    write_image(&out.estimate, dir.join("restored.pgm"), ImageFormat::Pgm8)?;
    out.log.write_csv(&dir.join("log.csv"), cfg.solver.record_time)?;
    if let Some(last) = out.log.last() {
        println!("iterations={} primal={:e} dual={:e}", last.iter, last.primal, last.dual);
        if has_truth {
            println!("PSNR={:.2} dB", last.psnr);
        }
    }
    Ok(())
}

pub struct BenchArgs {
    pub size: usize,
    pub window_radius: usize,
    pub patch_sides: Vec<usize>,
    pub bandwidth: f64,
    pub repeats: usize,
    pub fast_only: bool,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

pub fn bench(a: &BenchArgs) -> anyhow::Result<()> {
    if a.size == 0 || a.repeats == 0 || a.patch_sides.is_empty() {
        return Err(config_error("--size, --repeats and --patch-sides must be nonzero"));
    }
    let opts = BenchOptions {
        size: a.size,
        window_radius: a.window_radius,
        patch_sides: a.patch_sides.clone(),
        bandwidth: a.bandwidth,
        repeats: a.repeats,
        fast_only: a.fast_only,
        seed: a.seed,
    };
    let rows = bench_denoiser(&opts)?;
    let csv = bench_csv(&rows);
    print!("{csv}");
    if let Some(path) = &a.output {
        std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
