//! Library behind the `pnp` binary: batch front-end for denoising, simulation, restoration and
//! benchmarking.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration or input
//! error, 3 numerical divergence.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, Overrides};

#[derive(Parser)]
#[command(name = "pnp", version, about = "Plug-and-play ADMM restoration with DSG-NLM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply NLM or DSG-NLM to one image.
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Image the weights are computed from (default: the input).
        #[arg(long)]
        guide: Option<PathBuf>,
        /// Reads the `[denoiser]` section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        denoiser: Option<String>,
        #[arg(long)]
        patch_side: Option<usize>,
        #[arg(long)]
        window_radius: Option<usize>,
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Also apply the dense weight matrix and print the max-abs difference.
        #[arg(long)]
        oracle: bool,
    },
    /// Blur, downsample and add noise to the ground truth.
    SimulateSr(RunArgs),
    /// Simulate binary jot readouts of the ground truth.
    SimulateQis(RunArgs),
    /// Run PnP-ADMM on an observation.
    Restore(RunArgs),
    /// Time the summed-area and direct DSG-NLM paths.
    BenchDenoiser {
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 21)]
        window_radius: usize,
        #[arg(long, value_delimiter = ',', default_value = "11,17,23,29")]
        patch_sides: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        bandwidth: f64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Skip the direct path.
        #[arg(long)]
        fast_only: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the CSV here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `linearized` or `standard-cg`.
    #[arg(long)]
    solver: Option<String>,
    /// `nlm`, `dsg-adaptive`, `dsg-fixed` or `identity`.
    #[arg(long)]
    denoiser: Option<String>,
    #[arg(long)]
    freeze_at: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Fill the `time_ms` log column (makes logs non-reproducible).
    #[arg(long)]
    record_time: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            rho: self.rho,
            lambda: self.lambda,
            alpha: self.alpha,
            iters: self.iters,
            seed: self.seed,
            solver: self.solver.clone(),
            denoiser: self.denoiser.clone(),
            freeze_at: self.freeze_at,
            output_dir: self.output_dir.clone(),
            record_time: self.record_time,
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Denoise {
            input,
            output,
            guide,
            config,
            denoiser,
            patch_side,
            window_radius,
            bandwidth,
            oracle,
        } => commands::denoise(&commands::DenoiseArgs {
            input,
            output,
            guide,
            config,
            denoiser,
            patch_side,
            window_radius,
            bandwidth,
            oracle,
        }),
        Command::SimulateSr(a) => commands::simulate_sr(&a.config, &a.overrides()),
        Command::SimulateQis(a) => commands::simulate_qis(&a.config, &a.overrides()),
        Command::Restore(a) => commands::restore(&a.config, &a.overrides()),
        Command::BenchDenoiser {
            size,
            window_radius,
            patch_sides,
            bandwidth,
            repeats,
            fast_only,
            seed,
            output,
        } => commands::bench(&commands::BenchArgs {
            size,
            window_radius,
            patch_sides,
            bandwidth,
            repeats,
            fast_only,
            seed,
            output,
        }),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<pnp_core::Error>() {
            use pnp_core::Error as E;
            return match e {
                E::Diverged { .. } | E::CgBreakdown { .. } => 3,
                E::Mismatch(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return u8::try_from(e.exit_code()).unwrap_or(2);
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}
