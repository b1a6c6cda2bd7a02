//! `swt`: command-line front end for steerwave.

mod commands;
mod rotation;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use steerwave::Error;

#[derive(Debug, Parser)]
#[command(name = "swt", version, about = "Steerable wavelet frames on regular grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BankArg {
    Zonal,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelWindow {
    Cubic,
    Bspline1,
    Bspline3,
    Flat,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Arccos2,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check quadrature exactness of a point set through degree t.
    DesignVerify {
        /// Text file with one point per line.
        #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
        file: Option<PathBuf>,
        /// icosahedron, dodecahedron, octahedron, cube or equiangular:N.
        #[arg(long)]
        builtin: Option<String>,
        /// Ambient dimension of the points in --file.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        t: usize,
    },
    /// Emit a zonal kernel profile as theta,lambda CSV.
    Kernel {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lmax: usize,
        /// Channel count used to scale the kernel.
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "cubic")]
        window: KernelWindow,
        /// Localization weight for --window optimal.
        #[arg(long, value_enum)]
        weight: Option<WeightArg>,
        /// Number of equally spaced angles in [0, π].
        #[arg(long, default_value_t = 721)]
        samples: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose a tensor into a steerable pyramid directory.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        scales: usize,
        #[arg(long, value_enum, default_value = "zonal")]
        bank: BankArg,
        /// Built-in design name or design file (zonal banks).
        #[arg(long)]
        design: Option<String>,
        #[arg(long)]
        lmax: usize,
        #[arg(long, default_value = "cubic")]
        window: steerwave::angular::Window,
        #[arg(long, default_value = "simoncelli-logcos")]
        radial: steerwave::frame::RadialKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the tensor from a pyramid directory.
    Reconstruct {
        #[arg(long)]
        pyramid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rotate the channels of a pyramid.
    Steer {
        #[arg(long)]
        pyramid: PathBuf,
        /// `angle=A` (d=2), `axis=x,y,z;angle=A` (d=3) or a CSV file with
        /// the rotation matrix, angles in radians.
        #[arg(long)]
        rotation: String,
        #[arg(long, value_enum)]
        mode: BankArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance suite and print its table.
    Selftest,
    /// Write a seeded Gaussian (or constant) test tensor.
    MakeTensor {
        /// Comma-separated grid shape, e.g. 64,64.
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fill with this value instead of noise.
        #[arg(long)]
        constant: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Outcome of a command that ran to completion but whose check failed.
#[derive(Debug)]
pub struct CheckFailed;

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<CheckFailed>() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::DesignVerification { .. }
            | Error::InsufficientStrength { .. }
            | Error::PartitionViolation(_)
            | Error::ManifestMismatch(_)
            | Error::NotARotation(_),
        ) => 2,
        _ => 1,
    }
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("SWT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("SWT_THREADS must be a non-negative integer, got `{value}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads()?;
    match cli.command {
        Command::DesignVerify { file, builtin, d, t } => commands::design_verify(file, builtin, d, t),
        Command::Kernel {
            d,
            lmax,
            nmax,
            window,
            weight,
            samples,
            out,
        } => commands::kernel(d, lmax, nmax, window, weight, samples, out),
        Command::Decompose {
            input,
            scales,
            bank,
            design,
            lmax,
            window,
            radial,
            out,
        } => commands::decompose(&commands::DecomposeArgs {
            input,
            scales,
            bank,
            design,
            lmax,
            window,
            radial,
            out,
        }),
        Command::Reconstruct { pyramid, out } => commands::reconstruct(&pyramid, &out),
        Command::Steer {
            pyramid,
            rotation,
            mode,
            out,
        } => commands::steer(&pyramid, &rotation, mode, &out),
        Command::Selftest => commands::selftest(),
        Command::MakeTensor {
            shape,
            seed,
            constant,
            out,
        } => commands::make_tensor(&shape, seed, constant, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if !err.is::<CheckFailed>() {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
