use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use energy_space::Error;

mod commands;
mod report;

use report::Format;

#[derive(Parser)]
#[command(
    name = "energy-space",
    version,
    about = "Energy Hilbert spaces of weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Edge-list path or generator: zchain, zd:D, geom:R, star:K, complete:K
    #[arg(long)]
    pub graph: Option<String>,
    /// Base point label
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the pass/fail tolerance of the command
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Clone)]
pub struct SectionArgs {
    /// Finite section: box:K, all, or a JSON list of vertices
    #[arg(long)]
    pub section: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Free)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Free,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FunctionArg {
    Dipole,
    Harmonic,
}

#[derive(Subcommand)]
enum Command {
    /// Dipoles v_x on a finite section
    Dipole {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        window: String,
    },
    /// Kernel matrix of dipole inner products over a window
    Gram {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        window: String,
    },
    /// Dirac masses as combinations of dipoles
    Reconstruct {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        window: String,
    },
    /// Monopole energies along a filtration
    Monopole {
        #[command(flatten)]
        common: Common,
        /// Monopole vertex (default: the base point)
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long, default_value = "box:30")]
        filtration: String,
    },
    /// Graph from a Dirac Gram matrix, and the graph/kernel round trip
    Dual {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        gram_file: Option<PathBuf>,
    },
    /// Finite-energy harmonic functions along a filtration
    Harmonic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "box:40")]
        filtration: String,
    },
    /// Deficiency indicators at a negative probe
    Deficiency {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "box:30")]
        filtration: String,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        lambda: f64,
        /// Shooting span on chains
        #[arg(long, default_value_t = 40)]
        span: usize,
    },
    /// Normal derivatives and boundary sums along a filtration
    Boundary {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "box:10")]
        filtration: String,
        /// Dipole vertex for the test function
        #[arg(long)]
        vertex: Option<String>,
        #[arg(long, value_enum, default_value_t = FunctionArg::Dipole)]
        function: FunctionArg,
        /// Vertex sequence for a boundary-point limit
        #[arg(long)]
        window: Option<String>,
    },
    /// Energies of level indicators
    Indicator {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "box:10")]
        filtration: String,
        /// Dipole vertices for the weak-null scan
        #[arg(long)]
        window: Option<String>,
    },
    /// Fourier-side and closed-form checks on the chain
    Lattice {
        #[command(flatten)]
        common: Common,
        /// x,y for the closed forms
        #[arg(long, default_value = "3,0")]
        window: String,
        /// Comma-separated ε grid for the monopole symbol
        #[arg(long)]
        eps: Option<String>,
    },
    /// Monte Carlo checks of the Gaussian field identities
    GaussianCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        section: SectionArgs,
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = energy_space::gaussian::DEFAULT_SAMPLES)]
        samples: usize,
    },
}

fn is_validation(e: &anyhow::Error) -> bool {
    match e.downcast_ref::<Error>() {
        Some(Error::NotPositiveDefinite { .. } | Error::NoConvergence(_)) => false,
        Some(_) => true,
        None => false,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (format, result) = match cli.command {
        Command::Dipole {
            common,
            section,
            window,
        } => (common.format, commands::dipole(&common, &section, &window)),
        Command::Gram {
            common,
            section,
            window,
        } => (common.format, commands::gram(&common, &section, &window)),
        Command::Reconstruct {
            common,
            section,
            window,
        } => (
            common.format,
            commands::reconstruct(&common, &section, &window),
        ),
        Command::Monopole {
            common,
            vertex,
            filtration,
        } => (
            common.format,
            commands::monopole(&common, vertex.as_deref(), &filtration),
        ),
        Command::Dual {
            common,
            section,
            gram_file,
        } => (
            common.format,
            commands::dual(&common, &section, gram_file.as_deref()),
        ),
        Command::Harmonic { common, filtration } => {
            (common.format, commands::harmonic(&common, &filtration))
        }
        Command::Deficiency {
            common,
            filtration,
            lambda,
            span,
        } => (
            common.format,
            commands::deficiency(&common, &filtration, lambda, span),
        ),
        Command::Boundary {
            common,
            filtration,
            vertex,
            function,
            window,
        } => (
            common.format,
            commands::boundary(
                &common,
                &filtration,
                vertex.as_deref(),
                function,
                window.as_deref(),
            ),
        ),
        Command::Indicator {
            common,
            filtration,
            window,
        } => (
            common.format,
            commands::indicator(&common, &filtration, window.as_deref()),
        ),
        Command::Lattice {
            common,
            window,
            eps,
        } => (
            common.format,
            commands::lattice(&common, &window, eps.as_deref()),
        ),
        Command::GaussianCheck {
            common,
            section,
            window,
            samples,
        } => (
            common.format,
            commands::gaussian_check(&common, &section, &window, samples),
        ),
    };
    match result.and_then(|report| {
        let mut out = std::io::stdout().lock();
        report.write(format, &mut out)?;
        out.flush()?;
        Ok(())
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_validation(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
