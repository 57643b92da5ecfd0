//! Command-line surface for the point-scatterer toolkit: norm tables,
//! spectral-function scans, perturbed spectra, matrix elements, sieves, and
//! the rank-one oracle suite, each emitting deterministic CSV/JSON artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::RunConfig;

/// Errors a command can exit with: everything from the library, plus I/O on
/// the artifact files themselves.
#[derive(Debug)]
pub enum CliError {
    Lib(scatterer::error::Error),
    Io(std::io::Error),
}

impl From<scatterer::error::Error> for CliError {
    fn from(e: scatterer::error::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    /// 2 validation, 3 numerical, 4 I/O.
    fn exit_code(&self) -> u8 {
        use scatterer::error::Error;
        match self {
            CliError::Lib(Error::Domain(_)) | CliError::Lib(Error::Range(_)) => 2,
            CliError::Lib(Error::Capacity(_)) | CliError::Lib(Error::Pole { .. }) => 3,
            CliError::Io(_) => 4,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "scatterer",
    version,
    about = "Point scatterer on a flat torus: spectra, eigenfunctions, sieves"
)]
struct Cli {
    /// TOML file with the run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Lattice: p/q for the exact ratio a^4 = p/q, or a decimal a^2.
    #[arg(long, global = true)]
    lattice: Option<String>,

    /// Extension phase phi in (-pi, pi).
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,

    /// Spectral cutoff.
    #[arg(long = "X", global = true, allow_negative_numbers = true)]
    x: Option<f64>,

    /// Annulus sieve exponent delta.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta: Option<f64>,

    /// Gap sieve exponent epsilon.
    #[arg(long = "eps-gap", global = true, allow_negative_numbers = true)]
    eps_gap: Option<f64>,

    /// Annulus-counting exponent theta.
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,

    /// Tail tolerance for banded lattice sums.
    #[arg(long = "tail-tol", global = true)]
    tail_tol: Option<f64>,

    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for artifacts.
    #[arg(long = "out", global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm table and gap statistics up to X.
    Norms,
    /// Spectral function F on a sample grid.
    Specfun {
        /// Left edge of the scan.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        from: f64,
        /// Right edge of the scan; defaults to X.
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        /// Number of midpoint samples.
        #[arg(long, default_value_t = 2400)]
        samples: usize,
    },
    /// Perturbed eigenvalues up to X.
    Spectrum,
    /// Matrix elements <e_zeta g, g> over the spectrum, or at one lambda.
    Matrix {
        /// Fourier mode, as m,n.
        #[arg(long)]
        zeta: String,
        /// Annulus truncation width; omit for the full eigenfunction.
        #[arg(long = "L")]
        l: Option<f64>,
        /// Evaluate at this lambda instead of the whole spectrum.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
    },
    /// Dyadic-window decay of matrix elements over the sieved spectrum.
    Equidist {
        /// Fourier mode, as m,n.
        #[arg(long)]
        zeta: String,
    },
    /// Density-one sieves: gap filter, annulus filter, or intersection.
    Sieve {
        /// Annulus filter direction, as m,n.
        #[arg(long)]
        zeta: Option<String>,
        /// Intersect the gap filter with all annulus filters up to |zeta| <= J.
        #[arg(long = "J")]
        j: Option<f64>,
    },
    /// Rank-one secular solver against the dense eigensolver oracle.
    Rankone {
        /// Print the analytic 2x2 case instead of running the suite.
        #[arg(long)]
        demo: bool,
        /// Number of seeded models.
        #[arg(long, default_value_t = 25)]
        cases: usize,
        /// Largest model dimension.
        #[arg(long = "dim-max", default_value_t = 32)]
        dim_max: usize,
    },
}

impl Cli {
    fn build_config(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.lattice {
            config.lattice = v.clone();
        }
        if let Some(v) = self.phi {
            config.phi = v;
        }
        if let Some(v) = self.x {
            config.x = v;
        }
        if let Some(v) = self.delta {
            config.delta = v;
        }
        if let Some(v) = self.eps_gap {
            config.epsilon_gap = v;
        }
        if let Some(v) = self.theta {
            config.theta = v;
        }
        if let Some(v) = self.tail_tol {
            config.tail_tol = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = &self.out {
            config.output_dir = v.clone();
        }
        Ok(config)
    }
}

/// SCATTERER_THREADS caps the global worker pool before any parallel work.
fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SCATTERER_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().map_err(|_| {
        scatterer::error::Error::domain(format!(
            "SCATTERER_THREADS = {value:?} is not a thread count"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| scatterer::error::Error::domain(format!("thread pool: {e}")))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli.build_config()?;
    match &cli.command {
        Command::Norms => commands::cmd_norms(&config),
        Command::Specfun { from, to, samples } => {
            commands::cmd_specfun(&config, *from, *to, *samples)
        }
        Command::Spectrum => commands::cmd_spectrum(&config),
        Command::Matrix { zeta, l, lambda } => {
            commands::cmd_matrix(&config, zeta, *l, *lambda)
        }
        Command::Equidist { zeta } => commands::cmd_equidist(&config, zeta),
        Command::Sieve { zeta, j } => commands::cmd_sieve(&config, zeta.as_deref(), *j),
        Command::Rankone { demo, cases, dim_max } => {
            commands::cmd_rankone(&config, *demo, *cases, *dim_max)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code());
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
