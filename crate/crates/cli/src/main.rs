//! `casimir`: Lifshitz energies, pressures, sign maps and sweeps from the
//! command line. Exit codes: 0 success, 1 attraction check failed, 2 usage
//! or input error, 3 quadrature did not converge (best estimate printed).

mod commands;
mod materials;
mod output;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use casimir_core::sign::{log_spaced, SignGrid, UvlMode};
use casimir_core::{Execution, QuadratureConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::Status;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] casimir_core::Error),
    #[error("output: {0}")]
    Io(#[from] io::Error),
}

#[derive(Parser)]
#[command(name = "casimir", version, about = "Casimir energy, pressure and force-sign calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct QuadArgs {
    /// Relative tolerance of the double integral.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Panel budget of each adaptive integration.
    #[arg(long, default_value_t = 1000)]
    max_subdivisions: usize,
    /// Evaluate without the thread pool.
    #[arg(long)]
    sequential: bool,
}

impl QuadArgs {
    fn config(self) -> QuadratureConfig {
        let mut q = QuadratureConfig::default().with_rel_tol(self.rel_tol);
        q.max_subdivisions = self.max_subdivisions;
        if self.sequential {
            q.execution = Execution::Sequential;
        }
        q
    }
}

#[derive(Args)]
struct PairArgs {
    /// Material JSON file or built-in name (pc, vacuum, pmc).
    #[arg(long)]
    material1: String,
    #[arg(long)]
    material2: String,
}

#[derive(Args)]
struct QuantityArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Separation in metres.
    #[arg(long, allow_hyphen_values = true)]
    gap: f64,
    #[command(flatten)]
    quad: QuadArgs,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    CommonIndex,
    VacuumIndex,
}

#[derive(Subcommand)]
enum Command {
    /// Energy per unit area (J/m^2).
    Energy(QuantityArgs),
    /// Pressure (Pa, negative attracts).
    Pressure(QuantityArgs),
    /// Energy and pressure over log-spaced separations (CSV).
    Sweep {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1e-7)]
        from: f64,
        #[arg(long, default_value_t = 5e-6)]
        to: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Force sign over constant (eps, mu) grids (CSV, summary JSON).
    Signmap {
        /// Axis values: `v1,v2,...` or `log:LO:HI:N`. `inf` is a perfect conductor.
        #[arg(long, default_value = "1")]
        eps1: String,
        #[arg(long, default_value = "1")]
        mu1: String,
        #[arg(long, default_value = "1")]
        eps2: String,
        #[arg(long, default_value = "1")]
        mu2: String,
        /// Put a perfect conductor on side 2 (overrides --eps2/--mu2).
        #[arg(long)]
        conductor: bool,
        #[arg(long, default_value_t = 1e-6)]
        gap: f64,
        /// Indeterminate band half-width in Pa; default max(10 x error, 1e-12).
        #[arg(long)]
        threshold: Option<f64>,
        /// Summary JSON destination; standard error when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Force sign over (mu1, mu2) with a uniform velocity of light.
    Uvlmap {
        #[arg(long)]
        mu1: String,
        #[arg(long)]
        mu2: String,
        #[arg(long, value_enum, default_value = "common-index")]
        mode: Mode,
        #[arg(long, default_value_t = 1e-6)]
        gap: f64,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Tabulated absorption (CSV) to a material model via Kramers-Kronig.
    Kk {
        /// CSV with header `omega_rad_s,eps_imag`.
        table: PathBuf,
        /// Tail configuration; defaults to `<stem>.json` beside the table.
        #[arg(long)]
        tails: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        /// Tolerance for the transform spot checks.
        #[arg(long, default_value_t = 1e-4)]
        rel_tol: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sphere-plate force in the proximity force approximation (N).
    Pfa {
        #[arg(long)]
        sphere: String,
        #[arg(long)]
        plate: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, allow_hyphen_values = true)]
        gap: f64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Checks that dispersive models attract at every pairing and separation.
    Attraction {
        /// Repeat for each model.
        #[arg(long = "material", required = true)]
        materials: Vec<String>,
        #[arg(long, default_value_t = 5e-8)]
        from: f64,
        #[arg(long, default_value_t = 5e-6)]
        to: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

fn parse_axis(name: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("--{name}: expected 'v1,v2,...' or 'log:LO:HI:N', got '{spec}'"));
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, n] = parts[..] else { return Err(bad()) };
        let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
        let n: usize = n.parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && n > 0) {
            return Err(bad());
        }
        return Ok(log_spaced(lo, hi, n));
    }
    spec.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CASIMIR_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("CASIMIR_THREADS must be a non-negative integer, got '{value}'")))?;
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Energy(a) | Command::Pressure(a) if a.json && a.csv => unreachable!("clap rejects both"),
        Command::Energy(a) => {
            commands::quantity(true, &a.pair.material1, &a.pair.material2, a.gap, &a.quad.config(), a.csv, out)
        }
        Command::Pressure(a) => {
            commands::quantity(false, &a.pair.material1, &a.pair.material2, a.gap, &a.quad.config(), a.csv, out)
        }
        Command::Sweep { pair, from, to, points, quad } => {
            commands::sweep(&pair.material1, &pair.material2, from, to, points, &quad.config(), out)
        }
        Command::Signmap { eps1, mu1, eps2, mu2, conductor, gap, threshold, summary, quad } => {
            let (eps2, mu2) = if conductor {
                (vec![f64::INFINITY], vec![1.0])
            } else {
                (parse_axis("eps2", &eps2)?, parse_axis("mu2", &mu2)?)
            };
            let grid = SignGrid { eps1: parse_axis("eps1", &eps1)?, mu1: parse_axis("mu1", &mu1)?, eps2, mu2 };
            commands::signmap(grid, gap, threshold, &quad.config(), summary.as_deref(), out)
        }
        Command::Uvlmap { mu1, mu2, mode, gap, threshold, summary, quad } => {
            let mode = match mode {
                Mode::CommonIndex => UvlMode::CommonIndex,
                Mode::VacuumIndex => UvlMode::VacuumIndex,
            };
            let (mu1, mu2) = (parse_axis("mu1", &mu1)?, parse_axis("mu2", &mu2)?);
            commands::uvlmap(mu1, mu2, mode, gap, threshold, &quad.config(), summary.as_deref(), out)
        }
        Command::Kk { table, tails, label, rel_tol, output } => {
            commands::kk(&table, tails.as_deref(), label, rel_tol, output.as_ref(), out)
        }
        Command::Pfa { sphere, plate, radius, gap, quad } => {
            commands::pfa(&sphere, &plate, radius, gap, &quad.config(), out)
        }
        Command::Attraction { materials, from, to, points, summary, quad } => {
            commands::attraction(&materials, from, to, points, &quad.config(), summary.as_deref(), out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let status = run(cli, &mut out);
    let _ = out.flush();
    match status {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => {
            eprintln!("error: attraction check failed; see counterexamples in the summary");
            ExitCode::from(1)
        }
        Ok(Status::NotConverged) => {
            eprintln!("error: quadrature did not converge; best estimate printed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
