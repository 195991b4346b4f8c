use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coulomb_tmatrix::{
    make_energy_state, EndpointHandling, EnergyState, EvalOptions, QuadratureSpec, Representation,
    SeriesOptions, TwoBodySystem,
};
use coulomb_tmatrix_cli::{export, export_to_path, run_grid, run_validation, Exportable, Format, GridSpec};

const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "coulomb-tmatrix", version, about = "Off-shell Coulomb T-matrix at negative energy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the T-matrix over k × k' × cos θ for each representation.
    Grid(GridArgs),
    /// Cross-check every closed form and identity against the series.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Energy (physical mode, negative).
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// Reduced mass (physical mode).
    #[arg(long)]
    mu: Option<f64>,
    /// Reduced Planck constant (physical mode).
    #[arg(long)]
    hbar: Option<f64>,
    /// Charge product q1*q2 (physical mode).
    #[arg(long, allow_hyphen_values = true)]
    q1q2: Option<f64>,
    /// Interaction parameter; with --kappa selects dimensionless mode,
    /// otherwise overrides the value derived from the physical constants.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Bound-state momentum (dimensionless mode).
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long = "k-list", value_delimiter = ',', required = true)]
    k_list: Vec<f64>,
    #[arg(long = "kp-list", value_delimiter = ',', required = true)]
    kp_list: Vec<f64>,
    #[arg(long = "cos-list", value_delimiter = ',', required = true, allow_hyphen_values = true)]
    cos_list: Vec<f64>,
    /// Representations: born, series, schwinger, closed, closed-printed, separated, rational.
    #[arg(long, value_delimiter = ',', default_value = "series,schwinger,closed,separated,rational")]
    reps: Vec<Representation>,
    /// Relative tolerance for series and quadrature.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for row evaluation.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Relative deviation accepted as agreement.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Internal(String),
}

fn energy_state(a: &GridArgs) -> Result<EnergyState, Failure> {
    let physical = [a.energy, a.mu, a.hbar, a.q1q2];
    let usage = |e: coulomb_tmatrix::TMatrixError| Failure::Usage(e.to_string());
    match (a.kappa, physical.iter().all(Option::is_some), physical.iter().any(Option::is_some)) {
        (Some(kappa), _, false) => {
            let gamma = a
                .gamma
                .ok_or_else(|| Failure::Usage("--kappa requires --gamma".into()))?;
            EnergyState::dimensionless(kappa, gamma).map_err(usage)
        }
        (None, true, _) => {
            let system =
                TwoBodySystem::new(a.mu.unwrap(), a.q1q2.unwrap(), a.hbar.unwrap()).map_err(usage)?;
            let state = make_energy_state(system, a.energy.unwrap()).map_err(usage)?;
            match a.gamma {
                Some(g) => state.with_gamma(g).map_err(usage),
                None => Ok(state),
            }
        }
        _ => Err(Failure::Usage(
            "give either --energy --mu --hbar --q1q2 (physical mode) or --gamma --kappa (dimensionless mode)"
                .into(),
        )),
    }
}

fn options(tol: f64) -> Result<EvalOptions, Failure> {
    let usage = |e: coulomb_tmatrix::TMatrixError| Failure::Usage(format!("--tol: {e}"));
    let defaults = EvalOptions::default();
    Ok(EvalOptions {
        series: SeriesOptions::new(defaults.series.max_terms(), tol, defaults.series.acceleration())
            .map_err(usage)?,
        quadrature: QuadratureSpec::new(
            defaults.quadrature.abs_tol(),
            tol.min(defaults.quadrature.rel_tol()),
            defaults.quadrature.max_depth(),
            EndpointHandling::None,
        )
        .map_err(usage)?,
    })
}

fn write_out(format: Format, content: &Exportable<'_>, out: &Option<PathBuf>) -> Result<(), Failure> {
    let res = match out {
        Some(path) => export_to_path(format, content, path),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            export(format, content, &mut lock).and_then(|_| Ok(lock.flush()?))
        }
    };
    res.map_err(|e| match e {
        coulomb_tmatrix_cli::ExportError::Unsupported(_) => Failure::Usage(e.to_string()),
        _ => Failure::Internal(e.to_string()),
    })
}

fn grid(a: GridArgs) -> Result<u8, Failure> {
    let state = energy_state(&a)?;
    let spec = GridSpec::new(state, a.k_list, a.kp_list, a.cos_list, a.reps, options(a.tol)?)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    let output = run_grid(&spec, a.threads).map_err(|e| Failure::Internal(e.to_string()))?;
    write_out(a.format, &Exportable::Grid(&output), &a.out)?;
    Ok(0)
}

fn validate(a: ValidateArgs) -> Result<u8, Failure> {
    let report = run_validation(a.tol).map_err(|e| Failure::Usage(e.to_string()))?;
    write_out(a.format, &Exportable::Report(&report), &a.out)?;
    Ok(report.outcome().exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Grid(a) => grid(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal failure: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
