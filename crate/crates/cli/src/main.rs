use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torus_filippov::equivalence::Criterion;
use torus_filippov::tangency::DEFAULT_GRID;
use torus_filippov_cli::report::{to_json, write_file};
use torus_filippov_cli::{commands, sweep, CliError, Outcome, EXIT_OK};

/// Inelastic piecewise-linear Filippov systems on a torus.
#[derive(Debug, Parser)]
#[command(name = "torus-filippov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Write the run report here instead of to stderr.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accept an explicit B that breaks the inelastic constraint (region maps only).
    #[arg(long)]
    allow_non_inelastic: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Complete a system document with the inelastic partner B of A.
    DeriveB {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Classify the tangency set of the exterior field.
    Classify {
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Chart grid for the numerical fallback.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a hybrid trajectory and write it as CSV.
    Simulate {
        system: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        x0: [f64; 3],
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Label the chart grid by Filippov region.
    Regions {
        system: PathBuf,
        #[arg(long, default_value_t = 128)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check that the sliding orbit through a torus point closes.
    OrbitCheck {
        system: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p0: [f64; 3],
        #[command(flatten)]
        common: Common,
    },
    /// Decide orbit equivalence of the sliding dynamics of two systems.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also require hyperbolic spectra.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a parameter grid and write one report per cell plus an index.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut p = [0.0; 3];
    for (slot, part) in p.iter_mut().zip(parts) {
        *slot = part.parse().map_err(|_| format!("not a number: {part:?}"))?;
    }
    Ok(p)
}

fn run(command: Command) -> (Result<Outcome, CliError>, Option<PathBuf>) {
    match command {
        Command::DeriveB { input, out, common } => (commands::derive_b(&input, &out), common.report),
        Command::Classify { system, out, grid, svg, common } => (
            commands::classify(&system, &out, grid, svg.as_deref(), common.allow_non_inelastic),
            common.report,
        ),
        Command::Simulate { system, x0, tmax, out, svg, common } => (
            commands::simulate_cmd(&system, x0, tmax, &out, svg.as_deref(), common.allow_non_inelastic),
            common.report,
        ),
        Command::Regions { system, grid, out, svg, common } => (
            commands::regions(&system, grid, &out, svg.as_deref(), common.allow_non_inelastic),
            common.report,
        ),
        Command::OrbitCheck { system, p0, common } => (
            commands::orbit_check(&system, p0, common.allow_non_inelastic),
            common.report,
        ),
        Command::Equiv { first, second, out, strict, common } => {
            let criterion = if strict { Criterion::Strict } else { Criterion::Relaxed };
            (
                commands::equiv(&first, &second, &out, criterion, common.allow_non_inelastic),
                common.report,
            )
        }
        Command::Sweep { config, out_dir, grid, common } => {
            (sweep::sweep(&config, &out_dir, grid), common.report)
        }
    }
}

fn emit(outcome: Outcome, report_path: Option<PathBuf>) -> Result<(), CliError> {
    let report = to_json(&outcome.report)?;
    print!("{}", outcome.stdout);
    let _ = std::io::stdout().flush();
    let mut stderr = std::io::stderr().lock();
    for w in &outcome.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match report_path {
        Some(path) => write_file(&path, &report),
        None => {
            let _ = write!(stderr, "{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, report_path) = run(cli.command);
    match result.and_then(|outcome| emit(outcome, report_path)) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
