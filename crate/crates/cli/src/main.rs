mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Settings;

#[derive(Parser)]
#[command(
    name = "fucik",
    version,
    about = "First nontrivial Fucik curve of the 1D p-Laplacian and related solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First and second eigenvalues with the first eigenfunction.
    Eig(EigArgs),
    /// Mountain-pass level c(s) of the shifted Rayleigh functional.
    Mpass(MpassArgs),
    /// Trace the first nontrivial curve over a grid of shifts.
    Curve(CurveArgs),
    /// Region of (a, b) relative to a traced spectrum.
    Classify(ClassifyArgs),
    /// Multiplicity experiment for an asymptotically Fucik nonlinearity.
    Solve(SolveArgs),
    /// Run the invariant suite and print a pass/fail table.
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Exponent of the p-Laplacian.
    #[arg(long)]
    p: Option<f64>,
    /// Interior mesh nodes on (0, 1).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "FUCIK_WORKERS")]
    workers: Option<usize>,
    /// JSON config file; flags take precedence over its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            p: self.p,
            nodes: self.nodes,
            tol: self.tol,
            seed: self.seed,
            ..Settings::default()
        }
    }
}

#[derive(Args)]
struct EigArgs {
    #[command(flatten)]
    common: Common,
    /// CSV dump of the first eigenfunction.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MpassArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    beads: Option<usize>,
    /// CSV sweep log.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// CSV of the final path.
    #[arg(long)]
    path_csv: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    /// Uniform grid on [0, s_max]; ignored when --s-grid is given.
    #[arg(long)]
    s_max: Option<f64>,
    /// Points of the uniform grid.
    #[arg(long)]
    samples: Option<usize>,
    /// Explicit ascending grid starting at 0.
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    #[arg(long)]
    beads: Option<usize>,
    /// CSV with both mirrored branches.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Spectrum JSON written by `curve`.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    /// Distance to the spectrum below which no region is assigned.
    #[arg(long)]
    band: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    t_small: Option<f64>,
    #[arg(long)]
    t_large: Option<f64>,
    /// Spectrum JSON; traced on the default grid when absent.
    #[arg(long)]
    spectrum: Option<PathBuf>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    beads: Option<usize>,
    /// Directory receiving one CSV per solution.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    /// Random samples per row.
    #[arg(long)]
    samples: Option<usize>,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Eig(a) => &a.common,
            Command::Mpass(a) => &a.common,
            Command::Curve(a) => &a.common,
            Command::Classify(a) => &a.common,
            Command::Solve(a) => &a.common,
            Command::Check(a) => &a.common,
        }
    }

    fn flags(&self) -> Settings {
        let base = self.common().settings();
        match self {
            Command::Eig(_) => base,
            Command::Mpass(a) => Settings {
                s: a.s,
                beads: a.beads,
                ..base
            },
            Command::Curve(a) => Settings {
                s_max: a.s_max,
                samples: a.samples,
                s_grid: a.s_grid.clone(),
                beads: a.beads,
                ..base
            },
            Command::Classify(a) => Settings {
                a: a.a,
                b: a.b,
                spectrum: a.spectrum.clone(),
                band: a.band,
                ..base
            },
            Command::Solve(a) => Settings {
                a0: a.a0,
                b0: a.b0,
                a: a.a,
                b: a.b,
                t_small: a.t_small,
                t_large: a.t_large,
                spectrum: a.spectrum.clone(),
                restarts: a.restarts,
                beads: a.beads,
                ..base
            },
            Command::Check(a) => Settings {
                samples: a.samples,
                ..base
            },
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let common = cli.command.common();
    let file = match &common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = cli.command.flags().over(file);
    settings.validate()?;
    if let Some(w) = common.workers {
        if w == 0 {
            config::usage!("--workers must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(w).build_global()?;
    }
    let out = common.out.as_deref();
    match &cli.command {
        Command::Eig(a) => commands::eig(&settings, out, a.csv.as_deref()),
        Command::Mpass(a) => commands::mpass(&settings, out, a.csv.as_deref(), a.path_csv.as_deref()),
        Command::Curve(a) => commands::curve(&settings, out, a.csv.as_deref()),
        Command::Classify(_) => commands::classify(&settings, out),
        Command::Solve(a) => commands::solve(&settings, out, a.csv_dir.as_deref()),
        Command::Check(_) => commands::check(&settings, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => output::report_error(&e),
    }
}
