use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use fucik_core::bvp::{multiplicity_experiment, Nonlinearity};
use fucik_core::checks::{render_table, run_checks, CheckConfig};
use fucik_core::eigen::compute_lambda1;
use fucik_core::energy::{FucikParams, ShiftParam};
use fucik_core::minimax::{mountain_pass_c, verify_critical_point};
use fucik_core::spectrum::{classify as classify_point, default_s_grid, trace_curve, TraceConfig};
use fucik_core::{Domain, EigenPair, Exponent, MinimaxConfig, MinimaxResult, SolveConfig, SpectrumData};
use serde::Serialize;

use crate::config::{usage, Settings};
use crate::output::{emit, provenance, write_file, Artifact, EXIT_INCOMPLETE};

fn mesh(settings: &Settings) -> Result<(Domain, Exponent)> {
    Ok((Domain::unit(settings.nodes())?, Exponent::new(settings.p())?))
}

fn eigenpair(settings: &Settings) -> Result<EigenPair> {
    let (dom, p) = mesh(settings)?;
    Ok(compute_lambda1(&dom, &p, settings.tol())?)
}

fn minimax_config(settings: &Settings) -> MinimaxConfig {
    let d = MinimaxConfig::default();
    MinimaxConfig {
        beads: settings.beads.unwrap_or(d.beads),
        ..d
    }
}

fn load_spectrum(path: &Path) -> Result<SpectrumData> {
    let file = std::fs::File::open(path).with_context(|| format!("opening spectrum {}", path.display()))?;
    Ok(SpectrumData::read_json(std::io::BufReader::new(file))?)
}

#[derive(Serialize)]
struct Pair<T> {
    lambda1: T,
    lambda2: T,
}

#[derive(Serialize)]
struct EigOutput {
    lambda1: f64,
    lambda2: f64,
    residuals: Pair<f64>,
    iterations: Pair<usize>,
}

pub fn eig(settings: &Settings, out: Option<&Path>, csv: Option<&Path>) -> Result<ExitCode> {
    let e = eigenpair(settings)?;
    let second = mountain_pass_c(ShiftParam::new(0.0)?, &e, &minimax_config(settings))?;
    let result = EigOutput {
        lambda1: e.lambda,
        lambda2: second.c,
        residuals: Pair {
            lambda1: e.residual,
            lambda2: second.grad_norm_at_max,
        },
        iterations: Pair {
            lambda1: e.iterations,
            lambda2: second.iterations + second.newton_iterations,
        },
    };
    write_file(csv, |w| e.phi.field().write_csv(w))?;
    emit(
        out,
        &Artifact {
            command: "eig",
            provenance: provenance("eig", settings, *e.domain(), e.p)?,
            settings,
            result,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MpassOutput<'a> {
    lambda1: f64,
    s: f64,
    c: f64,
    /// Residual of the Fucik equation at `(s + c, c)` for the saddle.
    verified_residual: f64,
    minimax: &'a MinimaxResult,
}

pub fn mpass(settings: &Settings, out: Option<&Path>, csv: Option<&Path>, path_csv: Option<&Path>) -> Result<ExitCode> {
    let e = eigenpair(settings)?;
    let s = ShiftParam::new(settings.s.unwrap_or(0.0))?;
    let r = mountain_pass_c(s, &e, &minimax_config(settings))?;
    write_file(csv, |w| r.write_sweep_csv(w))?;
    write_file(path_csv, |w| r.path.write_csv(w, s))?;
    let result = MpassOutput {
        lambda1: e.lambda,
        s: s.value(),
        c: r.c,
        verified_residual: verify_critical_point(&r, s),
        minimax: &r,
    };
    emit(
        out,
        &Artifact {
            command: "mpass",
            provenance: provenance("mpass", settings, *e.domain(), e.p)?,
            settings,
            result,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

fn s_grid(settings: &Settings, lambda1: f64) -> Result<Vec<f64>> {
    if let Some(grid) = &settings.s_grid {
        return Ok(grid.clone());
    }
    match settings.s_max {
        Some(s_max) => {
            if !(s_max > 0.0 && s_max.is_finite()) {
                usage!("--s-max must be positive, got {s_max}");
            }
            let k = settings.samples.unwrap_or(11);
            Ok((0..k).map(|i| s_max * i as f64 / (k - 1) as f64).collect())
        }
        None => Ok(default_s_grid(lambda1)),
    }
}

/// The spectrum file is written unwrapped: it carries its own provenance and
/// is read back by `classify` and `solve`.
pub fn curve(settings: &Settings, out: Option<&Path>, csv: Option<&Path>) -> Result<ExitCode> {
    let e = eigenpair(settings)?;
    let grid = s_grid(settings, e.lambda)?;
    let cfg = TraceConfig {
        minimax: minimax_config(settings),
        ..TraceConfig::default()
    };
    let spec = trace_curve(&e, &grid, &cfg)?;
    write_file(csv, |w| spec.write_csv(w))?;
    match out {
        Some(path) => write_file(Some(path), |w| spec.write_json(w))?,
        None => {
            spec.write_json(std::io::stdout().lock())?;
            println!();
        }
    }
    for flag in &spec.flags {
        eprintln!("warning: {flag}");
    }
    for f in &spec.failures {
        eprintln!("warning: s = {}: {}", f.s, f.message);
    }
    Ok(if spec.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INCOMPLETE)
    })
}

pub fn classify(settings: &Settings, out: Option<&Path>) -> Result<ExitCode> {
    let a = Settings::require(settings.a, "a")?;
    let b = Settings::require(settings.b, "b")?;
    let Some(path) = &settings.spectrum else {
        usage!("missing --spectrum (flag or config file)");
    };
    let spec = load_spectrum(path)?;
    let band = settings.band.unwrap_or_else(|| spec.default_band());
    let result = classify_point(a, b, &spec, band)?;
    emit(
        out,
        &Artifact {
            command: "classify",
            provenance: provenance("classify", settings, spec.provenance.domain, spec.provenance.p)?,
            settings,
            result,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn solve(settings: &Settings, out: Option<&Path>, csv_dir: Option<&Path>) -> Result<ExitCode> {
    let ab0 = FucikParams::new(
        Settings::require(settings.a0, "a0")?,
        Settings::require(settings.b0, "b0")?,
    )?;
    let ab = FucikParams::new(Settings::require(settings.a, "a")?, Settings::require(settings.b, "b")?)?;
    let e = eigenpair(settings)?;
    let f = Nonlinearity::model(
        ab0,
        ab,
        e.p,
        settings.t_small.unwrap_or(0.5),
        settings.t_large.unwrap_or(2.0),
    )?;
    let spec = match &settings.spectrum {
        Some(path) => {
            let spec = load_spectrum(path)?;
            if spec.provenance.p.p != e.p.p {
                usage!(
                    "spectrum was traced at p = {}, run uses p = {}",
                    spec.provenance.p.p,
                    e.p.p
                );
            }
            spec
        }
        None => {
            let cfg = TraceConfig {
                minimax: minimax_config(settings),
                ..TraceConfig::default()
            };
            trace_curve(&e, &default_s_grid(e.lambda), &cfg)?
        }
    };
    let defaults = SolveConfig::default();
    let cfg = SolveConfig {
        seed: settings.seed(),
        restarts: settings.restarts.unwrap_or(defaults.restarts),
        beads: settings.beads.unwrap_or(defaults.beads),
        ..defaults
    };
    let report = multiplicity_experiment(&f, &spec, &e, &cfg)?;
    if let Some(dir) = csv_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (k, sol) in report.solutions.iter().enumerate() {
            let path = dir.join(format!("solution_{k}.csv"));
            write_file(Some(&path), |w| sol.field.write_csv(w))?;
        }
    }
    for m in &report.missing {
        eprintln!("missing: {m}");
    }
    let complete = report.is_complete();
    emit(
        out,
        &Artifact {
            command: "solve",
            provenance: provenance("solve", settings, *e.domain(), e.p)?,
            settings,
            result: report,
        },
    )?;
    Ok(if complete {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INCOMPLETE)
    })
}

pub fn check(settings: &Settings, out: Option<&Path>) -> Result<ExitCode> {
    let d = CheckConfig::default();
    let cfg = CheckConfig {
        p: settings.p(),
        nodes: settings.nodes.unwrap_or(d.nodes),
        seed: settings.seed(),
        samples: settings.samples.unwrap_or(d.samples),
    };
    let rows = run_checks(&cfg)?;
    print!("{}", render_table(&rows));
    let passed = rows.iter().all(|r| r.passed);
    if out.is_some() {
        let (dom, p) = (Domain::unit(cfg.nodes)?, Exponent::new(cfg.p)?);
        emit(
            out,
            &Artifact {
                command: "check",
                provenance: provenance("check", settings, dom, p)?,
                settings,
                result: &rows,
            },
        )?;
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INCOMPLETE)
    })
}
