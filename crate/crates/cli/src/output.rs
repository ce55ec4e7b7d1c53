use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use fucik_core::spectrum::{config_hash, Provenance};
use fucik_core::{Domain, Exponent};
use serde::Serialize;

use crate::config::{Settings, Usage};

/// Exit status when a scenario requires a solution that was not found or an
/// invariant row failed.
pub const EXIT_INCOMPLETE: u8 = 3;

/// Envelope of every JSON artifact. Contains no timestamps, so identical
/// settings give identical bytes.
#[derive(Serialize)]
pub struct Artifact<'a, R: Serialize> {
    pub command: &'a str,
    pub provenance: Provenance<f64>,
    pub settings: &'a Settings,
    pub result: R,
}

pub fn provenance(command: &str, settings: &Settings, domain: Domain, p: Exponent) -> Result<Provenance<f64>> {
    Ok(Provenance {
        domain,
        p,
        config_hash: config_hash(&(command, settings))?,
        version: fucik_core::VERSION.to_string(),
    })
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Pretty JSON to `path`, or to stdout.
pub fn emit<R: Serialize>(out: Option<&Path>, artifact: &Artifact<R>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = open(path)?;
            serde_json::to_writer_pretty(&mut w, artifact)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            serde_json::to_writer_pretty(&mut w, artifact)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Runs `write` against a buffered file at `path` when one is given.
pub fn write_file(
    path: Option<&Path>,
    write: impl FnOnce(&mut BufWriter<File>) -> fucik_core::Result<()>,
) -> Result<()> {
    if let Some(path) = path {
        let mut w = open(path)?;
        write(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn variant_name(e: &fucik_core::Error) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric()).collect()
}

/// Structured error on stderr; 2 for configuration problems, 1 otherwise.
pub fn report_error(e: &anyhow::Error) -> ExitCode {
    let (kind, code) = if e.downcast_ref::<Usage>().is_some() {
        ("usage".to_string(), 2)
    } else if let Some(core) = e.downcast_ref::<fucik_core::Error>() {
        (variant_name(core), 1)
    } else {
        ("io".to_string(), 1)
    };
    let body = serde_json::json!({ "error": { "kind": kind, "message": format!("{e:#}") } });
    eprintln!("{body}");
    if code == 2 {
        eprintln!("run `fucik --help` for usage");
    }
    ExitCode::from(code)
}
