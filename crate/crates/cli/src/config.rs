//! Run settings: command-line flags override a JSON config file, which
//! overrides the built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// An invalid or incomplete run configuration.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

macro_rules! usage {
    ($($t:tt)*) => {
        return Err(anyhow::Error::new($crate::config::Usage(format!($($t)*))))
    };
}
pub(crate) use usage;

/// Every tunable of every command. Absent fields fall through to the next
/// source.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_small: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_large: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Settings { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        match serde_json::from_str(&text) {
            Ok(s) => Ok(s),
            Err(e) => usage!("config {}: {e}", path.display()),
        }
    }

    /// Fields of `self` win over those of `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        overlay!(
            self, lower, p, nodes, tol, seed, beads, s, s_max, samples, s_grid, a, b, a0, b0, t_small, t_large, band,
            restarts, spectrum
        )
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or(2.0)
    }

    pub fn nodes(&self) -> usize {
        self.nodes.unwrap_or(200)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-10)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn require(value: Option<f64>, flag: &str) -> Result<f64> {
        match value {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => usage!("--{flag} must be finite, got {v}"),
            None => usage!("missing --{flag} (flag or config file)"),
        }
    }

    /// Rejects values no command accepts before any work starts.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            if !(p > 1.0 && p.is_finite()) {
                usage!("--p must satisfy 1 < p < inf, got {p}");
            }
        }
        if self.nodes == Some(0) {
            usage!("--nodes must be positive");
        }
        if let Some(t) = self.tol {
            if t.is_nan() || t <= 0.0 {
                usage!("--tol must be positive, got {t}");
            }
        }
        if let Some(s) = self.s {
            if s.is_nan() || s < 0.0 {
                usage!("--s must be >= 0, got {s}");
            }
        }
        if let Some(b) = self.beads {
            if b < 5 {
                usage!("--beads must be at least 5, got {b}");
            }
        }
        if let Some(k) = self.samples {
            if k < 2 {
                usage!("--samples must be at least 2, got {k}");
            }
        }
        Ok(())
    }
}
