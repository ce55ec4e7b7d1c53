//! The first nontrivial Fucik curve and the region classifier.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigen::EigenPair;
use crate::energy::ShiftParam;
use crate::error::{Error, Result};
use crate::grid::{Domain, Exponent};
use crate::minimax::{mountain_pass_c, mountain_pass_from, verify_critical_point, MinimaxConfig, MinimaxResult};
use crate::scalar::Real;

/// Version of the spectrum JSON layout.
pub const FORMAT_VERSION: u32 = 1;

/// Default half-width of the resonance band, as a fraction of `λ1`.
pub const BAND_FRACTION: f64 = 0.02;

/// One sample `(s, c(s))` of the upper branch; `a = s + c`, `b = c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CurvePoint<T> {
    pub s: T,
    pub c: T,
    pub a: T,
    pub b: T,
    pub grad_residual: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFailure {
    pub s: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Provenance<T> {
    pub domain: Domain<T>,
    pub p: Exponent<T>,
    pub config_hash: String,
    pub version: String,
}

/// SHA-256 of the canonical JSON encoding of `cfg`.
pub fn config_hash<S: Serialize>(cfg: &S) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumData<T> {
    pub format_version: u32,
    pub lambda1: T,
    pub lambda2: T,
    /// Upper branch, ascending in `s`; successful samples only.
    pub curve: Vec<CurvePoint<T>>,
    pub failures: Vec<CurveFailure>,
    /// Violations of the expected shape (for example a non-decreasing step).
    pub flags: Vec<String>,
    pub provenance: Provenance<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TraceConfig<T> {
    pub minimax: MinimaxConfig<T>,
    /// Start each `s` from the previous final path (sequential); otherwise
    /// all `s` run concurrently from the default path.
    pub warm_start: bool,
}

impl<T: Real> Default for TraceConfig<T> {
    fn default() -> Self {
        Self {
            minimax: MinimaxConfig::default(),
            warm_start: true,
        }
    }
}

/// `{0, λ1/4, λ1/2, λ1, 2λ1, 5λ1}`
pub fn default_s_grid<T: Real>(lambda1: T) -> Vec<T> {
    [0.0, 0.25, 0.5, 1.0, 2.0, 5.0]
        .iter()
        .map(|&f| T::lit(f) * lambda1)
        .collect()
}

/// Traces `c(s)` on `s_values` (ascending, starting at 0).
pub fn trace_curve<T: Real>(eig: &EigenPair<T>, s_values: &[T], cfg: &TraceConfig<T>) -> Result<SpectrumData<T>> {
    if s_values.first() != Some(&T::zero()) {
        return Err(Error::InvalidInput("s grid must start at 0".into()));
    }
    if s_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("s grid must be strictly ascending".into()));
    }
    cfg.minimax.validate()?;
    let shifts = s_values
        .iter()
        .map(|&s| ShiftParam::new(s))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<MinimaxResult<T>>> = if cfg.warm_start {
        let mut out = Vec::with_capacity(shifts.len());
        let mut prev: Option<MinimaxResult<T>> = None;
        for &s in &shifts {
            let r = match &prev {
                Some(pr) => mountain_pass_from(s, eig, pr.path.clone(), &cfg.minimax)
                    .or_else(|_| mountain_pass_c(s, eig, &cfg.minimax)),
                None => mountain_pass_c(s, eig, &cfg.minimax),
            };
            if let Ok(ok) = &r {
                prev = Some(ok.clone());
            }
            out.push(r);
        }
        out
    } else {
        shifts
            .par_iter()
            .map(|&s| mountain_pass_c(s, eig, &cfg.minimax))
            .collect()
    };
    let mut curve = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in shifts.iter().zip(results) {
        match r {
            Ok(res) => curve.push(CurvePoint {
                s: s.value(),
                c: res.c,
                a: s.value() + res.c,
                b: res.c,
                grad_residual: verify_critical_point(&res, *s),
            }),
            Err(e) => failures.push(CurveFailure {
                s: s.value().as_f64(),
                message: e.to_string(),
            }),
        }
    }
    let mut flags = Vec::new();
    for w in curve.windows(2) {
        if !(w[1].c < w[0].c) {
            flags.push(format!(
                "c not strictly decreasing between s = {} and s = {}",
                w[0].s, w[1].s
            ));
        }
    }
    for pt in &curve {
        if !(pt.c > eig.lambda) {
            flags.push(format!("c({}) = {} does not exceed lambda1", pt.s, pt.c));
        }
    }
    let lambda2 = match curve.first() {
        Some(pt) if pt.s == T::zero() => pt.c,
        _ => T::nan(),
    };
    if lambda2.is_nan() {
        return Err(Error::NotConverged {
            what: "mountain pass at s = 0".into(),
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let provenance = Provenance {
        domain: *eig.domain(),
        p: eig.p,
        config_hash: config_hash(&(cfg, s_values))?,
        version: crate::VERSION.to_string(),
    };
    Ok(SpectrumData {
        format_version: FORMAT_VERSION,
        lambda1: eig.lambda,
        lambda2,
        curve,
        failures,
        flags,
        provenance,
    })
}

/// Point-to-segment distance in the plane.
fn segment_distance<T: Real>(q: (T, T), a: (T, T), b: (T, T)) -> T {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > T::zero() {
        (((q.0 - a.0) * dx + (q.1 - a.1) * dy) / len2)
            .max(T::zero())
            .min(T::one())
    } else {
        T::zero()
    };
    let (px, py) = (a.0 + t * dx, a.1 + t * dy);
    ((q.0 - px).powi(2) + (q.1 - py).powi(2)).sqrt()
}

impl<T: Real> SpectrumData<T> {
    pub fn s_max(&self) -> T {
        self.curve.last().map(|pt| pt.s).unwrap_or(T::zero())
    }

    /// Piecewise-linear `c(s)` on the traced range.
    pub fn c_at(&self, s: T) -> Result<T> {
        let smax = self.s_max();
        if self.curve.is_empty() || s < T::zero() || s > smax {
            return Err(Error::Extrapolation {
                needed: s.as_f64(),
                traced_max: smax.as_f64(),
            });
        }
        let k = self.curve.partition_point(|pt| pt.s < s);
        if k == 0 {
            return Ok(self.curve[0].c);
        }
        let (l, r) = (&self.curve[k - 1], &self.curve[k]);
        let t = (s - l.s) / (r.s - l.s);
        Ok(l.c + t * (r.c - l.c))
    }

    /// Euclidean distance from `(a, b)` to the trivial lines and to both
    /// traced branches.
    pub fn distance_to_spectrum(&self, a: T, b: T) -> T {
        let mut d = (a - self.lambda1).abs().min((b - self.lambda1).abs());
        for w in self.curve.windows(2) {
            let (u0, u1) = ((w[0].a, w[0].b), (w[1].a, w[1].b));
            d = d.min(segment_distance((a, b), u0, u1));
            d = d.min(segment_distance((a, b), (u0.1, u0.0), (u1.1, u1.0)));
        }
        if let [only] = self.curve.as_slice() {
            d = d.min(segment_distance((a, b), (only.a, only.b), (only.a, only.b)));
        }
        d
    }

    pub fn default_band(&self) -> T {
        T::lit(BAND_FRACTION) * self.lambda1
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let data: Self = serde_json::from_reader(input)?;
        if data.format_version != FORMAT_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported spectrum format version {} (expected {FORMAT_VERSION})",
                data.format_version
            )));
        }
        if data.curve.is_empty() || !(data.lambda1 > T::zero()) {
            return Err(Error::Serialization(
                "spectrum file has no curve or invalid lambda1".into(),
            ));
        }
        Ok(data)
    }

    /// CSV rows `branch,s,c,a,b,residual` for the upper branch and its mirror.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["branch", "s", "c", "a", "b", "residual"])?;
        for (branch, mirror) in [("upper", false), ("mirror", true)] {
            for pt in &self.curve {
                let (a, b) = if mirror { (pt.b, pt.a) } else { (pt.a, pt.b) };
                w.write_record([
                    branch.to_string(),
                    pt.s.to_string(),
                    pt.c.to_string(),
                    a.to_string(),
                    b.to_string(),
                    pt.grad_residual.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "below_Cl1")]
    BelowCl1,
    #[serde(rename = "between_Cl1_Cu1")]
    BetweenCl1Cu1,
    #[serde(rename = "between_Cu1_C2")]
    BetweenCu1C2,
    #[serde(rename = "above_C2")]
    AboveC2,
    #[serde(rename = "on_spectrum_band")]
    OnSpectrumBand,
}

impl Region {
    pub const ALL: [Region; 5] = [
        Region::BelowCl1,
        Region::BetweenCl1Cu1,
        Region::BetweenCu1C2,
        Region::AboveC2,
        Region::OnSpectrumBand,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::BelowCl1 => "below_Cl1",
            Region::BetweenCl1Cu1 => "between_Cl1_Cu1",
            Region::BetweenCu1C2 => "between_Cu1_C2",
            Region::AboveC2 => "above_C2",
            Region::OnSpectrumBand => "on_spectrum_band",
        }
    }

    /// Predicted critical groups of the Fucik functional at the origin.
    pub fn groups(&self) -> &'static [&'static str] {
        match self {
            Region::BelowCl1 => &["C_q = δ_{q0}ℤ"],
            Region::BetweenCl1Cu1 => &["C_q = 0 ∀q"],
            Region::BetweenCu1C2 => &["C_q = δ_{q1}ℤ"],
            Region::AboveC2 => &["C_0 = C_1 = 0", "C_q undetermined for q >= 2"],
            Region::OnSpectrumBand => &[],
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RegionPrediction<T> {
    pub a: T,
    pub b: T,
    pub label: Region,
    pub groups: Vec<String>,
    pub distance_to_spectrum: T,
}

/// Region of `(a, b)` relative to the trivial lines and the traced curve;
/// points closer than `band` to the spectrum are not classified.
pub fn classify<T: Real>(a: T, b: T, spec: &SpectrumData<T>, band: T) -> Result<RegionPrediction<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite query ({a}, {b})")));
    }
    if !(band > T::zero()) {
        return Err(Error::InvalidInput(format!("band must be positive, got {band}")));
    }
    let l1 = spec.lambda1;
    let geometric = if a > l1 && b > l1 {
        let c = spec.c_at((a - b).abs())?;
        if a.min(b) < c {
            Region::BetweenCu1C2
        } else {
            Region::AboveC2
        }
    } else if a > l1 || b > l1 {
        Region::BetweenCl1Cu1
    } else {
        Region::BelowCl1
    };
    let distance = spec.distance_to_spectrum(a, b);
    let label = if distance < band {
        Region::OnSpectrumBand
    } else {
        geometric
    };
    Ok(RegionPrediction {
        a,
        b,
        label,
        groups: label.groups().iter().map(|g| g.to_string()).collect(),
        distance_to_spectrum: distance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StabilityProbe<T> {
    pub center: Region,
    pub radius: T,
    pub stable: bool,
    /// Labels met on the disk other than the center's, sorted.
    pub crossed: Vec<Region>,
}

/// Samples a disk of `radius` around `(a0, b0)` and reports whether every
/// sample shares the center's label.
pub fn region_stability_probe<T: Real>(
    a0: T,
    b0: T,
    spec: &SpectrumData<T>,
    band: T,
    radius: T,
) -> Result<StabilityProbe<T>> {
    let center = classify(a0, b0, spec, band)?;
    if center.label == Region::OnSpectrumBand {
        return Err(Error::NearSpectrum {
            a: a0.as_f64(),
            b: b0.as_f64(),
            distance: center.distance_to_spectrum.as_f64(),
            tolerance: band.as_f64(),
        });
    }
    if !(radius > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "probe radius must be positive, got {radius}"
        )));
    }
    let mut crossed = Vec::new();
    for ring in 1..=4 {
        let r = radius * T::lit(ring as f64 / 4.0);
        for k in 0..64 {
            let th = T::lit(2.0 * std::f64::consts::PI * k as f64 / 64.0);
            let label = classify(a0 + r * th.cos(), b0 + r * th.sin(), spec, band)?.label;
            if label != center.label && !crossed.contains(&label) {
                crossed.push(label);
            }
        }
    }
    crossed.sort();
    Ok(StabilityProbe {
        center: center.label,
        radius,
        stable: crossed.is_empty(),
        crossed,
    })
}
