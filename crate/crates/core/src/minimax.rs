//! Mountain-pass level `c(s)` of `J̃_s` between `φ1` and `-φ1`.
//!
//! Phase one deforms a string of beads on the sphere (see
//! [`run_string`]); phase two resolves the saddle near the path maximum
//! with bordered Newton and substitutes it for the maximal bead.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eigen::EigenPair;
use crate::energy::{grad_i, residual_norm, FucikParams, ShiftParam};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solvers::{path_sup, run_string, sphere_newton, SphereSpace, StringConfig, SweepRecord, NEWTON_MAX_ITER};
use crate::sphere::{initial_path, sphere_residual, Path, SpherePoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MinimaxConfig<T> {
    pub beads: usize,
    /// Relative stagnation tolerance of the path maximum.
    pub tol: T,
    pub grad_tol: T,
    pub patience: usize,
    pub max_sweeps: usize,
    pub step_damping: T,
}

impl<T: Real> Default for MinimaxConfig<T> {
    fn default() -> Self {
        Self {
            beads: 41,
            tol: T::tol_floor(1e-7),
            grad_tol: T::tol_floor(1e-8),
            patience: 5,
            max_sweeps: 5000,
            step_damping: T::one(),
        }
    }
}

impl<T: Real> MinimaxConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.beads < 5 {
            return Err(Error::InvalidInput(format!(
                "need at least 5 beads, got {}",
                self.beads
            )));
        }
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !(positive(self.tol) && positive(self.grad_tol) && positive(self.step_damping))
            || self.patience == 0
            || self.max_sweeps == 0
        {
            return Err(Error::InvalidInput(
                "minimax tolerances, patience and sweeps must be positive".into(),
            ));
        }
        Ok(())
    }

    fn string(&self) -> StringConfig<T> {
        StringConfig {
            max_sweeps: self.max_sweeps,
            tol: self.tol,
            patience: self.patience,
            step_damping: self.step_damping,
            grad_tol: self.grad_tol,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MinimaxResult<T: Real> {
    pub s: T,
    pub c: T,
    pub argmax_bead: SpherePoint<T>,
    pub argmax_index: usize,
    /// Number of beads sharing the maximal value of the deformed string.
    pub plateau_width: usize,
    /// Supremum of the interpolated final string; bounds `c` from above.
    pub path_sup: T,
    pub path: Path<T>,
    pub grad_norm_at_max: T,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub history: Vec<SweepRecord<T>>,
}

impl<T: Real> MinimaxResult<T> {
    /// CSV rows `sweep,max,grad_norm`.
    pub fn write_sweep_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sweep", "max", "grad_norm"])?;
        for r in &self.history {
            w.write_record([r.sweep.to_string(), r.max.to_string(), r.grad_norm.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `c(s)` from the default initial path.
pub fn mountain_pass_c<T: Real>(
    s: ShiftParam<T>,
    eig: &EigenPair<T>,
    cfg: &MinimaxConfig<T>,
) -> Result<MinimaxResult<T>> {
    cfg.validate()?;
    let path = initial_path(&eig.phi, cfg.beads, None)?;
    mountain_pass_from(s, eig, path, cfg)
}

/// `c(s)` starting from a given path whose endpoints are `φ1` and `-φ1`.
pub fn mountain_pass_from<T: Real>(
    s: ShiftParam<T>,
    eig: &EigenPair<T>,
    path: Path<T>,
    cfg: &MinimaxConfig<T>,
) -> Result<MinimaxResult<T>> {
    cfg.validate()?;
    let p = eig.p;
    let space = SphereSpace { s, p };
    let beads: Vec<_> = path.beads().iter().map(|b| b.field().clone()).collect();
    let floor = eig.lambda + cfg.tol * eig.lambda.abs();
    let initial_max = path.argmax(s).1;
    if initial_max <= floor {
        return Err(Error::DegeneratePath {
            max: initial_max.as_f64(),
            lambda1: eig.lambda.as_f64(),
        });
    }
    let run = run_string(&space, beads, &cfg.string())?;
    let (m, max) = run.argmax();
    let roundoff = T::tol_floor(1e-12) * max.abs();
    let plateau_width = run.values.iter().filter(|&&v| v >= max - roundoff).count();

    let (sup, sup_point) = path_sup(&space, &run.beads, &run.values);
    let seeds = [sup_point, run.beads[m].clone()];
    let slack = T::tol_floor(1e-6) * sup.abs().max(T::one());
    let mut best_grad = T::infinity();
    let mut saddle = None;
    for seed in seeds {
        let w = SpherePoint::new(seed, p)?;
        let r = sphere_newton(&w, s, cfg.grad_tol, NEWTON_MAX_ITER)?;
        best_grad = best_grad.min(r.residual);
        if r.converged && r.value <= sup + slack && r.value > floor {
            saddle = Some(r);
            break;
        }
    }
    let Some(saddle) = saddle else {
        return Err(Error::SaddleNotResolved {
            grad_norm: best_grad.as_f64(),
        });
    };
    let mut beads: Vec<SpherePoint<T>> = run
        .beads
        .into_iter()
        .map(|b| SpherePoint::new(b, p))
        .collect::<Result<_>>()?;
    beads[m] = saddle.point.clone();
    let grad = sphere_residual(&saddle.point, s);
    Ok(MinimaxResult {
        s: s.value(),
        c: saddle.value,
        argmax_bead: saddle.point,
        argmax_index: m,
        plateau_width,
        path_sup: sup,
        path: Path::new(beads)?,
        grad_norm_at_max: grad,
        iterations: run.history.len(),
        newton_iterations: saddle.iterations,
        history: run.history,
    })
}

/// `‖grad_I(w, (s + c, c))‖` at the saddle bead.
pub fn verify_critical_point<T: Real>(res: &MinimaxResult<T>, s: ShiftParam<T>) -> T {
    let ab = FucikParams {
        a: s.value() + res.c,
        b: res.c,
    };
    residual_norm(&grad_i(res.argmax_bead.field(), ab, res.argmax_bead.exponent()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    Connected,
    Disconnected,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ConnectivityReport<T: Real> {
    pub verdict: Connectivity,
    pub s: T,
    pub b: T,
    pub c: T,
    pub margin: T,
    /// Path from `φ1` to `-φ1` inside `{J̃_s < b}` when connected.
    pub witness: Option<Path<T>>,
    pub witness_max: Option<T>,
}

impl<T: Real> ConnectivityReport<T> {
    pub fn connected(&self) -> Option<bool> {
        match self.verdict {
            Connectivity::Connected => Some(true),
            Connectivity::Disconnected => Some(false),
            Connectivity::Inconclusive => None,
        }
    }
}

/// Fraction of `c(s) - λ1` treated as undecidable around `c(s)`.
pub const CONNECTIVITY_MARGIN: f64 = 0.01;

/// Decides whether `{w ∈ S : J̃_s(w) < b}` connects `φ1` to `-φ1`.
pub fn connectivity_check<T: Real>(
    s: ShiftParam<T>,
    b: T,
    eig: &EigenPair<T>,
    cfg: &MinimaxConfig<T>,
) -> Result<ConnectivityReport<T>> {
    let required = eig.lambda.max(eig.lambda - s.value());
    if !(b > required) {
        return Err(Error::EndpointNotInSublevel {
            b: b.as_f64(),
            required: required.as_f64(),
        });
    }
    let res = mountain_pass_c(s, eig, cfg)?;
    let margin = T::lit(CONNECTIVITY_MARGIN) * (res.c - eig.lambda);
    let mut report = ConnectivityReport {
        verdict: Connectivity::Inconclusive,
        s: s.value(),
        b,
        c: res.c,
        margin,
        witness: None,
        witness_max: None,
    };
    if res.c < b - margin {
        let (_, wmax) = res.path.argmax(s);
        if wmax < b {
            report.verdict = Connectivity::Connected;
            report.witness_max = Some(wmax);
            report.witness = Some(res.path);
        }
    } else if res.c >= b + margin {
        report.verdict = Connectivity::Disconnected;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::compute_lambda1;
    use crate::grid::{Domain, Exponent, Field};
    use crate::sphere::normalize;

    fn eig(n: usize, p: f64) -> EigenPair<f64> {
        compute_lambda1(
            &Domain::<f64>::unit(n).unwrap(),
            &Exponent::<f64>::new(p).unwrap(),
            1e-10,
        )
        .unwrap()
    }

    fn discrete_lambda(n: usize, k: f64) -> f64 {
        let h = 1.0 / (n as f64 + 1.0);
        let t = k * std::f64::consts::PI * h;
        6.0 / (h * h) * (1.0 - t.cos()) / (2.0 + t.cos())
    }

    #[test]
    fn c0_is_second_eigenvalue_at_p2() {
        let e = eig(60, 2.0);
        let cfg = MinimaxConfig::default();
        let s = ShiftParam::new(0.0).unwrap();
        let r = mountain_pass_c(s, &e, &cfg).unwrap();
        let l2 = discrete_lambda(60, 2.0);
        assert!((r.c - l2).abs() < 1e-7 * l2, "{} vs {l2}", r.c);
        assert!(verify_critical_point(&r, s) <= 10.0 * cfg.grad_tol);
        let w = r.argmax_bead.field();
        assert!(w.values().iter().any(|&v| v > 0.0) && w.values().iter().any(|&v| v < 0.0));
        let sine = normalize(
            &Field::interpolate(*w.domain(), |x| (2.0 * std::f64::consts::PI * x).sin()).unwrap(),
            &e.p,
        )
        .unwrap();
        let d = w
            .max_abs_diff(sine.field())
            .min(w.max_abs_diff(&sine.field().scaled(-1.0)));
        assert!(d < 5e-2);
        // Odd symmetry about the midpoint, up to sign.
        let v = w.values();
        let rev: Vec<f64> = v.iter().rev().map(|x| -x).collect();
        let odd = v.iter().zip(&rev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let even = v
            .iter()
            .zip(v.iter().rev())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(odd.min(even) < 1e-6);
    }

    #[test]
    fn saddle_with_flat_elements_converges_for_p_below_two() {
        // At n = 100 the p = 1.5 saddle has elements with slope near zero.
        let e = eig(100, 1.5);
        let cfg = MinimaxConfig::default();
        let s = ShiftParam::new(0.0).unwrap();
        let r = mountain_pass_c(s, &e, &cfg).unwrap();
        assert!(r.grad_norm_at_max <= cfg.grad_tol);
        assert!(r.newton_iterations < 100, "{}", r.newton_iterations);
    }

    #[test]
    fn path_maximum_is_monotone_and_bounds_c() {
        let e = eig(40, 2.0);
        let cfg = MinimaxConfig::default();
        let s = ShiftParam::new(10.0).unwrap();
        let r = mountain_pass_c(s, &e, &cfg).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].max <= w[0].max + crate::solvers::reparam_defect(w[0].max));
        }
        assert!(r.path_sup >= r.c * (1.0 - 1e-9));
        assert!(r.c > e.lambda);
        let res = verify_critical_point(&r, s);
        let ab = FucikParams { a: 10.0 + r.c, b: r.c };
        let t = 3.0;
        let scaled = residual_norm(&grad_i(&r.argmax_bead.field().scaled(t), ab, &e.p));
        assert!((scaled - t * res).abs() <= 1e-6 * scaled + 1e-11);
    }

    #[test]
    fn rejects_too_few_beads() {
        let e = eig(20, 2.0);
        let cfg = MinimaxConfig {
            beads: 4,
            ..MinimaxConfig::default()
        };
        assert!(mountain_pass_c(ShiftParam::new(0.0).unwrap(), &e, &cfg).is_err());
    }

    #[test]
    fn connectivity_precondition() {
        let e = eig(20, 2.0);
        let cfg = MinimaxConfig::default();
        let r = connectivity_check(ShiftParam::new(5.0).unwrap(), e.lambda - 1.0, &e, &cfg);
        assert!(matches!(r, Err(Error::EndpointNotInSublevel { .. })));
    }

    #[test]
    fn connectivity_both_sides() {
        let e = eig(40, 2.0);
        let cfg = MinimaxConfig::default();
        let s = ShiftParam::new(10.0).unwrap();
        let c = mountain_pass_c(s, &e, &cfg).unwrap().c;
        let yes = connectivity_check(s, c + 0.5 * (c - e.lambda), &e, &cfg).unwrap();
        assert_eq!(yes.connected(), Some(true));
        assert!(yes.witness_max.unwrap() < yes.b);
        let no = connectivity_check(s, 0.5 * (e.lambda + c), &e, &cfg).unwrap();
        assert_eq!(no.connected(), Some(false));
        assert!(no.witness.is_none());
    }
}
