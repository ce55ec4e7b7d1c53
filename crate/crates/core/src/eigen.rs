//! First eigenpair of the discrete p-Laplacian and the second eigenvalue as
//! the mountain-pass level at zero shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::ShiftParam;
use crate::error::{Error, Result};
use crate::grid::{Domain, Exponent, Field};
use crate::minimax::{mountain_pass_c, MinimaxConfig};
use crate::scalar::Real;
use crate::solvers::{sphere_descent, sphere_newton, SphereSolve, NEWTON_MAX_ITER};
use crate::sphere::{normalize, SpherePoint};

/// Iteration budget of the sphere descent.
pub const MAX_DESCENT_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EigenPair<T: Real> {
    pub lambda: T,
    pub phi: SpherePoint<T>,
    pub residual: T,
    pub p: Exponent<T>,
    pub iterations: usize,
}

impl<T: Real> EigenPair<T> {
    pub fn domain(&self) -> &Domain<T> {
        self.phi.field().domain()
    }
}

/// Descent on the sphere, then bordered Newton if descent stalls above `tol`.
pub fn descend_on_sphere<T: Real>(
    w0: &SpherePoint<T>,
    s: ShiftParam<T>,
    tol: T,
    max_iter: usize,
) -> Result<SphereSolve<T>> {
    let coarse = sphere_descent(w0, s, tol, max_iter)?;
    if coarse.converged {
        return Ok(coarse);
    }
    let fine = sphere_newton(&coarse.point, s, tol, NEWTON_MAX_ITER)?;
    if fine.converged && fine.value <= coarse.value + T::tol_floor(1e-9) * coarse.value.abs().max(T::one()) {
        return Ok(SphereSolve {
            iterations: coarse.iterations + fine.iterations,
            ..fine
        });
    }
    Ok(coarse)
}

/// Minimizes `J̃_0` from a positive bump; the minimizer must stay positive.
pub fn compute_lambda1<T: Real>(dom: &Domain<T>, p: &Exponent<T>, tol: T) -> Result<EigenPair<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let (l, len) = (dom.left(), dom.length());
    let bump = Field::interpolate(*dom, |x| {
        let t = (x - l) / len;
        t * (T::one() - t)
    })?;
    let w0 = normalize(&bump, p)?;
    let zero = ShiftParam::new(T::zero())?;
    let r = descend_on_sphere(&w0, zero, tol, MAX_DESCENT_ITERATIONS)?;
    if !r.converged {
        return Err(Error::NotConverged {
            what: "first eigenpair descent".into(),
            iterations: r.iterations,
            residual: r.residual.as_f64(),
        });
    }
    if r.point.field().values().iter().any(|&v| v <= T::zero()) {
        return Err(Error::SignChangingLimit);
    }
    Ok(EigenPair {
        lambda: r.value,
        phi: r.point,
        residual: r.residual,
        p: *p,
        iterations: r.iterations,
    })
}

/// `c(0)`, the second eigenvalue.
pub fn compute_lambda2<T: Real>(eig: &EigenPair<T>, cfg: &MinimaxConfig<T>) -> Result<T> {
    Ok(mountain_pass_c(ShiftParam::new(T::zero())?, eig, cfg)?.c)
}

/// Outcome of random descents on `J̃_s`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GapProbe<T> {
    pub s: T,
    pub lambda1: T,
    /// Converged critical values, in run order.
    pub values: Vec<T>,
    pub unconverged: usize,
    /// Converged values strictly inside `(λ1 - s + margin, λ1 - margin)`.
    pub inside_gap: Vec<T>,
}

/// Random combination of the first `modes` sine modes, in run order from
/// `seed`.
pub fn random_start<T: Real>(dom: &Domain<T>, p: &Exponent<T>, modes: usize, seed: u64) -> Result<SpherePoint<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<T> = (0..modes).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let (l, len) = (dom.left(), dom.length());
    let u = Field::interpolate(*dom, |x| {
        coef.iter()
            .enumerate()
            .map(|(k, &c)| c * (T::lit((k + 1) as f64) * T::PI() * (x - l) / len).sin())
            .sum()
    })?;
    normalize(&u, p)
}

/// Runs `runs` descents of `J̃_s` from random starts (seeded per run) and
/// collects the converged critical values.
pub fn spectral_gap_probe<T: Real>(
    eig: &EigenPair<T>,
    s: ShiftParam<T>,
    runs: usize,
    seed: u64,
    margin: T,
) -> Result<GapProbe<T>> {
    let dom = *eig.domain();
    let tol = T::tol_floor(1e-8);
    let outcomes: Vec<Result<SphereSolve<T>>> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let w0 = random_start(&dom, &eig.p, 6, seed.wrapping_add(k as u64))?;
            descend_on_sphere(&w0, s, tol, MAX_DESCENT_ITERATIONS)
        })
        .collect();
    let mut values = Vec::new();
    let mut unconverged = 0;
    for o in outcomes {
        let o = o?;
        if o.converged {
            values.push(o.value);
        } else {
            unconverged += 1;
        }
    }
    let lo = eig.lambda - s.value() + margin;
    let hi = eig.lambda - margin;
    let inside_gap = values.iter().copied().filter(|&v| v > lo && v < hi).collect();
    Ok(GapProbe {
        s: s.value(),
        lambda1: eig.lambda,
        values,
        unconverged,
        inside_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{eval_i, eval_jtilde, grad_i, residual_norm, FucikParams};
    use crate::grid::lp_norm;

    fn discrete_lambda(n: usize, k: f64) -> f64 {
        let h = 1.0 / (n as f64 + 1.0);
        let t = k * std::f64::consts::PI * h;
        6.0 / (h * h) * (1.0 - t.cos()) / (2.0 + t.cos())
    }

    #[test]
    fn lambda1_at_p2_matches_discrete_formula_and_sine() {
        let dom = Domain::<f64>::unit(200).unwrap();
        let p = Exponent::<f64>::new(2.0).unwrap();
        let e = compute_lambda1(&dom, &p, 1e-9).unwrap();
        assert!((e.lambda - discrete_lambda(200, 1.0)).abs() < 1e-9 * e.lambda);
        let sine = normalize(
            &Field::interpolate(dom, |x| (std::f64::consts::PI * x).sin()).unwrap(),
            &p,
        )
        .unwrap();
        assert!(e.phi.field().max_abs_diff(sine.field()) < 1e-3);
    }

    #[test]
    fn eigen_residual_is_homogeneous() {
        let dom = Domain::<f64>::unit(80).unwrap();
        for pp in [1.5, 2.0, 3.0] {
            let p = Exponent::<f64>::new(pp).unwrap();
            let tol = 1e-9;
            let e = compute_lambda1(&dom, &p, tol).unwrap();
            assert!(e.phi.field().values().iter().all(|&v| v > 0.0));
            let ab = FucikParams::new(e.lambda, e.lambda).unwrap();
            assert!(eval_i(e.phi.field(), ab, &p).abs() < 1e-10 * e.lambda);
            for t in [0.5, 1.0, 2.0] {
                let r = residual_norm(&grad_i(&e.phi.field().scaled(t), ab, &p));
                assert!(r <= tol * f64::powf(t, pp - 1.0) * 1.01 + 1e-12, "p={pp} t={t} r={r}");
            }
        }
    }

    #[test]
    fn lambda1_is_a_lower_bound() {
        let dom = Domain::<f64>::unit(50).unwrap();
        let p = Exponent::<f64>::new(1.5).unwrap();
        let e = compute_lambda1(&dom, &p, 1e-8).unwrap();
        let s = ShiftParam::new(0.0).unwrap();
        for k in 0..100 {
            let w = random_start(&dom, &p, 8, 1000 + k).unwrap();
            assert!(eval_jtilde(w.field(), s, &p).unwrap() >= e.lambda - 1e-8);
        }
    }

    #[test]
    fn lambda1_mesh_convergence_second_order() {
        let p = Exponent::<f64>::new(2.0).unwrap();
        let l = |n: usize| {
            compute_lambda1(&Domain::<f64>::unit(n).unwrap(), &p, 1e-10)
                .unwrap()
                .lambda
        };
        let (a, b, c) = (l(20), l(41), l(83));
        assert!((a - b).abs() >= 3.0 * (b - c).abs());
    }

    #[test]
    fn negative_eigenfunction_value_is_lambda1_for_any_shift() {
        let dom = Domain::<f64>::unit(60).unwrap();
        let p = Exponent::<f64>::new(2.0).unwrap();
        let e = compute_lambda1(&dom, &p, 1e-9).unwrap();
        for s in [0.0, 3.0, 40.0] {
            let v = e.phi.negated().jtilde(ShiftParam::new(s).unwrap());
            assert!((v - e.lambda).abs() < 1e-12 * e.lambda);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let dom = Domain::<f64>::unit(10).unwrap();
        let p = Exponent::<f64>::new(2.0).unwrap();
        assert!(compute_lambda1(&dom, &p, 0.0).is_err());
    }

    #[test]
    fn random_start_is_deterministic_and_on_sphere() {
        let dom = Domain::<f64>::unit(30).unwrap();
        let p = Exponent::<f64>::new(2.5).unwrap();
        let a = random_start(&dom, &p, 5, 9).unwrap();
        let b = random_start(&dom, &p, 5, 9).unwrap();
        assert_eq!(a, b);
        assert!((lp_norm(a.field(), &p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let dom = Domain::<f32>::unit(40).unwrap();
        let p = Exponent::<f32>::new(2.0).unwrap();
        let e = compute_lambda1(&dom, &p, 1e-3).unwrap();
        assert!((e.lambda - std::f32::consts::PI.powi(2)).abs() < 0.01 * e.lambda);
    }
}
