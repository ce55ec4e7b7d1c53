//! Iterative kernels shared by the eigen, minimax and bvp modules.
//!
//! All descent methods use the (floored) Hessian of `∫|∇u|^p` as metric;
//! at `p = 2` a unit step on the sphere is exactly one inverse iteration.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{fucik_functional, residual_norm, FucikParams, Functional, ShiftParam};
use crate::error::{Error, Result};
use crate::grid::{h1_seminorm, lp_integral, Exponent, Field};
use crate::linalg::{DenseMatrix, Tridiagonal};
use crate::scalar::Real;
use crate::sphere::{
    argmax_first, chordal_interpolate, constraint_normal, normalize, rayleigh, rayleigh_gradient, SpherePoint,
};

/// Armijo sufficient-decrease constant.
/// Newton iteration budget. For p < 2 convergence is only linear near
/// elements of vanishing slope, where `ψ'` is not Lipschitz.
pub const NEWTON_MAX_ITER: usize = 1000;

pub const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Consecutive steps without a decrease above roundoff before a descent
/// gives up.
const STALL_LIMIT: usize = 200;

/// Weighted stiffness matrix with element weights `ψ''(slope)`, clamped to
/// `[1e-2, 1e2]` times their median. Symmetric positive definite.
pub fn preconditioner<T: Real>(u: &Field<T>, p: &Exponent<T>) -> Tridiagonal<T> {
    let dom = u.domain();
    let n = dom.n_interior();
    let h = dom.h();
    let raw: Vec<T> = (0..dom.n_elements()).map(|e| p.density_second(u.slope(e))).collect();
    let mut sorted: Vec<T> = raw.iter().copied().filter(|v| v.is_finite()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let med = sorted.get(sorted.len() / 2).copied().unwrap_or(T::zero());
    let med = if med > T::zero() { med } else { T::one() };
    let (lo, hi) = (med * T::lit(1e-2), med * T::lit(1e2));
    let mut m = Tridiagonal::zeros(n);
    for (e, &w) in raw.iter().enumerate() {
        let w = if w.is_finite() { w.max(lo).min(hi) } else { hi };
        let k = w / h;
        if e > 0 {
            m.add(e - 1, e - 1, k);
        }
        if e < n {
            m.add(e, e, k);
        }
        if e > 0 && e < n {
            m.add(e - 1, e, -k);
            m.add(e, e - 1, -k);
        }
    }
    m
}

/// Outcome of an iterative solve on the sphere.
#[derive(Clone, Debug)]
pub struct SphereSolve<T: Real> {
    pub point: SpherePoint<T>,
    pub value: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

fn roundoff<T: Real>(v: T) -> T {
    T::lit(8.0) * T::epsilon() * v.abs().max(T::one())
}

/// Preconditioned Armijo descent of `J̃_s` from `w0`, retracting by
/// normalization.
pub fn sphere_descent<T: Real>(
    w0: &SpherePoint<T>,
    s: ShiftParam<T>,
    tol: T,
    max_iter: usize,
) -> Result<SphereSolve<T>> {
    let p = *w0.exponent();
    let mut w = w0.clone();
    let (mut c, mut g) = rayleigh_gradient(w.field(), s, &p);
    let mut res = residual_norm(&g);
    let mut alpha = T::one();
    let c1 = T::lit(ARMIJO_C1);
    let mut it = 0;
    let mut stalled = 0;
    while it < max_iter && res > tol && stalled < STALL_LIMIT {
        let d = match preconditioner(w.field(), &p).solve(g.values()) {
            Ok(v) => Field::from_raw(*w.field().domain(), v).scaled(-T::one()),
            Err(_) => break,
        };
        let slope = g.dot(&d);
        if !(slope < T::zero()) {
            break;
        }
        let mut a = (alpha * T::lit(2.0)).min(T::one());
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = w.field().plus_scaled(a, &d);
            let m = lp_integral(&trial, &p);
            if m > T::zero() {
                let r = rayleigh(&trial, s, &p);
                if r <= c + c1 * a * slope + roundoff(c) {
                    accepted = Some(trial);
                    break;
                }
            }
            a = a * T::lit(0.5);
        }
        let Some(trial) = accepted else { break };
        alpha = a;
        w = normalize(&trial, &p)?;
        let previous = c;
        (c, g) = rayleigh_gradient(w.field(), s, &p);
        res = residual_norm(&g);
        stalled = if c < previous - roundoff(previous) {
            0
        } else {
            stalled + 1
        };
        it += 1;
    }
    Ok(SphereSolve {
        value: c,
        residual: res,
        converged: res <= tol,
        point: w,
        iterations: it,
    })
}

/// Newton's method for `∇J_s(w) = c ∇N(w)`, `N(w) = 1` via the bordered
/// system `[[H_J - c H_N, -∇N], [∇N^T, 0]]`, with `c` reset to `J̃_s` after
/// each normalized step and backtracking on the residual norm. A full step
/// is kept only if the half step does not do better: for `p < 2` full steps
/// flip the slope on nearly flat elements instead of shrinking it.
pub fn sphere_newton<T: Real>(
    w0: &SpherePoint<T>,
    s: ShiftParam<T>,
    tol: T,
    max_iter: usize,
) -> Result<SphereSolve<T>> {
    let p = *w0.exponent();
    let mut w = w0.clone();
    let (mut c, mut g) = rayleigh_gradient(w.field(), s, &p);
    let mut res = residual_norm(&g);
    let mut it = 0;
    let n = w.field().len();
    while it < max_iter && res > tol {
        let ab = FucikParams { a: s.value() + c, b: c };
        let hess = fucik_functional(ab, p)
            .hessian(w.field())
            .expect("local functional")
            .to_dense();
        let normal = constraint_normal(w.field(), &p);
        let col: Vec<T> = normal.values().iter().map(|&v| -v).collect();
        let sys = hess.bordered(&col, normal.values(), T::zero());
        let mut rhs: Vec<T> = g.values().iter().map(|&v| -v).collect();
        rhs.push(T::zero());
        let Ok(sol) = sys.solve(&rhs) else { break };
        let dw = Field::from_raw(*w.field().domain(), sol[..n].to_vec());
        let mut tau = T::one();
        let mut accepted = None;
        for _ in 0..20 {
            if let Ok(trial) = normalize(&w.field().plus_scaled(tau, &dw), &p) {
                let (tc, tg) = rayleigh_gradient(trial.field(), s, &p);
                let tr = residual_norm(&tg);
                if tr < res * (T::one() - T::lit(ARMIJO_C1) * tau) {
                    accepted = Some((trial, tc, tg, tr));
                    break;
                }
            }
            tau = tau * T::lit(0.5);
        }
        let Some((mut tw, mut tc, mut tg, mut tr)) = accepted else {
            break;
        };
        if tau == T::one() {
            if let Ok(half) = normalize(&w.field().plus_scaled(T::lit(0.5), &dw), &p) {
                let (hc, hg) = rayleigh_gradient(half.field(), s, &p);
                let hr = residual_norm(&hg);
                if hr < tr {
                    (tw, tc, tg, tr) = (half, hc, hg, hr);
                }
            }
        }
        w = tw;
        c = tc;
        g = tg;
        res = tr;
        it += 1;
    }
    Ok(SphereSolve {
        value: c,
        residual: res,
        converged: res <= tol,
        point: w,
        iterations: it,
    })
}

/// Outcome of an unconstrained solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Critical<T: Real> {
    pub u: Field<T>,
    pub value: T,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Preconditioned Armijo descent on an unconstrained functional.
pub fn descend<T: Real, F: Functional<T> + ?Sized>(
    f: &F,
    u0: &Field<T>,
    tol: T,
    max_iter: usize,
) -> Result<Critical<T>> {
    let p = f.exponent();
    let mut u = u0.clone();
    let mut v = f.value(&u);
    let mut g = f.gradient(&u);
    let mut res = residual_norm(&g);
    let mut alpha = T::one();
    let c1 = T::lit(ARMIJO_C1);
    let mut it = 0;
    while it < max_iter && res > tol {
        let d = match preconditioner(&u, &p).solve(g.values()) {
            Ok(x) => Field::from_raw(*u.domain(), x).scaled(-T::one()),
            Err(_) => break,
        };
        let slope = g.dot(&d);
        if !(slope < T::zero()) {
            break;
        }
        let mut a = (alpha * T::lit(2.0)).min(T::one());
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial = u.plus_scaled(a, &d);
            let tv = f.value(&trial);
            if tv <= v + c1 * a * slope + roundoff(v) {
                accepted = Some((trial, tv));
                break;
            }
            a = a * T::lit(0.5);
        }
        let Some((trial, tv)) = accepted else { break };
        alpha = a;
        u = trial;
        v = tv;
        g = f.gradient(&u);
        res = residual_norm(&g);
        it += 1;
    }
    Ok(Critical {
        u,
        value: v,
        residual: res,
        iterations: it,
        converged: res <= tol,
    })
}

/// Central-difference Hessian of `f` from its gradient, symmetrized.
pub fn fd_hessian<T: Real, F: Functional<T> + ?Sized>(f: &F, u: &Field<T>) -> DenseMatrix<T> {
    let n = u.len();
    let cols: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let delta = T::epsilon().cbrt() * u.values()[j].abs().max(T::one());
            let mut up = u.clone();
            up.values_mut()[j] = up.values()[j] + delta;
            let mut um = u.clone();
            um.values_mut()[j] = um.values()[j] - delta;
            let gp = f.gradient(&up);
            let gm = f.gradient(&um);
            (0..n)
                .map(|i| (gp.values()[i] - gm.values()[i]) / (delta + delta))
                .collect()
        })
        .collect();
    let mut m = DenseMatrix::zeros(n);
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, half * (cols[j][i] + cols[i][j]));
        }
    }
    m
}

/// Newton's method for `∇f = 0` with backtracking on the residual norm;
/// full steps compete with half steps as in [`sphere_newton`].
/// Uses the exact tridiagonal Hessian when `f` provides one, a
/// finite-difference Hessian otherwise.
pub fn newton_critical<T: Real, F: Functional<T> + ?Sized>(
    f: &F,
    u0: &Field<T>,
    tol: T,
    max_iter: usize,
) -> Result<Critical<T>> {
    let mut u = u0.clone();
    let mut g = f.gradient(&u);
    let mut res = residual_norm(&g);
    let mut it = 0;
    while it < max_iter && res > tol {
        let rhs: Vec<T> = g.values().iter().map(|&v| -v).collect();
        let step = match f.hessian(&u) {
            Some(h) => h.solve(&rhs),
            None => fd_hessian(f, &u).solve(&rhs),
        };
        let Ok(step) = step else { break };
        let du = Field::from_raw(*u.domain(), step);
        let mut tau = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial = u.plus_scaled(tau, &du);
            let tg = f.gradient(&trial);
            let tr = residual_norm(&tg);
            if tr.is_finite() && tr < res * (T::one() - T::lit(ARMIJO_C1) * tau) {
                accepted = Some((trial, tg, tr));
                break;
            }
            tau = tau * T::lit(0.5);
        }
        let Some((mut tu, mut tg, mut tr)) = accepted else {
            break;
        };
        if tau == T::one() {
            let half = u.plus_scaled(T::lit(0.5), &du);
            let hg = f.gradient(&half);
            let hr = residual_norm(&hg);
            if hr < tr {
                (tu, tg, tr) = (half, hg, hr);
            }
        }
        u = tu;
        g = tg;
        res = tr;
        it += 1;
    }
    Ok(Critical {
        value: f.value(&u),
        u,
        residual: res,
        iterations: it,
        converged: res <= tol,
    })
}

/// Descent to a loose tolerance followed by Newton polishing; Newton is kept
/// only if it does not raise the value.
pub fn minimize<T: Real, F: Functional<T> + ?Sized>(
    f: &F,
    u0: &Field<T>,
    tol: T,
    max_iter: usize,
) -> Result<Critical<T>> {
    let loose = tol.max(T::lit(1e-6));
    let coarse = descend(f, u0, loose, max_iter)?;
    if coarse.residual <= tol {
        return Ok(coarse);
    }
    let polished = newton_critical(f, &coarse.u, tol, NEWTON_MAX_ITER)?;
    let slack = T::lit(1e-8) * coarse.value.abs().max(T::one());
    if polished.converged && polished.value <= coarse.value + slack {
        return Ok(Critical {
            iterations: coarse.iterations + polished.iterations,
            ..polished
        });
    }
    let rest = descend(f, &coarse.u, tol, max_iter.saturating_sub(coarse.iterations))?;
    Ok(Critical {
        iterations: coarse.iterations + rest.iterations,
        ..rest
    })
}

/// Space in which a string of beads is deformed.
pub trait StringSpace<T: Real>: Sync {
    fn value(&self, u: &Field<T>) -> T;
    fn gradient(&self, u: &Field<T>) -> Field<T>;
    fn metric(&self, u: &Field<T>) -> Tridiagonal<T>;
    fn retract(&self, u: Field<T>) -> Result<Field<T>>;
    fn interpolate(&self, a: &Field<T>, b: &Field<T>, t: T) -> Result<Field<T>>;
}

/// `J̃_s` on the unit sphere, through its scale-invariant extension.
pub struct SphereSpace<T> {
    pub s: ShiftParam<T>,
    pub p: Exponent<T>,
}

impl<T: Real> StringSpace<T> for SphereSpace<T> {
    fn value(&self, u: &Field<T>) -> T {
        rayleigh(u, self.s, &self.p)
    }

    fn gradient(&self, u: &Field<T>) -> Field<T> {
        rayleigh_gradient(u, self.s, &self.p).1
    }

    fn metric(&self, u: &Field<T>) -> Tridiagonal<T> {
        preconditioner(u, &self.p)
    }

    fn retract(&self, u: Field<T>) -> Result<Field<T>> {
        Ok(normalize(&u, &self.p)?.into_field())
    }

    fn interpolate(&self, a: &Field<T>, b: &Field<T>, t: T) -> Result<Field<T>> {
        let a = SpherePoint::new(a.clone(), self.p)?;
        let b = SpherePoint::new(b.clone(), self.p)?;
        Ok(chordal_interpolate(&a, &b, t)?.into_field())
    }
}

/// An unconstrained functional; beads interpolate linearly.
pub struct AmbientSpace<'a, F: ?Sized> {
    pub f: &'a F,
}

impl<T: Real, F: Functional<T> + ?Sized> StringSpace<T> for AmbientSpace<'_, F> {
    fn value(&self, u: &Field<T>) -> T {
        self.f.value(u)
    }

    fn gradient(&self, u: &Field<T>) -> Field<T> {
        self.f.gradient(u)
    }

    fn metric(&self, u: &Field<T>) -> Tridiagonal<T> {
        preconditioner(u, &self.f.exponent())
    }

    fn retract(&self, u: Field<T>) -> Result<Field<T>> {
        Ok(u)
    }

    fn interpolate(&self, a: &Field<T>, b: &Field<T>, t: T) -> Result<Field<T>> {
        Ok(a.scaled(T::one() - t).plus_scaled(t, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StringConfig<T> {
    pub max_sweeps: usize,
    /// Relative stagnation tolerance on the path maximum.
    pub tol: T,
    pub patience: usize,
    /// Upper bound on the per-bead step length factor.
    pub step_damping: T,
    /// Stop early once the gradient at the maximum drops below this.
    pub grad_tol: T,
}

/// One deformation sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepRecord<T> {
    pub sweep: usize,
    pub max: T,
    pub argmax: usize,
    pub grad_norm: T,
    pub reparametrized: bool,
}

#[derive(Clone, Debug)]
pub struct StringRun<T: Real> {
    pub beads: Vec<Field<T>>,
    pub values: Vec<T>,
    pub history: Vec<SweepRecord<T>>,
    pub stagnated: bool,
}

impl<T: Real> StringRun<T> {
    pub fn argmax(&self) -> (usize, T) {
        argmax_first(&self.values)
    }
}

/// Retries of a sweep with shrinking steps before it counts as stalled.
const MAX_SWEEP_RETRIES: usize = 12;

/// Allowed increase of the path maximum caused by reparametrization.
pub fn reparam_defect<T: Real>(max: T) -> T {
    T::tol_floor(1e-10) * max.abs().max(T::one())
}

/// String method: interior beads take Jacobi-style preconditioned steps
/// perpendicular to the path (never increasing their own value), then the
/// beads on each side of the maximum are redistributed by `H^1` arclength.
/// The seed is redistributed once before the first sweep. Endpoints never
/// move, nor do beads valued below both endpoints. The path maximum is non-increasing up to [`reparam_defect`] per
/// sweep.
pub fn run_string<T: Real, S: StringSpace<T>>(
    space: &S,
    mut beads: Vec<Field<T>>,
    cfg: &StringConfig<T>,
) -> Result<StringRun<T>> {
    let nb = beads.len();
    if nb < 3 {
        return Err(Error::InvalidInput("string needs at least 3 beads".into()));
    }
    let (m0, _) = argmax_first(&beads.par_iter().map(|b| space.value(b)).collect::<Vec<_>>());
    if let Ok(uniform) = redistribute(space, &beads, m0) {
        beads = uniform;
    }
    let mut values: Vec<T> = beads.par_iter().map(|b| space.value(b)).collect();
    let mut steps = vec![cfg.step_damping; nb];
    let mut history = Vec::new();
    let mut stagnated = false;
    let c1 = T::lit(ARMIJO_C1);
    // Beads below both endpoints already lie in the relevant sublevel set.
    let floor = values[0].min(values[nb - 1]);
    for sweep in 0..cfg.max_sweeps {
        let (_, max_before) = argmax_first(&values);
        let mut accepted = None;
        for _ in 0..MAX_SWEEP_RETRIES {
            let moves: Vec<Option<(Field<T>, T, T)>> = (1..nb - 1)
                .into_par_iter()
                .map(|k| {
                    let u = &beads[k];
                    let v0 = values[k];
                    if v0 < floor {
                        return None;
                    }
                    let g = space.gradient(u);
                    let metric = space.metric(u);
                    let d = Field::from_raw(*u.domain(), metric.solve(g.values()).ok()?).scaled(-T::one());
                    let tau = beads[k + 1].sub(&beads[k - 1]);
                    let ptau = Field::from_raw(*u.domain(), metric.matvec(tau.values()));
                    let tt = tau.dot(&ptau);
                    let d = if tt > T::zero() {
                        d.plus_scaled(-d.dot(&ptau) / tt, &tau)
                    } else {
                        d
                    };
                    let slope = g.dot(&d);
                    if !(slope < T::zero()) {
                        return None;
                    }
                    let mut a = (steps[k] * T::lit(2.0)).min(cfg.step_damping);
                    for _ in 0..40 {
                        if let Ok(trial) = space.retract(u.plus_scaled(a, &d)) {
                            let tv = space.value(&trial);
                            if tv <= v0 + c1 * a * slope && tv <= v0 {
                                return Some((trial, tv, a));
                            }
                        }
                        a = a * T::lit(0.5);
                    }
                    None
                })
                .collect();
            let mut trial = beads.clone();
            let mut trial_values = values.clone();
            let mut trial_steps = steps.clone();
            for (k, m) in moves.into_iter().enumerate() {
                let k = k + 1;
                match m {
                    Some((b, v, a)) => {
                        trial[k] = b;
                        trial_values[k] = v;
                        trial_steps[k] = a;
                    }
                    None => trial_steps[k] = trial_steps[k] * T::lit(0.5),
                }
            }
            let (m, _) = argmax_first(&trial_values);
            if let Ok(new_beads) = redistribute(space, &trial, m) {
                let new_values: Vec<T> = new_beads.par_iter().map(|b| space.value(b)).collect();
                let (_, new_max) = argmax_first(&new_values);
                if new_max <= max_before + reparam_defect(max_before) {
                    accepted = Some((new_beads, new_values, trial_steps));
                    break;
                }
            }
            // Deformation and reparametrization are accepted together or
            // retried with every step halved.
            for a in steps.iter_mut() {
                *a = *a * T::lit(0.25);
            }
        }
        let reparametrized = accepted.is_some();
        if let Some((b, v, st)) = accepted {
            beads = b;
            values = v;
            steps = st;
        }
        let (m, max) = argmax_first(&values);
        let grad_norm = residual_norm(&space.gradient(&beads[m]));
        history.push(SweepRecord {
            sweep,
            max,
            argmax: m,
            grad_norm,
            reparametrized,
        });
        if grad_norm <= cfg.grad_tol {
            stagnated = true;
            break;
        }
        if history.len() > cfg.patience {
            let old = history[history.len() - 1 - cfg.patience].max;
            if (old - max).abs() <= cfg.tol * max.abs().max(T::one()) {
                stagnated = true;
                break;
            }
        }
    }
    Ok(StringRun {
        beads,
        values,
        history,
        stagnated,
    })
}

fn arclength_positions<T: Real>(beads: &[Field<T>]) -> Vec<T> {
    let mut acc = vec![T::zero()];
    for w in beads.windows(2) {
        let last = *acc.last().expect("nonempty");
        acc.push(last + h1_seminorm(&w[1].sub(&w[0])));
    }
    acc
}

fn redistribute_segment<T: Real, S: StringSpace<T>>(space: &S, beads: &[Field<T>]) -> Result<Vec<Field<T>>> {
    let n = beads.len();
    if n <= 2 {
        return Ok(beads.to_vec());
    }
    let sigma = arclength_positions(beads);
    let total = sigma[n - 1];
    if !(total > T::zero()) {
        return Ok(beads.to_vec());
    }
    let mut out = Vec::with_capacity(n);
    out.push(beads[0].clone());
    let mut j = 0;
    for i in 1..n - 1 {
        let target = total * T::lit(i as f64 / (n - 1) as f64);
        while j + 1 < n - 1 && sigma[j + 1] < target {
            j += 1;
        }
        let len = sigma[j + 1] - sigma[j];
        let t = if len > T::zero() {
            ((target - sigma[j]) / len).max(T::zero()).min(T::one())
        } else {
            T::zero()
        };
        out.push(space.interpolate(&beads[j], &beads[j + 1], t)?);
    }
    out.push(beads[n - 1].clone());
    Ok(out)
}

fn redistribute<T: Real, S: StringSpace<T>>(space: &S, beads: &[Field<T>], m: usize) -> Result<Vec<Field<T>>> {
    let last = beads.len() - 1;
    if m == 0 || m == last {
        return redistribute_segment(space, beads);
    }
    let mut left = redistribute_segment(space, &beads[..=m])?;
    let right = redistribute_segment(space, &beads[m..])?;
    left.extend(right.into_iter().skip(1));
    Ok(left)
}

/// Supremum of the interpolated path: every segment is sampled, then the
/// best sample is refined by golden-section search on its segment.
pub fn path_sup<T: Real, S: StringSpace<T>>(space: &S, beads: &[Field<T>], values: &[T]) -> (T, Field<T>) {
    const SAMPLES: usize = 8;
    let (m, max) = argmax_first(values);
    let mut best = (max, m, T::zero());
    for k in 0..beads.len() - 1 {
        for j in 1..SAMPLES {
            let t = T::lit(j as f64 / SAMPLES as f64);
            if let Ok(u) = space.interpolate(&beads[k], &beads[k + 1], t) {
                let v = space.value(&u);
                if v > best.0 {
                    best = (v, k, t);
                }
            }
        }
    }
    let (v0, k, t0) = best;
    if t0 == T::zero() {
        return (v0, beads[m].clone());
    }
    let eval = |t: T| {
        space
            .interpolate(&beads[k], &beads[k + 1], t)
            .map(|u| space.value(&u))
            .unwrap_or(T::neg_infinity())
    };
    let width = T::lit(1.0 / SAMPLES as f64);
    let (mut lo, mut hi) = ((t0 - width).max(T::zero()), (t0 + width).min(T::one()));
    let g = T::lit(0.618_033_988_749_894_9);
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = eval(x1);
        }
    }
    let t = (lo + hi) * T::lit(0.5);
    match space.interpolate(&beads[k], &beads[k + 1], t) {
        Ok(u) => {
            let v = space.value(&u);
            if v >= v0 {
                (v, u)
            } else {
                let u0 = space
                    .interpolate(&beads[k], &beads[k + 1], t0)
                    .unwrap_or_else(|_| beads[m].clone());
                (v0, u0)
            }
        }
        Err(_) => (max, beads[m].clone()),
    }
}
