//! Boundary value problems `-Δ_p u = f(u)` with Fucik-type asymptotics at
//! zero and at infinity, and the solvers behind the multiplicity scenarios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{random_start, EigenPair};
use crate::energy::{
    build_phi_tilde, grad_i, phi_functional, phi_signed_functional, residual_norm, FucikParams, Functional,
    PerturbationSpec, PerturbedFunctional, ShiftParam,
};
use crate::error::{Error, Result};
use crate::grid::{seminorm, Domain, Exponent, Field, GAUSS3};
use crate::minimax::{mountain_pass_c, MinimaxConfig};
use crate::scalar::Real;
use crate::solvers::{
    minimize, newton_critical, path_sup, run_string, AmbientSpace, Critical, StringConfig, NEWTON_MAX_ITER,
};
use crate::spectrum::{classify, Region, SpectrumData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn factor<T: Real>(self) -> T {
        match self {
            Sign::Positive => T::one(),
            Sign::Negative => -T::one(),
        }
    }
}

/// Blend profile between the two asymptotic regimes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlendProfile {
    Smoothstep,
}

/// 8-point Gauss–Legendre rule on `[-1, 1]`.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];
const GL_PANELS: usize = 8;

/// `f(t) = (a0 + (a - a0) β(t)) t^{p-1}` for `t > 0` and
/// `f(t) = -(b0 + (b - b0) β(|t|)) |t|^{p-1}` for `t < 0`, where `β` is a
/// smoothstep from 0 at `t_small` to 1 at `t_large`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NonlinearitySpec<T>", into = "NonlinearitySpec<T>")]
#[serde(bound = "T: Real")]
pub struct Nonlinearity<T: Real> {
    p: Exponent<T>,
    ab0: FucikParams<T>,
    ab: FucikParams<T>,
    t_small: T,
    t_large: T,
    /// `∫_{t_small}^{t_large} β(τ) τ^{p-1} dτ`
    blend_total: T,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct NonlinearitySpec<T> {
    p: Exponent<T>,
    ab0: FucikParams<T>,
    ab: FucikParams<T>,
    t_small: T,
    t_large: T,
    blend: BlendProfile,
}

impl<T: Real> TryFrom<NonlinearitySpec<T>> for Nonlinearity<T> {
    type Error = Error;
    fn try_from(s: NonlinearitySpec<T>) -> Result<Self> {
        Nonlinearity::model(s.ab0, s.ab, s.p, s.t_small, s.t_large)
    }
}

impl<T: Real> From<Nonlinearity<T>> for NonlinearitySpec<T> {
    fn from(n: Nonlinearity<T>) -> Self {
        NonlinearitySpec {
            p: n.p,
            ab0: n.ab0,
            ab: n.ab,
            t_small: n.t_small,
            t_large: n.t_large,
            blend: BlendProfile::Smoothstep,
        }
    }
}

/// See [`Nonlinearity::model`].
pub fn make_model_nonlinearity<T: Real>(
    ab0: FucikParams<T>,
    ab: FucikParams<T>,
    p: Exponent<T>,
    t_small: T,
    t_large: T,
) -> Result<Nonlinearity<T>> {
    Nonlinearity::model(ab0, ab, p, t_small, t_large)
}

impl<T: Real> Nonlinearity<T> {
    pub fn model(ab0: FucikParams<T>, ab: FucikParams<T>, p: Exponent<T>, t_small: T, t_large: T) -> Result<Self> {
        FucikParams::new(ab0.a, ab0.b)?;
        FucikParams::new(ab.a, ab.b)?;
        if !(t_small > T::zero() && t_large > t_small && t_large.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "need 0 < t_small < t_large, got ({t_small}, {t_large})"
            )));
        }
        let mut n = Self {
            p,
            ab0,
            ab,
            t_small,
            t_large,
            blend_total: T::zero(),
        };
        n.blend_total = n.blend_integral(t_large);
        Ok(n)
    }

    pub fn exponent(&self) -> Exponent<T> {
        self.p
    }

    pub fn ab0(&self) -> FucikParams<T> {
        self.ab0
    }

    pub fn ab(&self) -> FucikParams<T> {
        self.ab
    }

    pub fn t_small(&self) -> T {
        self.t_small
    }

    pub fn t_large(&self) -> T {
        self.t_large
    }

    fn width(&self) -> T {
        self.t_large - self.t_small
    }

    /// `β(r)` for `r >= 0`.
    pub fn blend(&self, r: T) -> T {
        if r <= self.t_small {
            T::zero()
        } else if r >= self.t_large {
            T::one()
        } else {
            let x = (r - self.t_small) / self.width();
            x * x * (T::lit(3.0) - T::lit(2.0) * x)
        }
    }

    fn blend_prime(&self, r: T) -> T {
        if r <= self.t_small || r >= self.t_large {
            T::zero()
        } else {
            let x = (r - self.t_small) / self.width();
            T::lit(6.0) * x * (T::one() - x) / self.width()
        }
    }

    /// `∫_{t_small}^{min(r, t_large)} β(τ) τ^{p-1} dτ` by composite
    /// Gauss–Legendre; the integrand is smooth on that interval.
    fn blend_integral(&self, r: T) -> T {
        let hi = r.min(self.t_large);
        if hi <= self.t_small {
            return T::zero();
        }
        let q = self.p.p - T::one();
        let panel = (hi - self.t_small) / T::lit(GL_PANELS as f64);
        let half = panel * T::lit(0.5);
        let mut total = T::zero();
        for k in 0..GL_PANELS {
            let mid = self.t_small + panel * T::lit(k as f64 + 0.5);
            for &(x, w) in &GL8 {
                let tau = mid + half * T::lit(x);
                total = total + T::lit(w) * half * self.blend(tau) * tau.powf(q);
            }
        }
        total
    }

    /// `B(r) = ∫_0^r β(τ) τ^{p-1} dτ`
    fn blend_antiderivative(&self, r: T) -> T {
        if r <= self.t_small {
            T::zero()
        } else if r >= self.t_large {
            self.blend_total + (r.powf(self.p.p) - self.t_large.powf(self.p.p)) / self.p.p
        } else {
            self.blend_integral(r)
        }
    }

    fn coefficients(&self, t: T) -> (T, T) {
        if t >= T::zero() {
            (self.ab0.a, self.ab.a)
        } else {
            (self.ab0.b, self.ab.b)
        }
    }

    /// Coefficient `f(t) / (|t|^{p-2} t)`; exact at both ends.
    pub fn slope_ratio(&self, t: T) -> T {
        let (c0, c1) = self.coefficients(t);
        let r = t.abs();
        if r <= self.t_small {
            c0
        } else if r >= self.t_large {
            c1
        } else {
            c0 + (c1 - c0) * self.blend(r)
        }
    }

    /// `f(t)`
    pub fn eval(&self, t: T) -> T {
        if t == T::zero() {
            return T::zero();
        }
        let r = t.abs();
        t.signum() * self.slope_ratio(t) * r.powf(self.p.p - T::one())
    }

    /// `f'(t)`; the power `|t|^{p-2}` is evaluated at `max(|t|, 1e-12)`.
    pub fn derivative(&self, t: T) -> T {
        let (c0, c1) = self.coefficients(t);
        let r = t.abs();
        let q = self.p.p - T::one();
        let rr = r.max(T::lit(1e-12));
        let k = if t == T::zero() {
            c0.max(self.ab0.a.max(self.ab0.b))
        } else {
            self.slope_ratio(t)
        };
        (c1 - c0) * self.blend_prime(r) * r.powf(q) + k * q * rr.powf(q - T::one())
    }

    /// `p F(t)`, with `F' = f` and `F(0) = 0`.
    pub fn p_primitive(&self, t: T) -> T {
        let (c0, c1) = self.coefficients(t);
        let r = t.abs();
        if r == T::zero() {
            return T::zero();
        }
        c0 * r.powf(self.p.p) + (c1 - c0) * self.p.p * self.blend_antiderivative(r)
    }

    /// `F(t)`
    pub fn primitive(&self, t: T) -> T {
        self.p_primitive(t) / self.p.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionSign {
    Positive,
    Negative,
    SignChanging,
    Trivial,
}

/// Nodal sign with a relative dead zone of `1e-10 max|u|`.
pub fn classify_sign<T: Real>(u: &Field<T>) -> SolutionSign {
    let m = u.max_abs();
    if m <= T::tol_floor(1e-12) {
        return SolutionSign::Trivial;
    }
    let eps = T::tol_floor(1e-10) * m;
    let has_pos = u.values().iter().any(|&v| v > eps);
    let has_neg = u.values().iter().any(|&v| v < -eps);
    match (has_pos, has_neg) {
        (true, true) => SolutionSign::SignChanging,
        (true, false) => SolutionSign::Positive,
        (false, true) => SolutionSign::Negative,
        (false, false) => SolutionSign::Trivial,
    }
}

/// Weak-form residual of `-Δ_p u = f(u)` assembled node by node, kept
/// separate from the element loops used by the functionals.
pub fn independent_residual<T: Real>(u: &Field<T>, f: &Nonlinearity<T>) -> T {
    let dom = u.domain();
    let h = dom.h();
    let n = dom.n_interior();
    let p = f.exponent();
    let vals = u.values();
    let at = |i: isize| -> T {
        if i < 0 || i as usize >= n {
            T::zero()
        } else {
            vals[i as usize]
        }
    };
    let mut sum = T::zero();
    for i in 0..n as isize {
        let (l, c, r) = (at(i - 1), at(i), at(i + 1));
        let flux_left = p.density_prime((c - l) / h);
        let flux_right = p.density_prime((r - c) / h);
        let mut load = T::zero();
        for &(xi, w) in &GAUSS3 {
            let xi = T::lit(xi);
            // Rising half of the hat on [x_{i-1}, x_i], falling half on [x_i, x_{i+1}].
            load = load + T::lit(w) * xi * f.eval(l + (c - l) * xi);
            load = load + T::lit(w) * xi * f.eval(r + (c - r) * xi);
        }
        let ri = flux_left - flux_right - p.p * h * load;
        sum = sum + ri * ri;
    }
    (sum / h).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolveConfig<T> {
    /// Target residual of the solvers.
    pub tol: T,
    /// Largest residual a reported solution may carry.
    pub report_tol: T,
    pub restarts: usize,
    pub seed: u64,
    /// Minimal nodal max-norm distance between distinct solutions.
    pub separation: T,
    pub max_iter: usize,
    pub beads: usize,
    pub max_sweeps: usize,
    pub minimax: MinimaxConfig<T>,
    /// Overrides the automatic choice of `ρ` and `R`.
    pub perturbation: Option<PerturbationSpec<T>>,
}

impl<T: Real> Default for SolveConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::tol_floor(1e-10),
            report_tol: T::tol_floor(1e-6),
            restarts: 20,
            seed: 0,
            separation: T::lit(1e-2),
            max_iter: 100_000,
            beads: 21,
            max_sweeps: 3000,
            minimax: MinimaxConfig::default(),
            perturbation: None,
        }
    }
}

impl<T: Real> SolveConfig<T> {
    fn string(&self) -> StringConfig<T> {
        StringConfig {
            max_sweeps: self.max_sweeps,
            tol: T::tol_floor(1e-8),
            patience: 5,
            step_damping: T::one(),
            grad_tol: self.tol,
        }
    }
}

/// Scenario tags of the multiplicity dispatcher.
pub mod scenario {
    /// Slopes at 0 and infinity straddle `λ1` on the positive side.
    pub const POSITIVE_CROSSING: &str = "positive_crossing";
    /// Same on the negative side.
    pub const NEGATIVE_CROSSING: &str = "negative_crossing";
    /// The two points lie on opposite sides of the first nontrivial curve.
    pub const CURVE_CROSSING: &str = "curve_crossing";
    /// Opposite sides of a trivial corner line: fixed-sign solutions.
    pub const FIXED_SIGN: &str = "fixed_sign";
    /// Above the curve at 0, below both trivial lines at infinity.
    pub const THIRD_SOLUTION: &str = "third_solution";
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Solution<T: Real> {
    pub scenarios: Vec<String>,
    pub method: String,
    pub field: Field<T>,
    pub residual: T,
    pub independent_residual: T,
    pub sign: SolutionSign,
    pub energy: T,
    pub seminorm: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolveReport<T: Real> {
    pub ab0: FucikParams<T>,
    pub ab: FucikParams<T>,
    pub label0: Option<Region>,
    pub label_inf: Option<Region>,
    pub scenarios: Vec<String>,
    pub notes: Vec<String>,
    pub solutions: Vec<Solution<T>>,
    /// Pairwise nodal max-norm distances between solutions.
    pub distinctness: Vec<Vec<T>>,
    pub perturbation: Option<PerturbationSpec<T>>,
    /// Solutions a detected scenario requires but the solvers did not find.
    pub missing: Vec<String>,
}

impl<T: Real> SolveReport<T> {
    fn new(f: &Nonlinearity<T>) -> Self {
        Self {
            ab0: f.ab0(),
            ab: f.ab(),
            label0: None,
            label_inf: None,
            scenarios: vec![],
            notes: vec![],
            solutions: vec![],
            distinctness: vec![],
            perturbation: None,
            missing: vec![],
        }
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn count(&self, sign: SolutionSign) -> usize {
        self.solutions.iter().filter(|s| s.sign == sign).count()
    }

    fn finish(mut self) -> Self {
        self.distinctness = self
            .solutions
            .iter()
            .map(|a| self.solutions.iter().map(|b| a.field.max_abs_diff(&b.field)).collect())
            .collect();
        self
    }

    /// Adds `sol` unless an equal solution is present; returns its index.
    fn push(&mut self, sol: Solution<T>, separation: T) -> usize {
        if let Some(k) = self
            .solutions
            .iter()
            .position(|s| s.field.max_abs_diff(&sol.field) < separation)
        {
            for tag in sol.scenarios {
                if !self.solutions[k].scenarios.contains(&tag) {
                    self.solutions[k].scenarios.push(tag);
                }
            }
            return k;
        }
        self.solutions.push(sol);
        self.solutions.len() - 1
    }

    fn tag(&mut self, k: usize, tag: &str) {
        if !self.solutions[k].scenarios.iter().any(|t| t == tag) {
            self.solutions[k].scenarios.push(tag.to_string());
        }
    }
}

/// Certified record of a candidate; `None` if it fails `report_tol`.
pub fn certify<T: Real>(
    u: &Field<T>,
    f: &Nonlinearity<T>,
    tags: &[&str],
    method: &str,
    cfg: &SolveConfig<T>,
) -> Option<Solution<T>> {
    let phi = phi_functional(f);
    let residual = residual_norm(&phi.gradient(u));
    let independent = independent_residual(u, f);
    if !(residual <= cfg.report_tol && independent <= cfg.report_tol) {
        return None;
    }
    Some(Solution {
        scenarios: tags.iter().map(|t| t.to_string()).collect(),
        method: method.to_string(),
        field: u.clone(),
        residual,
        independent_residual: independent,
        sign: classify_sign(u),
        energy: phi.value(u),
        seminorm: seminorm(u, &f.exponent()),
    })
}

/// Outcome of a sign-restricted search.
#[derive(Clone, Debug)]
pub struct SignedOutcome<T: Real> {
    pub critical: Option<Critical<T>>,
    pub method: &'static str,
    pub warnings: Vec<String>,
    pub restarts: usize,
}

fn signed_starts<T: Real>(
    dom: &Domain<T>,
    f: &Nonlinearity<T>,
    sign: Sign,
    count: usize,
    seed: u64,
) -> Result<Vec<Field<T>>> {
    (0..count)
        .map(|k| {
            let w = random_start(dom, &f.exponent(), 4, seed.wrapping_add(k as u64))?;
            let shape = Field::from_raw(*dom, w.field().values().iter().map(|v| v.abs()).collect());
            let m = shape.max_abs();
            // Amplitudes from below t_small to beyond t_large.
            let frac = T::lit((k as f64 + 0.5) / count as f64);
            let amp = f.t_small() * T::lit(0.5) + frac * (T::lit(2.0) * f.t_large());
            Ok(shape.scaled(sign.factor::<T>() * amp / m))
        })
        .collect()
}

fn mountain_pass<T: Real, F: Functional<T>>(
    f: &F,
    beads: Vec<Field<T>>,
    cfg: &SolveConfig<T>,
) -> Result<Option<Critical<T>>> {
    let space = AmbientSpace { f };
    let run = run_string(&space, beads, &cfg.string())?;
    let (m, _) = run.argmax();
    let seeds = [path_sup(&space, &run.beads, &run.values).1, run.beads[m].clone()];
    for s in seeds {
        let r = newton_critical(f, &s, cfg.tol, NEWTON_MAX_ITER)?;
        if r.converged {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// Nontrivial critical point of `Φ±`: global minimization when the slope at
/// infinity is below `λ1`, a mountain pass from 0 otherwise.
pub fn solve_signed<T: Real>(
    f: &Nonlinearity<T>,
    sign: Sign,
    eig: &EigenPair<T>,
    cfg: &SolveConfig<T>,
) -> Result<SignedOutcome<T>> {
    let (s0, sinf) = match sign {
        Sign::Positive => (f.ab0().a, f.ab().a),
        Sign::Negative => (f.ab0().b, f.ab().b),
    };
    let l1 = eig.lambda;
    let mut warnings = vec![];
    if !((s0 - l1) * (sinf - l1) < T::zero()) {
        warnings.push(format!(
            "slopes {s0} at 0 and {sinf} at infinity do not straddle lambda1 = {l1}; a {sign:?} solution is not guaranteed"
        ));
    }
    let func = phi_signed_functional(f, sign);
    let dom = *eig.domain();
    let nontrivial = |c: &Critical<T>| c.converged && c.u.max_abs() >= cfg.separation;
    if sinf < l1 {
        let starts = signed_starts(&dom, f, sign, cfg.restarts.max(1), cfg.seed)?;
        let runs: Vec<Result<Critical<T>>> = starts
            .par_iter()
            .map(|u0| minimize(&func, u0, cfg.tol, cfg.max_iter))
            .collect();
        let mut best: Option<Critical<T>> = None;
        for r in runs {
            let r = r?;
            if nontrivial(&r) && best.as_ref().is_none_or(|b| r.value < b.value) {
                best = Some(r);
            }
        }
        return Ok(SignedOutcome {
            critical: best,
            method: "minimization",
            warnings,
            restarts: starts.len(),
        });
    }
    let dir = eig.phi.field().scaled(sign.factor());
    let mut t = f.t_large();
    let mut tries = 0;
    while func.value(&dir.scaled(t)) >= T::zero() {
        t = t * T::lit(2.0);
        tries += 1;
        if tries > 60 {
            return Err(Error::Hypothesis(format!(
                "{sign:?} truncated functional stays nonnegative along the first eigenfunction"
            )));
        }
    }
    let end = dir.scaled(t);
    let nb = cfg.beads.max(5);
    let beads = (0..nb)
        .map(|k| end.scaled(T::lit(k as f64 / (nb - 1) as f64)))
        .collect();
    let crit = mountain_pass(&func, beads, cfg)?.filter(nontrivial);
    Ok(SignedOutcome {
        critical: crit,
        method: "mountain_pass",
        warnings,
        restarts: 1,
    })
}

/// Chooses `ρ` and `R` for the perturbed functional.
///
/// `ρ` starts at 0.9 times the largest radius on which every field stays
/// within `t_small` (so the functional equals the small-amplitude Fucik
/// functional on `B_ρ`), `R` at twice the largest given norm. Each is then
/// halved (resp. doubled) until, on sampled fields of that norm, the
/// gradient of `Φ` exceeds half the homogeneous lower bound of the
/// corresponding Fucik functional.
pub fn choose_perturbation<T: Real>(
    f: &Nonlinearity<T>,
    dom: &Domain<T>,
    norms: &[T],
    seed: u64,
) -> Result<PerturbationSpec<T>> {
    let p = f.exponent();
    let pp = p.p;
    let half_len = dom.length() * T::lit(0.5);
    let rho_max = f.t_small() / half_len.powf(T::one() - pp.recip());
    let dirs: Vec<Field<T>> = (0..32)
        .map(|k| {
            let w = random_start(dom, &p, 6, seed.wrapping_add(1000 + k))?;
            let n = seminorm(w.field(), &p);
            Ok(w.field().scaled(n.recip()))
        })
        .collect::<Result<_>>()?;
    let phi = phi_functional(f);
    let kappa = |ab: FucikParams<T>| {
        dirs.iter()
            .map(|w| residual_norm(&grad_i(w, ab, &p)))
            .fold(T::infinity(), |m, v| m.min(v))
    };
    let passes = |r: T, k: T| {
        dirs.iter()
            .all(|w| residual_norm(&phi.gradient(&w.scaled(r))) >= T::lit(0.5) * k * r.powf(pp - T::one()))
    };
    let k0 = kappa(f.ab0());
    let mut rho = T::lit(0.9) * rho_max;
    for _ in 0..40 {
        if passes(rho, k0) {
            break;
        }
        rho = rho * T::lit(0.5);
    }
    let kinf = kappa(f.ab());
    let largest = norms.iter().fold(T::zero(), |m, &v| m.max(v));
    let mut big_r = (largest * T::lit(2.0)).max(rho * T::lit(4.0));
    for _ in 0..40 {
        if passes(big_r, kinf) {
            break;
        }
        big_r = big_r * T::lit(2.0);
    }
    PerturbationSpec::new(rho, big_r)
}

fn check_third_preconditions<T: Real>(f: &Nonlinearity<T>, spec: &SpectrumData<T>) -> Result<()> {
    let band = spec.default_band();
    let l0 = classify(f.ab0().a, f.ab0().b, spec, band)?.label;
    let li = classify(f.ab().a, f.ab().b, spec, band)?.label;
    if l0 != Region::AboveC2 {
        return Err(Error::Hypothesis(format!(
            "third solution needs (a0, b0) above the first nontrivial curve; ({}, {}) is {l0}",
            f.ab0().a,
            f.ab0().b
        )));
    }
    if li != Region::BelowCl1 {
        return Err(Error::Hypothesis(format!(
            "third solution needs (a, b) below both trivial lines; ({}, {}) is {li}",
            f.ab().a,
            f.ab().b
        )));
    }
    Ok(())
}

/// Global minimizers `u0±` of `Φ±` and a mountain-pass critical point `u1`
/// of the perturbed functional between them.
pub fn solve_third<T: Real>(
    f: &Nonlinearity<T>,
    spec: &SpectrumData<T>,
    eig: &EigenPair<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveReport<T>> {
    check_third_preconditions(f, spec)?;
    let mut report = SolveReport::new(f);
    let tag = scenario::THIRD_SOLUTION;
    let mut minimizers = vec![];
    for sign in [Sign::Positive, Sign::Negative] {
        let out = solve_signed(f, sign, eig, cfg)?;
        report.notes.extend(out.warnings);
        let Some(c) = out.critical else {
            report
                .missing
                .push(format!("global minimizer of the {sign:?} truncated functional"));
            return Ok(report.finish());
        };
        if !(c.value < T::zero()) {
            return Err(Error::Hypothesis(format!(
                "{sign:?} minimizer has energy {} >= 0 = energy at the origin",
                c.value
            )));
        }
        minimizers.push(c.u);
    }
    let (up, um) = (minimizers[0].clone(), minimizers[1].clone());
    for (u, name) in [(&up, "positive minimizer"), (&um, "negative minimizer")] {
        match certify(u, f, &[tag], "minimization", cfg) {
            Some(s) => {
                report.push(s, cfg.separation);
            }
            None => report.missing.push(name.into()),
        }
    }
    let p = f.exponent();
    let norms = [seminorm(&up, &p), seminorm(&um, &p)];
    let mut pert = match cfg.perturbation {
        Some(s) => s,
        None => choose_perturbation(f, eig.domain(), &norms, cfg.seed)?,
    };
    let amp = up.max_abs().max(um.max_abs());
    let two_pi = T::lit(2.0) * T::PI();
    let dom = *eig.domain();
    let (l, len) = (dom.left(), dom.length());
    let bump = Field::interpolate(dom, |x| amp * (two_pi * (x - l) / len).sin())?;
    let nb = cfg.beads.max(5);
    let mut found = None;
    for _ in 0..3 {
        let phit: PerturbedFunctional<T> = build_phi_tilde(f, pert, spec)?;
        let beads: Vec<Field<T>> = (0..nb)
            .map(|k| {
                let t = T::lit(k as f64 / (nb - 1) as f64);
                up.scaled(T::one() - t)
                    .plus_scaled(t, &um)
                    .plus_scaled(T::lit(4.0) * t * (T::one() - t), &bump)
            })
            .collect();
        let Some(c) = mountain_pass(&phit, beads, cfg)? else {
            report.notes.push(format!(
                "mountain pass did not resolve a saddle with rho = {}, R = {}",
                pert.rho, pert.big_r
            ));
            break;
        };
        let n = phit.norm(&c.u);
        if n > pert.big_r {
            report
                .notes
                .push(format!("saddle norm {n} exceeds R = {}; doubling R", pert.big_r));
            pert = PerturbationSpec::new(pert.rho, pert.big_r * T::lit(4.0))?;
            continue;
        }
        if n < pert.rho {
            report.notes.push(format!("saddle norm {n} below rho = {}", pert.rho));
        }
        found = Some(c);
        break;
    }
    report.perturbation = Some(pert);
    match found.and_then(|c| certify(&c.u, f, &[tag], "mountain_pass", cfg)) {
        Some(sol) => {
            let d = sol
                .field
                .max_abs_diff(&up)
                .min(sol.field.max_abs_diff(&um))
                .min(sol.field.max_abs());
            if d < cfg.separation {
                report.notes.push(format!(
                    "mountain-pass point collapses onto a known solution (distance {d})"
                ));
                report.missing.push("third nontrivial solution".into());
            } else {
                report.push(sol, cfg.separation);
            }
        }
        None => report.missing.push("third nontrivial solution".into()),
    }
    Ok(report.finish())
}

/// Newton on `Φ` from scaled copies of `±` the second eigenfunction.
fn curve_crossing_solution<T: Real>(
    f: &Nonlinearity<T>,
    eig: &EigenPair<T>,
    cfg: &SolveConfig<T>,
) -> Result<Option<Field<T>>> {
    let w2 = mountain_pass_c(ShiftParam::new(T::zero())?, eig, &cfg.minimax)?
        .argmax_bead
        .into_field();
    let phi = phi_functional(f);
    for k in 0..24 {
        let t = f.t_small() * T::lit(0.25) * T::lit(2.0).powf(T::lit(k as f64 * 0.5));
        for sign in [T::one(), -T::one()] {
            let r = newton_critical(&phi, &w2.scaled(sign * t), cfg.tol, NEWTON_MAX_ITER)?;
            if r.converged && r.u.max_abs() >= cfg.separation {
                return Ok(Some(r.u));
            }
        }
    }
    Ok(None)
}

fn above_cu1(r: Region) -> bool {
    matches!(r, Region::BetweenCu1C2 | Region::AboveC2)
}

/// Runs every multiplicity scenario that the labels of `(a0, b0)` and
/// `(a, b)` select and collects the certified solutions.
pub fn multiplicity_experiment<T: Real>(
    f: &Nonlinearity<T>,
    spec: &SpectrumData<T>,
    eig: &EigenPair<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveReport<T>> {
    let band = spec.default_band();
    let l0 = classify(f.ab0().a, f.ab0().b, spec, band)?.label;
    let li = classify(f.ab().a, f.ab().b, spec, band)?.label;
    let mut report = SolveReport::new(f);
    report.label0 = Some(l0);
    report.label_inf = Some(li);
    if l0 == Region::OnSpectrumBand || li == Region::OnSpectrumBand {
        report
            .notes
            .push("a point lies on the spectrum band; resonant cases are refused".into());
        return Ok(report.finish());
    }
    let lam = spec.lambda1;
    let pos = (f.ab0().a - lam) * (f.ab().a - lam) < T::zero();
    let neg = (f.ab0().b - lam) * (f.ab().b - lam) < T::zero();
    let crossing = (l0 == Region::AboveC2) != (li == Region::AboveC2);
    let across_lower = (l0 == Region::BelowCl1) != (li == Region::BelowCl1);
    let across_upper = above_cu1(l0) != above_cu1(li);
    let third = l0 == Region::AboveC2 && li == Region::BelowCl1;

    let mut tags = vec![];
    if pos {
        tags.push(scenario::POSITIVE_CROSSING);
    }
    if neg {
        tags.push(scenario::NEGATIVE_CROSSING);
    }
    if crossing {
        tags.push(scenario::CURVE_CROSSING);
    }
    if across_lower || across_upper {
        tags.push(scenario::FIXED_SIGN);
    }
    if third {
        tags.push(scenario::THIRD_SOLUTION);
    }
    report.scenarios = tags.iter().map(|t| t.to_string()).collect();
    if tags.is_empty() {
        if l0 == Region::BetweenCu1C2 && li == Region::BetweenCu1C2 {
            report
                .notes
                .push("both points between the upper trivial line and the curve: not covered".into());
        }
        report.notes.push("no multiplicity scenario applies".into());
        return Ok(report.finish());
    }

    if third {
        let sub = solve_third(f, spec, eig, cfg)?;
        report.notes.extend(sub.notes);
        report.missing.extend(sub.missing);
        report.perturbation = sub.perturbation;
        for s in sub.solutions {
            report.push(s, cfg.separation);
        }
    } else {
        for (flag, sign, tag) in [
            (pos, Sign::Positive, scenario::POSITIVE_CROSSING),
            (neg, Sign::Negative, scenario::NEGATIVE_CROSSING),
        ] {
            if !flag {
                continue;
            }
            let out = solve_signed(f, sign, eig, cfg)?;
            report.notes.extend(out.warnings);
            match out.critical.and_then(|c| certify(&c.u, f, &[tag], out.method, cfg)) {
                Some(s) => {
                    report.push(s, cfg.separation);
                }
                None => report.missing.push(format!("{sign:?} solution")),
            }
        }
    }
    // Attach the tags certified by solutions already found.
    for k in 0..report.solutions.len() {
        let sign = report.solutions[k].sign;
        if third && matches!(sign, SolutionSign::Positive) && pos {
            report.tag(k, scenario::POSITIVE_CROSSING);
        }
        if third && matches!(sign, SolutionSign::Negative) && neg {
            report.tag(k, scenario::NEGATIVE_CROSSING);
        }
        if (across_lower || across_upper) && matches!(sign, SolutionSign::Positive | SolutionSign::Negative) {
            report.tag(k, scenario::FIXED_SIGN);
        }
        if crossing && sign != SolutionSign::Trivial {
            report.tag(k, scenario::CURVE_CROSSING);
        }
    }
    if crossing && !report.solutions.iter().any(|s| s.sign != SolutionSign::Trivial) {
        match curve_crossing_solution(f, eig, cfg)?
            .and_then(|u| certify(&u, f, &[scenario::CURVE_CROSSING], "seeded_newton", cfg))
        {
            Some(s) => {
                report.push(s, cfg.separation);
            }
            None => report.missing.push("nontrivial solution across the curve".into()),
        }
    }
    if across_lower && across_upper {
        for (sign, name) in [
            (SolutionSign::Positive, "positive"),
            (SolutionSign::Negative, "negative"),
        ] {
            if report.count(sign) == 0 && !report.missing.iter().any(|m| m.to_lowercase().starts_with(name)) {
                report.missing.push(format!("{name} fixed-sign solution"));
            }
        }
    } else if (across_lower || across_upper)
        && report.count(SolutionSign::Positive) + report.count(SolutionSign::Negative) == 0
        && report.missing.is_empty()
    {
        report.missing.push("fixed-sign solution".into());
    }
    Ok(report.finish())
}
