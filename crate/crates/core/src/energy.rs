//! Discrete functionals and their nodal gradients.
//!
//! Every functional here has the form `E(u) + ∫ V(u)` where `E` is the
//! (regularized) `∫ |∇u|^p` and `V` a pointwise potential, so gradients and
//! Hessians assemble element by element. The only exception is the
//! perturbed functional, whose norm-dependent cutoffs couple all nodes.

use serde::{Deserialize, Serialize};

use crate::bvp::{Nonlinearity, Sign};
use crate::error::{Error, Result};
use crate::grid::{grad_seminorm_energy, integrate_pointwise, lp_norm, seminorm, Exponent, Field, GAUSS3};
use crate::linalg::Tridiagonal;
use crate::scalar::{abs_pow, neg, pos, signed_pow, Real};
use crate::spectrum::SpectrumData;

/// Coefficients `(a, b)` of `a (u+)^{p-1} - b (u-)^{p-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FucikParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> FucikParams<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite Fucik pair ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }
}

/// Shift `s >= 0` of the constrained functional.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ShiftParam<T>(T);

impl<T: Real> ShiftParam<T> {
    pub fn new(s: T) -> Result<Self> {
        if !s.is_finite() || s < T::zero() {
            return Err(Error::InvalidInput(format!("shift must be finite and >= 0, got {s}")));
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> T {
        self.0
    }
}

/// Pointwise integrand `V(t)` with first and second derivatives.
pub trait Potential<T: Real>: Send + Sync {
    fn value(&self, t: T) -> T;
    fn derivative(&self, t: T) -> T;
    /// Second derivative; may be approximated near points where `V` is only
    /// `C^1` (used for Newton steps and preconditioning, never for values).
    fn curvature(&self, t: T) -> T;
}

/// Smallest magnitude at which `|t|^{p-2}` is evaluated in curvatures.
fn curvature_floor<T: Real>() -> T {
    T::lit(1e-12)
}

/// `-a (t+)^p - b (t-)^p`
#[derive(Clone, Copy, Debug)]
pub struct FucikPotential<T> {
    pub ab: FucikParams<T>,
    pub p: T,
}

impl<T: Real> Potential<T> for FucikPotential<T> {
    fn value(&self, t: T) -> T {
        -self.ab.a * abs_pow(pos(t), self.p) - self.ab.b * abs_pow(neg(t), self.p)
    }

    fn derivative(&self, t: T) -> T {
        let q = self.p - T::one();
        -self.p * (self.ab.a * abs_pow(pos(t), q) - self.ab.b * abs_pow(neg(t), q))
    }

    fn curvature(&self, t: T) -> T {
        let m = t.abs().max(curvature_floor());
        let k = self.p * (self.p - T::one()) * m.powf(self.p - T::lit(2.0));
        if t > T::zero() {
            -self.ab.a * k
        } else if t < T::zero() {
            -self.ab.b * k
        } else {
            -self.ab.a.max(self.ab.b) * k
        }
    }
}

/// `|t|^p`
#[derive(Clone, Copy, Debug)]
pub struct LpMass<T> {
    pub p: T,
}

impl<T: Real> Potential<T> for LpMass<T> {
    fn value(&self, t: T) -> T {
        abs_pow(t, self.p)
    }

    fn derivative(&self, t: T) -> T {
        self.p * signed_pow(t, self.p)
    }

    fn curvature(&self, t: T) -> T {
        let m = t.abs().max(curvature_floor());
        self.p * (self.p - T::one()) * m.powf(self.p - T::lit(2.0))
    }
}

/// `∫ V(u)` by element quadrature.
pub fn potential_value<T: Real, V: Potential<T> + ?Sized>(u: &Field<T>, v: &V) -> T {
    integrate_pointwise(u, |t| v.value(t))
}

/// Nodal gradient of `∫ V(u)`.
pub fn potential_gradient<T: Real, V: Potential<T> + ?Sized>(u: &Field<T>, v: &V) -> Vec<T> {
    let dom = u.domain();
    let n = dom.n_interior();
    let h = dom.h();
    let mut g = vec![T::zero(); n];
    for e in 0..dom.n_elements() {
        let (l, r) = u.element_ends(e);
        let (mut gl, mut gr) = (T::zero(), T::zero());
        for &(xi, w) in &GAUSS3 {
            let xi = T::lit(xi);
            let d = T::lit(w) * v.derivative(l + (r - l) * xi);
            gl = gl + d * (T::one() - xi);
            gr = gr + d * xi;
        }
        if e > 0 {
            g[e - 1] = g[e - 1] + h * gl;
        }
        if e < n {
            g[e] = g[e] + h * gr;
        }
    }
    g
}

/// Tridiagonal Hessian of `∫ V(u)`.
pub fn potential_hessian<T: Real, V: Potential<T> + ?Sized>(u: &Field<T>, v: &V) -> Tridiagonal<T> {
    let dom = u.domain();
    let n = dom.n_interior();
    let h = dom.h();
    let mut m = Tridiagonal::zeros(n);
    for e in 0..dom.n_elements() {
        let (l, r) = u.element_ends(e);
        let (mut ll, mut lr, mut rr) = (T::zero(), T::zero(), T::zero());
        for &(xi, w) in &GAUSS3 {
            let xi = T::lit(xi);
            let k = h * T::lit(w) * v.curvature(l + (r - l) * xi);
            ll = ll + k * (T::one() - xi) * (T::one() - xi);
            lr = lr + k * (T::one() - xi) * xi;
            rr = rr + k * xi * xi;
        }
        if e > 0 {
            m.add(e - 1, e - 1, ll);
        }
        if e < n {
            m.add(e, e, rr);
        }
        if e > 0 && e < n {
            m.add(e - 1, e, lr);
            m.add(e, e - 1, lr);
        }
    }
    m
}

/// Nodal gradient of [`grad_seminorm_energy`].
pub fn energy_gradient<T: Real>(u: &Field<T>, p: &Exponent<T>) -> Vec<T> {
    let dom = u.domain();
    let n = dom.n_interior();
    let mut g = vec![T::zero(); n];
    for e in 0..dom.n_elements() {
        let d = p.density_prime(u.slope(e));
        if e > 0 {
            g[e - 1] = g[e - 1] - d;
        }
        if e < n {
            g[e] = g[e] + d;
        }
    }
    g
}

/// Tridiagonal Hessian of [`grad_seminorm_energy`].
pub fn energy_hessian<T: Real>(u: &Field<T>, p: &Exponent<T>) -> Tridiagonal<T> {
    let dom = u.domain();
    let n = dom.n_interior();
    let h = dom.h();
    let mut m = Tridiagonal::zeros(n);
    for e in 0..dom.n_elements() {
        let k = p.density_second(u.slope(e)) / h;
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

/// Mesh-independent size of a nodal gradient: `(Σ g_i^2 / h)^{1/2}`, the
/// `L^2` norm of the lumped strong-form residual.
pub fn residual_norm<T: Real>(g: &Field<T>) -> T {
    let h = g.domain().h();
    (g.values().iter().map(|&v| v * v).sum::<T>() / h).sqrt()
}

/// Uniform interface to the functionals a solver can descend on.
pub trait Functional<T: Real>: Send + Sync {
    fn value(&self, u: &Field<T>) -> T;
    fn gradient(&self, u: &Field<T>) -> Field<T>;
    /// Exact tridiagonal Hessian when the functional is local at `u`.
    fn hessian(&self, _u: &Field<T>) -> Option<Tridiagonal<T>> {
        None
    }
    fn exponent(&self) -> Exponent<T>;
    fn tag(&self) -> &str;
}

/// `E(u) + ∫ V(u)` for a pointwise potential `V`.
#[derive(Clone, Debug)]
pub struct LocalFunctional<T, V> {
    pub p: Exponent<T>,
    pub potential: V,
    tag: String,
}

impl<T: Real, V: Potential<T>> LocalFunctional<T, V> {
    pub fn new(p: Exponent<T>, potential: V, tag: impl Into<String>) -> Self {
        Self {
            p,
            potential,
            tag: tag.into(),
        }
    }
}

impl<T: Real, V: Potential<T>> Functional<T> for LocalFunctional<T, V> {
    fn value(&self, u: &Field<T>) -> T {
        grad_seminorm_energy(u, &self.p) + potential_value(u, &self.potential)
    }

    fn gradient(&self, u: &Field<T>) -> Field<T> {
        let mut g = energy_gradient(u, &self.p);
        for (a, b) in g.iter_mut().zip(potential_gradient(u, &self.potential)) {
            *a = *a + b;
        }
        Field::from_raw(*u.domain(), g)
    }

    fn hessian(&self, u: &Field<T>) -> Option<Tridiagonal<T>> {
        let mut m = energy_hessian(u, &self.p);
        m.add_scaled(T::one(), &potential_hessian(u, &self.potential));
        Some(m)
    }

    fn exponent(&self) -> Exponent<T> {
        self.p
    }

    fn tag(&self) -> &str {
        &self.tag
    }
}

pub type FucikFunctional<T> = LocalFunctional<T, FucikPotential<T>>;

/// `I_(a,b)` as a functional handle.
pub fn fucik_functional<T: Real>(ab: FucikParams<T>, p: Exponent<T>) -> FucikFunctional<T> {
    LocalFunctional::new(p, FucikPotential { ab, p: p.p }, format!("I({}, {})", ab.a, ab.b))
}

/// `J_s = I_(s, 0)` as a functional handle.
pub fn shifted_functional<T: Real>(s: ShiftParam<T>, p: Exponent<T>) -> FucikFunctional<T> {
    let ab = FucikParams {
        a: s.value(),
        b: T::zero(),
    };
    LocalFunctional::new(p, FucikPotential { ab, p: p.p }, format!("J({})", s.value()))
}

/// `I_(a,b)(u) = ∫ |∇u|^p - a (u+)^p - b (u-)^p`
pub fn eval_i<T: Real>(u: &Field<T>, ab: FucikParams<T>, p: &Exponent<T>) -> T {
    fucik_functional(ab, *p).value(u)
}

pub fn grad_i<T: Real>(u: &Field<T>, ab: FucikParams<T>, p: &Exponent<T>) -> Field<T> {
    fucik_functional(ab, *p).gradient(u)
}

/// `J_s(u) = ∫ |∇u|^p - s (u+)^p`
pub fn eval_j<T: Real>(u: &Field<T>, s: ShiftParam<T>, p: &Exponent<T>) -> T {
    shifted_functional(s, *p).value(u)
}

pub fn grad_j<T: Real>(u: &Field<T>, s: ShiftParam<T>, p: &Exponent<T>) -> Field<T> {
    shifted_functional(s, *p).gradient(u)
}

/// `J_s` restricted to the unit `L^p` sphere; rejects fields off the sphere.
pub fn eval_jtilde<T: Real>(w: &Field<T>, s: ShiftParam<T>, p: &Exponent<T>) -> Result<T> {
    let deviation = (lp_norm(w, p) - T::one()).abs();
    if deviation > T::tol_floor(1e-10) {
        return Err(Error::OffSphere {
            deviation: deviation.as_f64(),
        });
    }
    Ok(eval_j(w, s, p))
}

/// `Φ(u) = ∫ |∇u|^p - p F(u)`
pub fn phi_functional<T: Real>(f: &Nonlinearity<T>) -> LocalFunctional<T, NonlinearPotential<T>> {
    LocalFunctional::new(
        f.exponent(),
        NonlinearPotential {
            f: f.clone(),
            sign: None,
        },
        "Phi",
    )
}

/// `Φ±` with the truncated primitive `F±`.
pub fn phi_signed_functional<T: Real>(f: &Nonlinearity<T>, sign: Sign) -> LocalFunctional<T, NonlinearPotential<T>> {
    let tag = match sign {
        Sign::Positive => "Phi+",
        Sign::Negative => "Phi-",
    };
    LocalFunctional::new(
        f.exponent(),
        NonlinearPotential {
            f: f.clone(),
            sign: Some(sign),
        },
        tag,
    )
}

pub fn eval_phi<T: Real>(u: &Field<T>, f: &Nonlinearity<T>) -> T {
    phi_functional(f).value(u)
}

pub fn grad_phi<T: Real>(u: &Field<T>, f: &Nonlinearity<T>) -> Field<T> {
    phi_functional(f).gradient(u)
}

pub fn eval_phi_pm<T: Real>(u: &Field<T>, f: &Nonlinearity<T>, sign: Sign) -> T {
    phi_signed_functional(f, sign).value(u)
}

pub fn grad_phi_pm<T: Real>(u: &Field<T>, f: &Nonlinearity<T>, sign: Sign) -> Field<T> {
    phi_signed_functional(f, sign).gradient(u)
}

/// `-p F(t)`, or `-p F±(t)` when a sign is set.
#[derive(Clone, Debug)]
pub struct NonlinearPotential<T: Real> {
    pub f: Nonlinearity<T>,
    pub sign: Option<Sign>,
}

impl<T: Real> NonlinearPotential<T> {
    #[inline]
    fn active(&self, t: T) -> bool {
        match self.sign {
            None => true,
            Some(Sign::Positive) => t >= T::zero(),
            Some(Sign::Negative) => t <= T::zero(),
        }
    }
}

impl<T: Real> Potential<T> for NonlinearPotential<T> {
    fn value(&self, t: T) -> T {
        if self.active(t) {
            -self.f.exponent().p * self.f.primitive(t)
        } else {
            T::zero()
        }
    }

    fn derivative(&self, t: T) -> T {
        if self.active(t) {
            -self.f.exponent().p * self.f.eval(t)
        } else {
            T::zero()
        }
    }

    fn curvature(&self, t: T) -> T {
        if self.active(t) {
            -self.f.exponent().p * self.f.derivative(t)
        } else {
            T::zero()
        }
    }
}

/// Smooth plateau profiles for the norm cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// 1 on `[0, 1/2]`, 0 on `[1, ∞)`
    SmoothstepInner,
    /// 0 on `[0, 1]`, 1 on `[2, ∞)`
    SmoothstepOuter,
}

fn smoothstep<T: Real>(x: T) -> T {
    let x = x.max(T::zero()).min(T::one());
    x * x * (T::lit(3.0) - T::lit(2.0) * x)
}

fn smoothstep_prime<T: Real>(x: T) -> T {
    if x <= T::zero() || x >= T::one() {
        T::zero()
    } else {
        T::lit(6.0) * x * (T::one() - x)
    }
}

impl CutoffProfile {
    pub fn value<T: Real>(&self, t: T) -> T {
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        match self {
            CutoffProfile::SmoothstepInner => {
                if t <= half {
                    T::one()
                } else if t >= T::one() {
                    T::zero()
                } else {
                    T::one() - smoothstep((t - half) * two)
                }
            }
            CutoffProfile::SmoothstepOuter => {
                if t <= T::one() {
                    T::zero()
                } else if t >= two {
                    T::one()
                } else {
                    smoothstep(t - T::one())
                }
            }
        }
    }

    pub fn derivative<T: Real>(&self, t: T) -> T {
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        match self {
            CutoffProfile::SmoothstepInner => -two * smoothstep_prime((t - half) * two),
            CutoffProfile::SmoothstepOuter => smoothstep_prime(t - T::one()),
        }
    }
}

/// Norm fed to the cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffNorm {
    /// `(∫ |∇u|^p)^{1/p}`
    W1pSeminorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PerturbationSpec<T> {
    pub rho: T,
    #[serde(rename = "R")]
    pub big_r: T,
    pub cutoff_inner: CutoffProfile,
    pub cutoff_outer: CutoffProfile,
    pub norm_used: CutoffNorm,
}

impl<T: Real> PerturbationSpec<T> {
    pub fn new(rho: T, big_r: T) -> Result<Self> {
        let s = Self {
            rho,
            big_r,
            cutoff_inner: CutoffProfile::SmoothstepInner,
            cutoff_outer: CutoffProfile::SmoothstepOuter,
            norm_used: CutoffNorm::W1pSeminorm,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > T::zero() && self.rho.is_finite() && self.big_r.is_finite()) {
            return Err(Error::InvalidInput(format!("rho must be positive, got {}", self.rho)));
        }
        if self.rho >= self.big_r {
            return Err(Error::InvalidInput(format!(
                "perturbation needs rho < R, got rho = {}, R = {}",
                self.rho, self.big_r
            )));
        }
        Ok(())
    }
}

/// Which formula a point falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shell {
    /// Equal to the small-amplitude Fucik functional.
    Inner,
    InnerBlend,
    /// Equal to `Φ`.
    Annulus,
    OuterBlend,
    /// Equal to the large-amplitude Fucik functional.
    Outer,
}

/// `Φ(u) - φ0(‖u‖/ρ) Ψ0(u) - φ(‖u‖/R) Ψ(u)` with `Ψ0 = Φ - I_(a0,b0)` and
/// `Ψ = Φ - I_(a,b)`.
#[derive(Clone, Debug)]
pub struct PerturbedFunctional<T: Real> {
    spec: PerturbationSpec<T>,
    phi: LocalFunctional<T, NonlinearPotential<T>>,
    near: FucikFunctional<T>,
    far: FucikFunctional<T>,
    p: Exponent<T>,
}

impl<T: Real> PerturbedFunctional<T> {
    /// Validates only `ρ < R`; see [`build_phi_tilde`] for the resonance check.
    pub fn new(f: &Nonlinearity<T>, spec: PerturbationSpec<T>) -> Result<Self> {
        spec.validate()?;
        let p = f.exponent();
        Ok(Self {
            spec,
            phi: phi_functional(f),
            near: fucik_functional(f.ab0(), p),
            far: fucik_functional(f.ab(), p),
            p,
        })
    }

    pub fn spec(&self) -> &PerturbationSpec<T> {
        &self.spec
    }

    pub fn norm(&self, u: &Field<T>) -> T {
        seminorm(u, &self.p)
    }

    fn weights(&self, u: &Field<T>) -> (T, T, T) {
        let n = self.norm(u);
        (
            n,
            self.spec.cutoff_inner.value(n / self.spec.rho),
            self.spec.cutoff_outer.value(n / self.spec.big_r),
        )
    }

    pub fn shell(&self, u: &Field<T>) -> Shell {
        let (_, w0, w1) = self.weights(u);
        if w0 == T::one() {
            Shell::Inner
        } else if w0 > T::zero() {
            Shell::InnerBlend
        } else if w1 == T::zero() {
            Shell::Annulus
        } else if w1 < T::one() {
            Shell::OuterBlend
        } else {
            Shell::Outer
        }
    }

    /// `Ψ0 = Φ - I_(a0,b0)`
    pub fn psi0(&self, u: &Field<T>) -> T {
        self.phi.value(u) - self.near.value(u)
    }

    /// `Ψ = Φ - I_(a,b)`
    pub fn psi(&self, u: &Field<T>) -> T {
        self.phi.value(u) - self.far.value(u)
    }

    pub fn phi(&self) -> &LocalFunctional<T, NonlinearPotential<T>> {
        &self.phi
    }
}

impl<T: Real> Functional<T> for PerturbedFunctional<T> {
    fn value(&self, u: &Field<T>) -> T {
        match self.shell(u) {
            Shell::Inner => self.near.value(u),
            Shell::Annulus => self.phi.value(u),
            Shell::Outer => self.far.value(u),
            Shell::InnerBlend | Shell::OuterBlend => {
                let (_, w0, w1) = self.weights(u);
                self.phi.value(u) - w0 * self.psi0(u) - w1 * self.psi(u)
            }
        }
    }

    fn gradient(&self, u: &Field<T>) -> Field<T> {
        match self.shell(u) {
            Shell::Inner => self.near.gradient(u),
            Shell::Annulus => self.phi.gradient(u),
            Shell::Outer => self.far.gradient(u),
            Shell::InnerBlend | Shell::OuterBlend => {
                let (n, w0, w1) = self.weights(u);
                let p = self.p.p;
                let g_phi = self.phi.gradient(u);
                let g_near = self.near.gradient(u);
                let g_far = self.far.gradient(u);
                // d‖u‖ = (1/p) E^{1/p - 1} dE
                let e = grad_seminorm_energy(u, &self.p);
                let g_e = energy_gradient(u, &self.p);
                let dn_scale = if e > T::zero() { n / (p * e) } else { T::zero() };
                let d0 = self.spec.cutoff_inner.derivative(n / self.spec.rho) / self.spec.rho;
                let d1 = self.spec.cutoff_outer.derivative(n / self.spec.big_r) / self.spec.big_r;
                let psi0 = self.psi0(u);
                let psi = self.psi(u);
                let values = (0..u.len())
                    .map(|i| {
                        let gp = g_phi.values()[i];
                        let dpsi0 = gp - g_near.values()[i];
                        let dpsi = gp - g_far.values()[i];
                        let dn = dn_scale * g_e[i];
                        gp - w0 * dpsi0 - psi0 * d0 * dn - w1 * dpsi - psi * d1 * dn
                    })
                    .collect();
                Field::from_raw(*u.domain(), values)
            }
        }
    }

    fn hessian(&self, u: &Field<T>) -> Option<Tridiagonal<T>> {
        match self.shell(u) {
            Shell::Inner => self.near.hessian(u),
            Shell::Annulus => self.phi.hessian(u),
            Shell::Outer => self.far.hessian(u),
            Shell::InnerBlend | Shell::OuterBlend => None,
        }
    }

    fn exponent(&self) -> Exponent<T> {
        self.p
    }

    fn tag(&self) -> &str {
        "PhiTilde"
    }
}

/// Fraction of `λ1` below which a point counts as resonant.
pub const RESONANCE_FRACTION: f64 = 0.02;

/// Builds `Φ̃` after checking that both asymptotic pairs stay away from the
/// computed spectrum.
pub fn build_phi_tilde<T: Real>(
    f: &Nonlinearity<T>,
    spec: PerturbationSpec<T>,
    spectrum: &SpectrumData<T>,
) -> Result<PerturbedFunctional<T>> {
    spec.validate()?;
    let tolerance = T::lit(RESONANCE_FRACTION) * spectrum.lambda1;
    for ab in [f.ab0(), f.ab()] {
        let distance = spectrum.distance_to_spectrum(ab.a, ab.b);
        if distance < tolerance {
            return Err(Error::NearSpectrum {
                a: ab.a.as_f64(),
                b: ab.b.as_f64(),
                distance: distance.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
    }
    PerturbedFunctional::new(f, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{lp_integral, Domain};
    use crate::sphere::normalize;
    use crate::testutil::{fd_check, random_field, smooth_random_field};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dom(n: usize) -> Domain<f64> {
        Domain::<f64>::unit(n).unwrap()
    }

    #[test]
    fn zero_field_gives_zero_functionals_and_gradients() {
        let d = dom(20);
        let u = Field::zeros(d);
        let p = Exponent::<f64>::new(1.5).unwrap();
        let ab = FucikParams::new(3.0, 7.0).unwrap();
        assert_eq!(eval_i(&u, ab, &p), 0.0);
        assert!(grad_i(&u, ab, &p).is_zero());
        let f = Nonlinearity::model(FucikParams::new(5.0, 5.0).unwrap(), ab, p, 0.5, 2.0).unwrap();
        assert_eq!(eval_phi(&u, &f), 0.0);
    }

    #[test]
    fn gradients_match_central_differences_p2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = dom(30);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let ab = FucikParams::new(12.0, 4.0).unwrap();
        let f = Nonlinearity::model(FucikParams::new(45.0, 40.0).unwrap(), ab, p, 0.5, 2.0).unwrap();
        let funcs: Vec<Box<dyn Functional<f64>>> = vec![
            Box::new(fucik_functional(ab, p)),
            Box::new(shifted_functional(ShiftParam::new(10.0).unwrap(), p)),
            Box::new(phi_functional(&f)),
            Box::new(phi_signed_functional(&f, Sign::Positive)),
            Box::new(phi_signed_functional(&f, Sign::Negative)),
        ];
        for func in &funcs {
            for _ in 0..10 {
                let u = random_field(&mut rng, d, 2.0);
                let v = random_field(&mut rng, d, 1.0);
                let rel = fd_check(func.as_ref(), &u, &v, 1e-6);
                assert!(rel <= 1e-5, "{}: {rel}", func.tag());
            }
        }
    }

    #[test]
    fn gradients_match_central_differences_p15() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = dom(30);
        let p = Exponent::<f64>::new(1.5).unwrap();
        let ab = FucikParams::new(12.0, 4.0).unwrap();
        let func = fucik_functional(ab, p);
        for _ in 0..10 {
            let u = random_field(&mut rng, d, 2.0);
            let v = random_field(&mut rng, d, 1.0);
            assert!(fd_check(&func, &u, &v, 1e-6) <= 1e-3);
        }
    }

    #[test]
    fn restriction_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = dom(40);
        for &pp in &[1.5, 2.0, 3.0] {
            let p = Exponent::<f64>::new(pp).unwrap();
            for _ in 0..10 {
                let w = normalize(&smooth_random_field(&mut rng, d), &p).unwrap();
                let ab = FucikParams::new(30.0, 12.0).unwrap();
                let lhs = eval_i(w.field(), ab, &p);
                let rhs = eval_jtilde(w.field(), ShiftParam::new(18.0).unwrap(), &p).unwrap() - 12.0;
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn jtilde_rejects_off_sphere() {
        let d = dom(10);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let u = Field::interpolate(d, |x| x * (1.0 - x)).unwrap();
        assert!(matches!(
            eval_jtilde(&u, ShiftParam::new(1.0).unwrap(), &p),
            Err(Error::OffSphere { .. })
        ));
    }

    #[test]
    fn pure_fucik_nonlinearity_reproduces_i() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = dom(25);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let ab = FucikParams::new(7.0, 3.0).unwrap();
        let f = Nonlinearity::model(ab, ab, p, 0.5, 2.0).unwrap();
        for _ in 0..10 {
            let u = random_field(&mut rng, d, 3.0);
            let a = eval_phi(&u, &f);
            let b = eval_i(&u, ab, &p);
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }

    #[test]
    fn signed_functionals_truncate() {
        let d = dom(25);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let f = Nonlinearity::model(
            FucikParams::new(5.0, 6.0).unwrap(),
            FucikParams::new(20.0, 21.0).unwrap(),
            p,
            0.5,
            2.0,
        )
        .unwrap();
        let up = Field::interpolate(d, |x| 3.0 * (std::f64::consts::PI * x).sin()).unwrap();
        assert_eq!(eval_phi_pm(&up, &f, Sign::Positive), eval_phi(&up, &f));
        let um = up.scaled(-1.0);
        assert_eq!(eval_phi_pm(&um, &f, Sign::Positive), grad_seminorm_energy(&um, &p));
        assert_eq!(eval_phi_pm(&um, &f, Sign::Negative), eval_phi(&um, &f));
    }

    #[test]
    fn psi_decomposition_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = dom(25);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let f = Nonlinearity::model(
            FucikParams::new(45.0, 45.0).unwrap(),
            FucikParams::new(5.0, 5.0).unwrap(),
            p,
            0.5,
            2.0,
        )
        .unwrap();
        let pf = PerturbedFunctional::new(&f, PerturbationSpec::new(0.1, 10.0).unwrap()).unwrap();
        for _ in 0..20 {
            let u = random_field(&mut rng, d, 3.0);
            let phi = eval_phi(&u, &f);
            let via0 = eval_i(&u, f.ab0(), &p) + pf.psi0(&u);
            let via = eval_i(&u, f.ab(), &p) + pf.psi(&u);
            assert!((phi - via0).abs() <= 1e-12 * phi.abs().max(1.0));
            assert!((phi - via).abs() <= 1e-12 * phi.abs().max(1.0));
        }
    }

    #[test]
    fn perturbed_functional_matches_in_plateaus() {
        let d = dom(40);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let f = Nonlinearity::model(
            FucikParams::new(45.0, 45.0).unwrap(),
            FucikParams::new(5.0, 5.0).unwrap(),
            p,
            0.5,
            2.0,
        )
        .unwrap();
        let (rho, big_r) = (0.4, 20.0);
        let pf = PerturbedFunctional::new(&f, PerturbationSpec::new(rho, big_r).unwrap()).unwrap();
        let shape = Field::interpolate(d, |x| (3.0 * x).sin() * x * (1.0 - x) - 0.1 * x).unwrap();
        let unit = shape.scaled(1.0 / seminorm(&shape, &p));

        let u = unit.scaled(rho / 4.0);
        assert_eq!(pf.shell(&u), Shell::Inner);
        assert_eq!(pf.value(&u), eval_i(&u, f.ab0(), &p));

        let u = unit.scaled((rho + big_r) / 2.0);
        assert_eq!(pf.shell(&u), Shell::Annulus);
        assert_eq!(pf.value(&u), eval_phi(&u, &f));

        let u = unit.scaled(3.0 * big_r);
        assert_eq!(pf.shell(&u), Shell::Outer);
        assert_eq!(pf.value(&u), eval_i(&u, f.ab(), &p));
    }

    #[test]
    fn perturbed_gradient_in_blend_shells() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let d = dom(30);
        let p = Exponent::<f64>::new(2.0).unwrap();
        let f = Nonlinearity::model(
            FucikParams::new(45.0, 45.0).unwrap(),
            FucikParams::new(5.0, 5.0).unwrap(),
            p,
            0.5,
            2.0,
        )
        .unwrap();
        let (rho, big_r) = (2.0, 8.0);
        let pf = PerturbedFunctional::new(&f, PerturbationSpec::new(rho, big_r).unwrap()).unwrap();
        for (lo, hi, shell) in [
            (0.55 * rho, 0.95 * rho, Shell::InnerBlend),
            (1.05 * big_r, 1.95 * big_r, Shell::OuterBlend),
        ] {
            for k in 0..10 {
                let base = smooth_random_field(&mut rng, d);
                let target = lo + (hi - lo) * (k as f64 + 0.5) / 10.0;
                let u = base.scaled(target / seminorm(&base, &p));
                assert_eq!(pf.shell(&u), shell);
                let v = random_field(&mut rng, d, 1.0);
                assert!(fd_check(&pf, &u, &v, 1e-6) <= 1e-4);
            }
        }
    }

    #[test]
    fn perturbation_spec_validation_and_json() {
        assert!(PerturbationSpec::new(1.0, 1.0).is_err());
        assert!(PerturbationSpec::new(2.0, 1.0).is_err());
        let s = PerturbationSpec::new(0.25, 4.0).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"R\":4.0"));
        let back: PerturbationSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn cutoffs_are_monotone_c1_plateaus() {
        let inner = CutoffProfile::SmoothstepInner;
        let outer = CutoffProfile::SmoothstepOuter;
        let mut prev_i = 1.0f64;
        let mut prev_o = 0.0f64;
        for k in 0..=300 {
            let t = k as f64 / 100.0;
            let vi: f64 = inner.value(t);
            let vo: f64 = outer.value(t);
            assert!(vi <= prev_i && vo >= prev_o && (0.0..=1.0).contains(&vi) && (0.0..=1.0).contains(&vo));
            prev_i = vi;
            prev_o = vo;
            let fd_i = (inner.value(t + 1e-7) - inner.value(t - 1e-7)) / 2e-7;
            assert!((fd_i - inner.derivative(t)).abs() < 1e-5);
            let fd_o = (outer.value(t + 1e-7) - outer.value(t - 1e-7)) / 2e-7;
            assert!((fd_o - outer.derivative(t)).abs() < 1e-5);
        }
        assert_eq!(inner.value(0.5f64), 1.0);
        assert_eq!(inner.value(1.0f64), 0.0);
        assert_eq!(outer.value(1.0f64), 0.0);
        assert_eq!(outer.value(2.0f64), 1.0);
    }

    #[test]
    fn shift_rejects_negative() {
        assert!(ShiftParam::new(-1.0f64).is_err());
    }

    #[test]
    fn potential_hessian_matches_gradient_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = dom(15);
        let p = Exponent::<f64>::new(2.5).unwrap();
        let func = fucik_functional(FucikParams::new(9.0, 2.0).unwrap(), p);
        let u = random_field(&mut rng, d, 1.0);
        let v = random_field(&mut rng, d, 1.0);
        let hv = func.hessian(&u).unwrap().matvec(v.values());
        let delta = 1e-6;
        let gp = func.gradient(&u.plus_scaled(delta, &v));
        let gm = func.gradient(&u.plus_scaled(-delta, &v));
        for i in 0..15 {
            let fd = (gp.values()[i] - gm.values()[i]) / (2.0 * delta);
            assert!((fd - hv[i]).abs() <= 1e-5 * hv[i].abs().max(1.0));
        }
    }

    #[test]
    fn lp_mass_gradient_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = dom(15);
        let p = Exponent::<f64>::new(1.7).unwrap();
        let u = random_field(&mut rng, d, 1.0);
        let v = random_field(&mut rng, d, 1.0);
        let g = potential_gradient(&u, &LpMass { p: p.p });
        let dd: f64 = g.iter().zip(v.values()).map(|(a, b)| a * b).sum();
        let delta = 1e-6;
        let fd =
            (lp_integral(&u.plus_scaled(delta, &v), &p) - lp_integral(&u.plus_scaled(-delta, &v), &p)) / (2.0 * delta);
        assert!((fd - dd).abs() <= 1e-6 * dd.abs().max(1.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn fucik_functional_is_p_homogeneous(
                vals in proptest::collection::vec(-3.0f64..3.0, 16),
                t in 0.1f64..5.0,
                pp in 2.0f64..4.0,
                a in -20.0f64..40.0,
                b in -20.0f64..40.0,
            ) {
                let d = Domain::<f64>::unit(16).unwrap();
                let u = Field::new(d, vals).unwrap();
                let p = Exponent::with_regularization(pp, 0.0).unwrap();
                let ab = FucikParams::new(a, b).unwrap();
                let lhs = eval_i(&u.scaled(t), ab, &p);
                let rhs = t.powf(pp) * eval_i(&u, ab, &p);
                let scale = t.powf(pp) * (grad_seminorm_energy(&u, &p) + (a.abs() + b.abs()) * lp_integral(&u, &p)).max(1e-300);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
                let gl = grad_i(&u.scaled(t), ab, &p);
                let gr = grad_i(&u, ab, &p).scaled(t.powf(pp - 1.0));
                prop_assert!(gl.max_abs_diff(&gr) <= 1e-11 * gr.max_abs().max(1.0) * t.powf(pp - 1.0).max(1.0));
            }
        }
    }
}
