//! The unit `L^p` sphere, paths on it and the sign-collapsing path.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy::{
    eval_j, fucik_functional, grad_i, potential_gradient, residual_norm, FucikParams, Functional, LpMass, ShiftParam,
};
use crate::error::{Error, Result};
use crate::grid::{lp_integral, lp_norm, negative_part, positive_part, Exponent, Field};
use crate::scalar::Real;

/// Interpolants with a smaller pre-normalization norm are rejected.
pub const INTERPOLATION_GUARD: f64 = 0.1;

/// A field with unit `L^p` norm (to `1e-10`, or the type's precision floor).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SphereSpec<T>", into = "SphereSpec<T>")]
#[serde(bound = "T: Real")]
pub struct SpherePoint<T: Real> {
    field: Field<T>,
    p: Exponent<T>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct SphereSpec<T> {
    p: Exponent<T>,
    field: Field<T>,
}

impl<T: Real> TryFrom<SphereSpec<T>> for SpherePoint<T> {
    type Error = Error;
    fn try_from(s: SphereSpec<T>) -> Result<Self> {
        SpherePoint::new(s.field, s.p)
    }
}

impl<T: Real> From<SpherePoint<T>> for SphereSpec<T> {
    fn from(s: SpherePoint<T>) -> Self {
        SphereSpec { p: s.p, field: s.field }
    }
}

pub fn sphere_tolerance<T: Real>() -> T {
    T::tol_floor(1e-10)
}

impl<T: Real> SpherePoint<T> {
    /// Accepts `field` only if it already lies on the sphere.
    pub fn new(field: Field<T>, p: Exponent<T>) -> Result<Self> {
        let deviation = (lp_norm(&field, &p) - T::one()).abs();
        if !(deviation <= sphere_tolerance()) {
            return Err(Error::OffSphere {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self { field, p })
    }

    pub fn field(&self) -> &Field<T> {
        &self.field
    }

    pub fn into_field(self) -> Field<T> {
        self.field
    }

    pub fn exponent(&self) -> &Exponent<T> {
        &self.p
    }

    pub fn negated(&self) -> Self {
        Self {
            field: self.field.scaled(-T::one()),
            p: self.p,
        }
    }

    /// `J̃_s` at this point.
    pub fn jtilde(&self, s: ShiftParam<T>) -> T {
        eval_j(&self.field, s, &self.p)
    }
}

/// `u / ‖u‖_p`.
pub fn normalize<T: Real>(u: &Field<T>, p: &Exponent<T>) -> Result<SpherePoint<T>> {
    let n = lp_norm(u, p);
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::Degenerate("cannot normalize a zero field".into()));
    }
    Ok(SpherePoint {
        field: u.scaled(n.recip()),
        p: *p,
    })
}

/// Outward normal of the constraint `∫ |w|^p = 1` in nodal coordinates.
pub fn constraint_normal<T: Real>(w: &Field<T>, p: &Exponent<T>) -> Field<T> {
    Field::from_raw(*w.domain(), potential_gradient(w, &LpMass { p: p.p }))
}

/// Removes from `g` its component along the constraint normal at `w`.
pub fn tangent_project<T: Real>(w: &SpherePoint<T>, g: &Field<T>) -> Field<T> {
    let n = constraint_normal(w.field(), w.exponent());
    let nn = n.dot(&n);
    if nn == T::zero() {
        return g.clone();
    }
    g.plus_scaled(-g.dot(&n) / nn, &n)
}

/// `normalize(w + v)`
pub fn retract<T: Real>(w: &SpherePoint<T>, v: &Field<T>) -> Result<SpherePoint<T>> {
    normalize(&w.field().plus_scaled(T::one(), v), w.exponent())
        .map_err(|_| Error::Degenerate("retraction step annihilates the field".into()))
}

/// Scale-invariant extension `J_s(u) / ∫|u|^p` of `J̃_s`.
pub fn rayleigh<T: Real>(u: &Field<T>, s: ShiftParam<T>, p: &Exponent<T>) -> T {
    eval_j(u, s, p) / lp_integral(u, p)
}

/// Value and gradient of [`rayleigh`]. On the sphere the gradient equals
/// `grad_I(w, (s + c, c))` with `c = J̃_s(w)`, and is orthogonal to `w`.
pub fn rayleigh_gradient<T: Real>(u: &Field<T>, s: ShiftParam<T>, p: &Exponent<T>) -> (T, Field<T>) {
    let m = lp_integral(u, p);
    let c = eval_j(u, s, p) / m;
    let g = grad_i(u, FucikParams { a: s.value() + c, b: c }, p);
    (c, g.scaled(m.recip()))
}

/// Sphere residual `‖grad_I(w, (s + c, c))‖` in the dual norm.
pub fn sphere_residual<T: Real>(w: &SpherePoint<T>, s: ShiftParam<T>) -> T {
    residual_norm(&rayleigh_gradient(w.field(), s, w.exponent()).1)
}

/// Normalized chord `normalize((1 - t) a + t b)`, rejected when the chord
/// passes too close to the origin.
pub fn chordal_interpolate<T: Real>(a: &SpherePoint<T>, b: &SpherePoint<T>, t: T) -> Result<SpherePoint<T>> {
    let z = a.field().scaled(T::one() - t).plus_scaled(t, b.field());
    let n = lp_norm(&z, a.exponent());
    if n < T::lit(INTERPOLATION_GUARD) {
        return Err(Error::Degenerate(format!(
            "interpolant norm {n} below guard {INTERPOLATION_GUARD}"
        )));
    }
    normalize(&z, a.exponent())
}

/// Ordered beads on the sphere, at least two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Path<T: Real> {
    beads: Vec<SpherePoint<T>>,
}

impl<T: Real> Path<T> {
    pub fn new(beads: Vec<SpherePoint<T>>) -> Result<Self> {
        if beads.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a path needs at least 2 beads, got {}",
                beads.len()
            )));
        }
        Ok(Self { beads })
    }

    pub fn beads(&self) -> &[SpherePoint<T>] {
        &self.beads
    }

    pub fn len(&self) -> usize {
        self.beads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beads.is_empty()
    }

    pub fn values(&self, s: ShiftParam<T>) -> Vec<T> {
        self.beads.iter().map(|b| b.jtilde(s)).collect()
    }

    /// Lowest index attaining the maximum of `J̃_s`, and that maximum.
    pub fn argmax(&self, s: ShiftParam<T>) -> (usize, T) {
        argmax_first(&self.values(s))
    }

    /// CSV rows `bead,t,value,grad_norm`.
    pub fn write_csv<W: Write>(&self, out: W, s: ShiftParam<T>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bead", "t", "value", "grad_norm"])?;
        let last = (self.beads.len() - 1) as f64;
        for (k, b) in self.beads.iter().enumerate() {
            w.write_record([
                k.to_string(),
                (k as f64 / last).to_string(),
                b.jtilde(s).to_string(),
                sphere_residual(b, s).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First index of the maximum; NaN entries never win.
pub(crate) fn argmax_first<T: Real>(values: &[T]) -> (usize, T) {
    let mut best = (0, T::neg_infinity());
    for (k, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// `u_t = normalize(u0+ - (1 - t) u0-)` on `steps + 1` uniform values of `t`.
pub fn sign_path<T: Real>(u0: &SpherePoint<T>, steps: usize) -> Result<Path<T>> {
    let plus = positive_part(u0.field());
    if plus.is_zero() {
        return Err(Error::EmptyPositivePart);
    }
    let minus = negative_part(u0.field());
    if minus.is_zero() {
        return Path::new(vec![u0.clone(); steps.max(1) + 1]);
    }
    let steps = steps.max(1);
    let beads = (0..=steps)
        .map(|k| {
            if k == 0 {
                return Ok(u0.clone());
            }
            let t = T::lit(k as f64 / steps as f64);
            normalize(&plus.plus_scaled(-(T::one() - t), &minus), u0.exponent())
        })
        .collect::<Result<Vec<_>>>()?;
    Path::new(beads)
}

/// Allowed deviation of `J̃_s` along [`sign_path`] from the critical value
/// `d` at `u0`: `1e-4 |d|` plus a bound assembled only from defects that
/// vanish off sign-changing elements, evaluated at the `steps + 1` path
/// parameters.
///
/// With `v = u0+ - τ u0-`, `J = E - s P`, `N = ∫ |u|^p`:
/// `J(v) - d N(v)` splits into the splitting errors of `E`, `P`, `N` at `v`
/// and the terms `J(u0+) - d N(u0+)`, `E(τ u0-) - d N(τ u0-)`. The last two
/// are bounded by testing the critical-point equation with `u0±`, where the
/// exact Euler identities `<∇E(u), u+> = p E(u+)` (and the analogues for
/// `P`, `N`, `u-`) fail only on sign-changing elements.
pub fn sign_path_allowance<T: Real>(u0: &SpherePoint<T>, s: ShiftParam<T>, d: T, steps: usize) -> T {
    let p = *u0.exponent();
    let pp = p.p;
    let sv = s.value();
    let energy = fucik_functional(
        FucikParams {
            a: T::zero(),
            b: T::zero(),
        },
        p,
    );
    let shifted = fucik_functional(
        FucikParams {
            a: T::one(),
            b: T::zero(),
        },
        p,
    );
    let massed = fucik_functional(
        FucikParams {
            a: T::one(),
            b: T::one(),
        },
        p,
    );
    let e = |u: &Field<T>| energy.value(u);
    let pos = |u: &Field<T>| energy.value(u) - shifted.value(u);
    let mass = |u: &Field<T>| lp_integral(u, &p);

    let u = u0.field();
    let (plus, minus) = (positive_part(u), negative_part(u));
    let ge = energy.gradient(u);
    let gp = ge.sub(&shifted.gradient(u));
    let gn = ge.sub(&massed.gradient(u));
    let residual = ge.plus_scaled(-sv, &gp).plus_scaled(-d, &gn);
    let test = |g: &Field<T>, w: &Field<T>| g.dot(w) / pp;

    let t_plus = (test(&ge, &plus) - e(&plus)).abs()
        + sv * (test(&gp, &plus) - pos(&plus)).abs()
        + d.abs() * (test(&gn, &plus) - mass(&plus)).abs()
        + test(&residual, &plus).abs();
    let t_minus = (test(&ge, &minus) + e(&minus)).abs()
        + sv * test(&gp, &minus).abs()
        + d.abs() * (test(&gn, &minus) + mass(&minus)).abs()
        + test(&residual, &minus).abs();

    let steps = steps.max(1);
    let mut worst = T::zero();
    for k in 0..=steps {
        let tau = T::one() - T::lit(k as f64 / steps as f64);
        let tail = minus.scaled(tau);
        let v = plus.sub(&tail);
        let n = mass(&v);
        if !(n > T::zero()) {
            continue;
        }
        let split = (e(&v) - e(&plus) - e(&tail)).abs()
            + sv * (pos(&v) - pos(&plus)).abs()
            + d.abs() * (n - mass(&plus) - mass(&tail)).abs();
        let scaling =
            (e(&tail) - tau.powf(pp) * e(&minus)).abs() + d.abs() * (mass(&tail) - tau.powf(pp) * mass(&minus)).abs();
        worst = worst.max((split + t_plus + tau.powf(pp) * t_minus + scaling) / n);
    }
    T::lit(1e-4) * d.abs() + worst
}

/// Normalized interpolant of `sin(2 pi x)` on the domain, a sign-changing
/// seed direction.
pub fn sign_changing_seed<T: Real>(phi: &SpherePoint<T>) -> Result<Field<T>> {
    let d = *phi.field().domain();
    let (l, len) = (d.left(), d.length());
    let two_pi = T::lit(2.0) * T::PI();
    let w = Field::interpolate(d, |x| (two_pi * (x - l) / len).sin())?;
    Ok(normalize(&w, phi.exponent())?.into_field())
}

/// `bead_k = normalize(cos θ_k φ + sin θ_k w)` for `θ_k` uniform in
/// `[0, π]`; the endpoints are exactly `φ` and `-φ`.
pub fn initial_path<T: Real>(phi: &SpherePoint<T>, beads: usize, seed: Option<&Field<T>>) -> Result<Path<T>> {
    if beads < 2 {
        return Err(Error::InvalidInput("initial path needs at least 2 beads".into()));
    }
    let w = match seed {
        Some(w) => normalize(w, phi.exponent())?.into_field(),
        None => sign_changing_seed(phi)?,
    };
    let last = beads - 1;
    let out = (0..beads)
        .map(|k| {
            if k == 0 {
                return Ok(phi.clone());
            }
            if k == last {
                return Ok(phi.negated());
            }
            let theta = T::PI() * T::lit(k as f64 / last as f64);
            normalize(
                &phi.field().scaled(theta.cos()).plus_scaled(theta.sin(), &w),
                phi.exponent(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Path::new(out)
}
