//! Uniform P1 discretization of an interval with homogeneous Dirichlet data.
//!
//! Unknowns are the values at the `n_interior` interior nodes; the two
//! boundary nodes are implicit zeros. Integrals of nonlinear point functions
//! use 3-point Gauss quadrature per element, gradient terms are exact since
//! slopes are constant on each element.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{abs_pow, neg, pos, Real};

/// Gauss–Legendre nodes and weights on the reference element `[0, 1]`.
pub(crate) const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec<T>", into = "DomainSpec<T>")]
#[serde(bound = "T: Real")]
pub struct Domain<T> {
    left: T,
    right: T,
    n_interior: usize,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct DomainSpec<T> {
    left: T,
    right: T,
    n_interior: usize,
}

impl<T: Real> TryFrom<DomainSpec<T>> for Domain<T> {
    type Error = Error;
    fn try_from(s: DomainSpec<T>) -> Result<Self> {
        Domain::new(s.left, s.right, s.n_interior)
    }
}

impl<T: Real> From<Domain<T>> for DomainSpec<T> {
    fn from(d: Domain<T>) -> Self {
        DomainSpec {
            left: d.left,
            right: d.right,
            n_interior: d.n_interior,
        }
    }
}

impl<T: Real> Domain<T> {
    pub fn new(left: T, right: T, n_interior: usize) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || right <= left {
            return Err(Error::InvalidInput(format!(
                "domain needs finite left < right, got ({left}, {right})"
            )));
        }
        if n_interior == 0 {
            return Err(Error::InvalidInput("domain needs at least one interior node".into()));
        }
        Ok(Self {
            left,
            right,
            n_interior,
        })
    }

    /// `(0, 1)` with `n_interior` unknowns.
    pub fn unit(n_interior: usize) -> Result<Self> {
        Self::new(T::zero(), T::one(), n_interior)
    }

    pub fn left(&self) -> T {
        self.left
    }

    pub fn right(&self) -> T {
        self.right
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_elements(&self) -> usize {
        self.n_interior + 1
    }

    pub fn length(&self) -> T {
        self.right - self.left
    }

    /// Mesh width.
    pub fn h(&self) -> T {
        self.length() / T::lit(self.n_elements() as f64)
    }

    /// Coordinate of interior node `i` (0-based).
    pub fn node(&self, i: usize) -> T {
        self.left + self.h() * T::lit((i + 1) as f64)
    }

    /// All node coordinates including both boundary nodes.
    pub fn all_nodes(&self) -> Vec<T> {
        (0..=self.n_elements())
            .map(|k| self.left + self.h() * T::lit(k as f64))
            .collect()
    }
}

/// Integrability exponent together with the gradient regularization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Exponent<T> {
    pub p: T,
    pub eps_reg: T,
}

impl<T: Real> Exponent<T> {
    /// Default regularization: none for `p >= 2`, `1e-8` (unit characteristic
    /// slope) below.
    pub fn new(p: T) -> Result<Self> {
        let eps = if p >= T::lit(2.0) { T::zero() } else { T::lit(1e-8) };
        Self::with_regularization(p, eps)
    }

    pub fn with_regularization(p: T, eps_reg: T) -> Result<Self> {
        if !p.is_finite() || p <= T::one() {
            return Err(Error::InvalidInput(format!(
                "exponent must satisfy 1 < p < inf, got {p}"
            )));
        }
        if !eps_reg.is_finite() || eps_reg < T::zero() {
            return Err(Error::InvalidInput(format!("eps_reg must be >= 0, got {eps_reg}")));
        }
        if eps_reg == T::zero() && p < T::lit(2.0) {
            return Err(Error::InvalidInput("eps_reg = 0 requires p >= 2".into()));
        }
        Ok(Self { p, eps_reg })
    }

    /// Regularized element density `(s^2 + eps^2)^{p/2} - eps^p`.
    #[inline]
    pub(crate) fn density(&self, slope: T) -> T {
        if self.eps_reg == T::zero() {
            abs_pow(slope, self.p)
        } else {
            let two = T::lit(2.0);
            (slope * slope + self.eps_reg * self.eps_reg).powf(self.p / two) - self.eps_reg.powf(self.p)
        }
    }

    /// Derivative of [`Self::density`]: `p (s^2 + eps^2)^{(p-2)/2} s`.
    #[inline]
    pub(crate) fn density_prime(&self, slope: T) -> T {
        if slope == T::zero() {
            return T::zero();
        }
        let two = T::lit(2.0);
        if self.eps_reg == T::zero() {
            self.p * abs_pow(slope, self.p - two) * slope
        } else {
            self.p * (slope * slope + self.eps_reg * self.eps_reg).powf((self.p - two) / two) * slope
        }
    }

    /// Second derivative of [`Self::density`], floored at a small positive
    /// value so it can serve as a preconditioner weight.
    #[inline]
    pub(crate) fn density_second(&self, slope: T) -> T {
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let e2 = self.eps_reg * self.eps_reg;
        let s2 = slope * slope;
        let q = s2 + e2;
        if q == T::zero() {
            // p >= 2 with a flat element
            return if self.p == two { two } else { T::zero() };
        }
        self.p * q.powf((self.p - four) / two) * ((self.p - T::one()) * s2 + e2)
    }
}

/// Nodal coefficients of a continuous piecewise-linear function that vanishes
/// on the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Field<T> {
    domain: Domain<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(domain: Domain<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.n_interior() {
            return Err(Error::LengthMismatch {
                expected: domain.n_interior(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { domain, values })
    }

    /// Skips validation; callers guarantee length and finiteness.
    pub(crate) fn from_raw(domain: Domain<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), domain.n_interior());
        Self { domain, values }
    }

    pub fn zeros(domain: Domain<T>) -> Self {
        Self::from_raw(domain, vec![T::zero(); domain.n_interior()])
    }

    /// Nodal interpolant of `g` at the interior nodes.
    pub fn interpolate(domain: Domain<T>, g: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..domain.n_interior()).map(|i| g(domain.node(i))).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_raw(self.domain, self.values.iter().map(|&v| v * c).collect())
    }

    /// `self + alpha * other`
    pub fn plus_scaled(&self, alpha: T, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a + alpha * b)
            .collect();
        Self::from_raw(self.domain, values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.plus_scaled(-T::one(), other)
    }

    pub fn dot(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }

    /// Values at the endpoints of element `e`, boundary zeros included.
    #[inline]
    pub(crate) fn element_ends(&self, e: usize) -> (T, T) {
        let n = self.values.len();
        let left = if e == 0 { T::zero() } else { self.values[e - 1] };
        let right = if e == n { T::zero() } else { self.values[e] };
        (left, right)
    }

    /// Slope on element `e`.
    #[inline]
    pub(crate) fn slope(&self, e: usize) -> T {
        let (l, r) = self.element_ends(e);
        (r - l) / self.domain.h()
    }

    pub fn max_abs_slope(&self) -> T {
        (0..self.domain.n_elements()).fold(T::zero(), |m, e| m.max(self.slope(e).abs()))
    }

    /// Number of elements on which the function changes sign strictly.
    pub fn sign_changes(&self) -> usize {
        (0..self.domain.n_elements())
            .filter(|&e| {
                let (l, r) = self.element_ends(e);
                l * r < T::zero()
            })
            .count()
    }

    /// Writes `x,u` per node including boundary zeros.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "u"])?;
        let xs = self.domain.all_nodes();
        let last = xs.len() - 1;
        for (k, x) in xs.iter().enumerate() {
            let u = if k == 0 || k == last {
                T::zero()
            } else {
                self.values[k - 1]
            };
            w.write_record([x.to_string(), u.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Quadrature of `g(u(x))` over the domain.
pub fn integrate_pointwise<T: Real>(u: &Field<T>, g: impl Fn(T) -> T) -> T {
    let h = u.domain().h();
    let mut total = T::zero();
    for e in 0..u.domain().n_elements() {
        let (l, r) = u.element_ends(e);
        let mut acc = T::zero();
        for &(xi, w) in &GAUSS3 {
            let xi = T::lit(xi);
            acc = acc + T::lit(w) * g(l + (r - l) * xi);
        }
        total = total + h * acc;
    }
    total
}

/// `∫ |u|^p`.
pub fn lp_integral<T: Real>(u: &Field<T>, p: &Exponent<T>) -> T {
    integrate_pointwise(u, |t| abs_pow(t, p.p))
}

/// `(∫ |u|^p)^{1/p}`
pub fn lp_norm<T: Real>(u: &Field<T>, p: &Exponent<T>) -> T {
    let m = lp_integral(u, p);
    if m == T::zero() {
        T::zero()
    } else {
        m.powf(p.p.recip())
    }
}

/// `Σ_e h [(|slope|^2 + eps^2)^{p/2} - eps^p]`, the discrete `∫ |∇u|^p`.
pub fn grad_seminorm_energy<T: Real>(u: &Field<T>, p: &Exponent<T>) -> T {
    let h = u.domain().h();
    (0..u.domain().n_elements()).map(|e| h * p.density(u.slope(e))).sum()
}

/// Discrete `W^{1,p}_0` seminorm, `grad_seminorm_energy^{1/p}`.
pub fn seminorm<T: Real>(u: &Field<T>, p: &Exponent<T>) -> T {
    let e = grad_seminorm_energy(u, p);
    if e <= T::zero() {
        T::zero()
    } else {
        e.powf(p.p.recip())
    }
}

/// Discrete `H^1_0` seminorm, used as the arclength metric for paths.
pub fn h1_seminorm<T: Real>(u: &Field<T>) -> T {
    let h = u.domain().h();
    (0..u.domain().n_elements())
        .map(|e| {
            let s = u.slope(e);
            h * s * s
        })
        .sum::<T>()
        .sqrt()
}

/// Nodal positive part `max(u_i, 0)`.
pub fn positive_part<T: Real>(u: &Field<T>) -> Field<T> {
    Field::from_raw(*u.domain(), u.values().iter().map(|&v| pos(v)).collect())
}

/// Nodal negative part `max(-u_i, 0)`.
pub fn negative_part<T: Real>(u: &Field<T>) -> Field<T> {
    Field::from_raw(*u.domain(), u.values().iter().map(|&v| neg(v)).collect())
}

/// `|E(u) - E(u+) - E(u-)|` with nodal splitting; nonzero only on
/// sign-changing elements.
pub fn energy_splitting_defect<T: Real>(u: &Field<T>, p: &Exponent<T>) -> T {
    let whole = grad_seminorm_energy(u, p);
    let split = grad_seminorm_energy(&positive_part(u), p) + grad_seminorm_energy(&negative_part(u), p);
    (whole - split).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn exact_boundary_element(p: f64, h: f64) -> f64 {
        // ∫_0^h (x/h)^p dx
        h / (p + 1.0)
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let d = Domain::<f64>::unit(17).unwrap();
        let u = Field::zeros(d);
        let p = Exponent::<f64>::new(1.5).unwrap();
        assert_eq!(lp_norm(&u, &p), 0.0);
        assert_eq!(grad_seminorm_energy(&u, &p), 0.0);
    }

    #[test]
    fn constant_interpolant_matches_elementwise_closed_form() {
        for &pp in &[2.0, 3.0, 4.0] {
            let d = Domain::<f64>::unit(40).unwrap();
            let u = Field::interpolate(d, |_| 1.0).unwrap();
            let p = Exponent::<f64>::new(pp).unwrap();
            let h = d.h();
            // interior elements integrate exactly to h, the two boundary
            // ramps to h/(p+1); Gauss-3 is exact for these polynomial degrees
            let expected = ((d.n_elements() - 2) as f64 * h + 2.0 * exact_boundary_element(pp, h)).powf(1.0 / pp);
            assert!((lp_norm(&u, &p) - expected).abs() <= 1e-12, "p = {pp}");
        }
        // non-integer p: Gauss error only on the two boundary ramps, about
        // 1.9e-4 h each for p = 1.5
        let d = Domain::<f64>::unit(40).unwrap();
        let u = Field::interpolate(d, |_| 1.0).unwrap();
        let p = Exponent::<f64>::new(1.5).unwrap();
        let h = d.h();
        let expected = ((d.n_elements() - 2) as f64 * h + 2.0 * exact_boundary_element(1.5, h)).powf(1.0 / 1.5);
        assert!((lp_norm(&u, &p) - expected).abs() <= 5e-4 * h);
    }

    #[test]
    fn sine_norm_and_energy_converge() {
        let d = Domain::<f64>::unit(400).unwrap();
        let u = Field::interpolate(d, |x| (PI * x).sin()).unwrap();
        let p = Exponent::<f64>::new(2.0).unwrap();
        assert!((lp_norm(&u, &p) - 0.5f64.sqrt()).abs() < 1e-5);
        assert!((grad_seminorm_energy(&u, &p) - PI * PI / 2.0).abs() < 1e-4);
    }

    #[test]
    fn hat_function_energy_is_exact() {
        // one interior node at the midpoint, slopes ±2 on halves
        let d = Domain::<f64>::unit(1).unwrap();
        let u = Field::new(d, vec![1.0]).unwrap();
        let p = Exponent::<f64>::new(3.0).unwrap();
        assert_eq!(grad_seminorm_energy(&u, &p), 8.0);
    }

    #[test]
    fn nodal_sign_split() {
        let d = Domain::<f64>::unit(3).unwrap();
        let u = Field::new(d, vec![1.0, -2.0, 3.0]).unwrap();
        assert_eq!(positive_part(&u).values(), &[1.0, 0.0, 3.0]);
        assert_eq!(negative_part(&u).values(), &[0.0, 2.0, 0.0]);
        let v = Field::new(d, vec![1.0, 0.5, 3.0]).unwrap();
        assert_eq!(positive_part(&v), v);
        assert!(negative_part(&v).is_zero());
    }

    #[test]
    fn splitting_defect_bounded_by_sign_changes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &pp in &[1.5, 2.0, 3.0] {
            let p = Exponent::<f64>::new(pp).unwrap();
            for n in [20usize, 80, 320] {
                let d = Domain::<f64>::unit(n).unwrap();
                let phase: f64 = rng.gen_range(0.0..1.0);
                let u = Field::interpolate(d, |x| (3.0 * PI * x + phase).sin() * x * (1.0 - x)).unwrap();
                let bound = u.sign_changes() as f64 * d.h() * u.max_abs_slope().powf(pp);
                assert!(energy_splitting_defect(&u, &p) <= bound * (1.0 + 1e-12) + 1e-9);
            }
        }
    }

    #[test]
    fn splitting_defect_first_order_in_h() {
        let p = Exponent::<f64>::new(2.0).unwrap();
        let defect = |n: usize| {
            let d = Domain::<f64>::unit(n).unwrap();
            // zero crossing at x = 0.3 + 1/(7 pi) avoids landing on a node
            let u = Field::interpolate(d, |x| (PI * (x - 0.3) - 1.0 / 7.0).sin() * (PI * x).sin()).unwrap();
            energy_splitting_defect(&u, &p)
        };
        let d1 = defect(99);
        let d2 = defect(199);
        let d3 = defect(399);
        assert!(d2 < d1 && d3 < d2);
        assert!(d3 < 1e-2);
    }

    #[test]
    fn domain_json_round_trip_and_validation() {
        let d = Domain::<f64>::new(-1.0, 2.0, 7).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"left":-1.0,"right":2.0,"n_interior":7}"#);
        let back: Domain<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        assert!(serde_json::from_str::<Domain<f64>>(r#"{"left":1.0,"right":0.0,"n_interior":3}"#).is_err());
    }

    #[test]
    fn field_validation() {
        let d = Domain::<f64>::unit(3).unwrap();
        assert!(matches!(Field::new(d, vec![0.0; 2]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(
            Field::new(d, vec![0.0, f64::NAN, 1.0]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn exponent_validation() {
        assert!(Exponent::<f64>::new(1.0).is_err());
        assert!(Exponent::<f64>::with_regularization(1.5, 0.0).is_err());
        assert!(Exponent::<f64>::with_regularization(2.5, 0.0).is_ok());
        assert_eq!(Exponent::<f64>::new(1.5).unwrap().eps_reg, 1e-8);
    }

    #[test]
    fn csv_includes_boundary_zeros() {
        let d = Domain::<f64>::unit(2).unwrap();
        let u = Field::new(d, vec![1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "0,0");
        assert_eq!(lines[4], "1,0");
    }

    #[test]
    fn generic_over_f32() {
        let d = Domain::<f32>::unit(100).unwrap();
        let u = Field::interpolate(d, |x| (std::f32::consts::PI * x).sin()).unwrap();
        let p = Exponent::new(2.0f32).unwrap();
        assert!((lp_norm(&u, &p) - 0.5f32.sqrt()).abs() < 1e-4);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn field_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(-5.0f64..5.0, n)
        }

        proptest! {
            #[test]
            fn clipping_is_one_lipschitz(a in field_strategy(12), b in field_strategy(12)) {
                let d = Domain::<f64>::unit(12).unwrap();
                let u = Field::new(d, a).unwrap();
                let v = Field::new(d, b).unwrap();
                let lhs = positive_part(&u).max_abs_diff(&positive_part(&v));
                prop_assert!(lhs <= u.max_abs_diff(&v));
                let lhs = negative_part(&u).max_abs_diff(&negative_part(&v));
                prop_assert!(lhs <= u.max_abs_diff(&v));
            }

            #[test]
            fn split_is_exact(a in field_strategy(12)) {
                let d = Domain::<f64>::unit(12).unwrap();
                let u = Field::new(d, a).unwrap();
                let up = positive_part(&u);
                let um = negative_part(&u);
                for i in 0..12 {
                    prop_assert_eq!(up.values()[i] - um.values()[i], u.values()[i]);
                    prop_assert_eq!(up.values()[i].min(um.values()[i]), 0.0);
                }
            }

            #[test]
            fn norm_and_energy_homogeneity(a in field_strategy(12), c in -4.0f64..4.0, pp in 2.0f64..4.0) {
                let d = Domain::<f64>::unit(12).unwrap();
                let u = Field::new(d, a).unwrap();
                let p = Exponent::<f64>::new(pp).unwrap();
                let lhs = lp_norm(&u.scaled(c), &p);
                let rhs = c.abs() * lp_norm(&u, &p);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
                let lhs = grad_seminorm_energy(&u.scaled(c), &p);
                let rhs = c.abs().powf(pp) * grad_seminorm_energy(&u, &p);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }
    }
}
