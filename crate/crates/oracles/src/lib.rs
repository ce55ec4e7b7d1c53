//! Reference values computed without the solver crate: a dense generalized
//! eigensolve of the P1 Dirichlet Laplacian, shooting for the 1D
//! p-Laplacian, and root-finds for the 1D Fucik relation.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// `π_p = 2π (p-1)^{1/p} / (p sin(π/p))`
pub fn pi_p(p: f64) -> f64 {
    2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin())
}

/// Eigenvalues of `K x = λ M x` for P1 elements with `n` interior nodes on
/// `(0, len)`, ascending.
pub fn dense_dirichlet_eigenvalues(n: usize, len: f64) -> Vec<f64> {
    let h = len / (n as f64 + 1.0);
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 2.0 / h;
        m[(i, i)] = 4.0 * h / 6.0;
        if i + 1 < n {
            k[(i, i + 1)] = -1.0 / h;
            k[(i + 1, i)] = -1.0 / h;
            m[(i, i + 1)] = h / 6.0;
            m[(i + 1, i)] = h / 6.0;
        }
    }
    let l = m.cholesky().expect("mass matrix is positive definite").l();
    let linv = l.clone().try_inverse().expect("triangular factor is invertible");
    let a = &linv * k * linv.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}

/// Closed form of the `k`-th P1 Dirichlet eigenvalue on `(0, 1)`.
pub fn discrete_p2_eigenvalue(n: usize, k: usize) -> f64 {
    let h = 1.0 / (n as f64 + 1.0);
    let t = (k as f64 * PI * h).cos();
    6.0 / (h * h) * (1.0 - t) / (2.0 + t)
}

fn phi(q: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(q - 2.0) * t
    }
}

/// First positive zero of the solution of `-(|u'|^{p-2} u')' = λ |u|^{p-2} u`,
/// `u(0) = 0`, `|u'|^{p-2} u'(0) = 1`, by RK4 on `(u, v = |u'|^{p-2} u')`.
pub fn half_wave_length(p: f64, lambda: f64) -> f64 {
    let q = p / (p - 1.0);
    let rhs = |u: f64, v: f64| (phi(q, v), -lambda * phi(p, u));
    // Scale invariance: the half-wave length is proportional to λ^{-1/p}.
    let guess = pi_p(p) / lambda.powf(1.0 / p);
    let steps = 200_000usize;
    let dx = 2.0 * guess / steps as f64;
    let (mut x, mut u, mut v) = (0.0f64, 0.0f64, 1.0f64);
    for _ in 0..steps {
        let (k1u, k1v) = rhs(u, v);
        let (k2u, k2v) = rhs(u + 0.5 * dx * k1u, v + 0.5 * dx * k1v);
        let (k3u, k3v) = rhs(u + 0.5 * dx * k2u, v + 0.5 * dx * k2v);
        let (k4u, k4v) = rhs(u + dx * k3u, v + dx * k3v);
        let un = u + dx / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        let vn = v + dx / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if x > 0.0 && un <= 0.0 {
            // Linear interpolation of the crossing inside the last step.
            return x + dx * u / (u - un);
        }
        x += dx;
        u = un;
        v = vn;
    }
    f64::NAN
}

/// Bisection for a decreasing function `g` on `[lo, hi]` with `g(lo) > 0 > g(hi)`.
fn bisect(mut lo: f64, mut hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `λ` whose first half-wave has length `len / k`, by shooting.
pub fn shooting_eigenvalue(p: f64, len: f64, k: usize) -> f64 {
    let target = len / k as f64;
    bisect(1e-3, 1e6, |l| half_wave_length(p, l) - target)
}

/// `c` with `π_p/(s+c)^{1/p} + π_p/c^{1/p} = len`, the upper branch of the
/// first nontrivial Fucik curve.
pub fn fucik_c(p: f64, len: f64, s: f64) -> f64 {
    let pp = pi_p(p);
    let lambda1 = (pp / len).powf(p);
    bisect(lambda1, 1e8, |c| {
        pp / (s + c).powf(1.0 / p) + pp / c.powf(1.0 / p) - len
    })
}

/// Same relation with both half-wave lengths from shooting.
pub fn fucik_c_shooting(p: f64, len: f64, s: f64) -> f64 {
    let lambda1 = shooting_eigenvalue(p, len, 1);
    bisect(lambda1, 1e6, |c| {
        half_wave_length(p, s + c) + half_wave_length(p, c) - len
    })
}

/// `|π/√a + π/√b - 1|`, the defect of the p = 2 relation on `(0, 1)`.
pub fn fucik_defect_p2(a: f64, b: f64) -> f64 {
    (PI / a.sqrt() + PI / b.sqrt() - 1.0).abs()
}
