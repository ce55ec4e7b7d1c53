//! Small direct solvers: tridiagonal systems (the Hessian structure of every
//! local P1 functional) and dense LU for bordered or finite-difference
//! Jacobians.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Tridiagonal<T> {
    /// `lower[i]` is entry `(i + 1, i)`
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    /// `upper[i]` is entry `(i, i + 1)`
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::zero(); n.saturating_sub(1)],
            diag: vec![T::zero(); n],
            upper: vec![T::zero(); n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `value` at `(i, j)`; `|i - j| <= 1`.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: T) {
        if i == j {
            self.diag[i] = self.diag[i] + value;
        } else if i == j + 1 {
            self.lower[j] = self.lower[j] + value;
        } else if j == i + 1 {
            self.upper[i] = self.upper[i] + value;
        } else {
            panic!("entry ({i}, {j}) outside the tridiagonal band");
        }
    }

    pub fn add_scaled(&mut self, alpha: T, other: &Self) {
        for (a, &b) in self.diag.iter_mut().zip(&other.diag) {
            *a = *a + alpha * b;
        }
        for (a, &b) in self.lower.iter_mut().zip(&other.lower) {
            *a = *a + alpha * b;
        }
        for (a, &b) in self.upper.iter_mut().zip(&other.upper) {
            *a = *a + alpha * b;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc = acc + self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting (one extra fill diagonal).
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        if n == 1 {
            if self.diag[0] == T::zero() {
                return Err(Error::Singular);
            }
            return Ok(vec![rhs[0] / self.diag[0]]);
        }
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut dl = self.lower.clone();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == T::zero() {
                    return Err(Error::Singular);
                }
                let fact = dl[i] / d[i];
                d[i + 1] = d[i + 1] - fact * du[i];
                b[i + 1] = b[i + 1] - fact * b[i];
                dl[i] = T::zero();
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let tmp = d[i + 1];
                d[i + 1] = du[i] - fact * tmp;
                if i + 1 < n - 1 {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                }
                du[i] = tmp;
                b.swap(i, i + 1);
                b[i + 1] = b[i + 1] - fact * b[i];
                if i + 1 < n - 1 {
                    du2[i] = dl[i];
                }
            }
        }
        if d[n - 1] == T::zero() {
            return Err(Error::Singular);
        }
        let mut x = b;
        x[n - 1] = x[n - 1] / d[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(x)
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, self.diag[i]);
            if i + 1 < n {
                m.set(i, i + 1, self.upper[i]);
                m.set(i + 1, i, self.lower[i]);
            }
        }
        m
    }
}

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// Embeds `self` as the leading block of an `(n + 1)`-square matrix with
    /// the given last column, last row and corner.
    pub fn bordered(&self, col: &[T], row: &[T], corner: T) -> Self {
        let n = self.n;
        let mut m = Self::zeros(n + 1);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.get(i, j));
            }
            m.set(i, n, col[i]);
            m.set(n, i, row[i]);
        }
        m.set(n, n, corner);
        m
    }

    /// LU with partial pivoting; consumes the matrix.
    pub fn solve(mut self, rhs: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut b = rhs.to_vec();
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if scale == T::zero() {
            return Err(Error::Singular);
        }
        let tiny = scale * T::epsilon() * T::lit(n as f64);
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, self.get(i, k).abs()))
                .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= tiny {
                return Err(Error::Singular);
            }
            if piv != k {
                for j in 0..n {
                    self.data.swap(k * n + j, piv * n + j);
                }
                b.swap(k, piv);
            }
            let pivot = self.get(k, k);
            for i in k + 1..n {
                let f = self.get(i, k) / pivot;
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = self.get(i, j) - f * self.get(k, j);
                    self.set(i, j, v);
                }
                b[i] = b[i] - f * b[k];
            }
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc = acc - self.get(i, j) * x[j];
            }
            x[i] = acc / self.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_tridiagonal(rng: &mut ChaCha8Rng, n: usize) -> Tridiagonal<f64> {
        Tridiagonal {
            lower: (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            diag: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            upper: (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    #[test]
    fn tridiagonal_solve_matches_matvec_including_indefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 10, 57] {
            for _ in 0..20 {
                let t = if n == 1 {
                    Tridiagonal {
                        lower: vec![],
                        diag: vec![0.7],
                        upper: vec![],
                    }
                } else {
                    random_tridiagonal(&mut rng, n)
                };
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let b = t.matvec(&x);
                let Ok(y) = t.solve(&b) else { continue };
                let err = x.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                assert!(err < 1e-7, "n = {n}, err = {err}");
            }
        }
    }

    #[test]
    fn tridiagonal_with_zero_leading_pivot() {
        let t = Tridiagonal {
            lower: vec![1.0, 1.0],
            diag: vec![0.0, 0.0, 1.0],
            upper: vec![1.0, 1.0],
        };
        let x = [1.0f64, -2.0, 3.0];
        let y = t.solve(&t.matvec(&x)).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dense_solve_agrees_with_tridiagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tridiagonal(&mut rng, 30);
        let b: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x1 = t.solve(&b).unwrap();
        let x2 = t.to_dense().solve(&b).unwrap();
        for (a, c) in x1.iter().zip(&x2) {
            assert!((a - c).abs() < 1e-8);
        }
    }

    #[test]
    fn singular_detected() {
        let m = DenseMatrix::<f64>::zeros(3);
        assert_eq!(m.solve(&[1.0, 2.0, 3.0]), Err(Error::Singular));
    }
}
