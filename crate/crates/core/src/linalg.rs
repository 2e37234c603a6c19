//! Small dense linear algebra: square matrices, a cyclic Jacobi symmetric
//! eigensolver, and the positive-semidefinite square root built on it.

use crate::error::{FrdError, Result};
use crate::scalar::Real;

/// Row-major `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(FrdError::InvalidParameter("matrix rows must all have length n".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)]) * half)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn add_diagonal(&self, eps: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] = m[(i, i)] + eps;
        }
        m
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&a| a * a).sum::<T>().sqrt()
    }

    pub fn max_abs_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> std::ops::Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition `A = V diag(values) V^T` of a symmetric matrix.
/// Column `k` of `vectors` belongs to `values[k]`; values are not sorted.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: SquareMatrix<T>,
}

/// Cyclic Jacobi rotations on the symmetrized input until the off-diagonal
/// mass vanishes to working precision.
pub fn symmetric_eigen<T: Real>(a: &SquareMatrix<T>) -> SymmetricEigen<T> {
    let n = a.size();
    let mut m = a.symmetrized();
    let mut v = SquareMatrix::identity(n);
    let eps = T::epsilon();
    let scale = m.frobenius_norm();
    if scale == T::zero() || n < 2 {
        return SymmetricEigen { values: (0..n).map(|i| m[(i, i)]).collect(), vectors: v };
    }
    let tiny = T::min_positive_value() / eps;

    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..i {
                off = off + m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= eps * scale || off <= tiny {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= tiny {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = {
                    let denom = theta.abs() + (theta * theta + T::one()).sqrt();
                    let t = T::one() / denom;
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen { values: (0..n).map(|i| m[(i, i)]).collect(), vectors: v }
}

/// Negative-eigenvalue tolerance: `1e-8`, widened for low-precision scalars
/// to a few ulps of the largest eigenvalue.
pub fn negative_eigen_tolerance<T: Real>(n: usize, max_abs: T) -> T {
    T::lit(1e-8).max(eigen_noise_floor(n, max_abs))
}

/// Magnitude below which a computed eigenvalue cannot be told apart from
/// zero: `10 n eps max|lambda|`.
pub fn eigen_noise_floor<T: Real>(n: usize, max_abs: T) -> T {
    T::lit(10.0 * n as f64) * T::epsilon() * max_abs
}

/// Principal square root of a symmetric positive-semidefinite matrix.
/// Eigenvalues at or below the noise floor are taken as zero, so rounding
/// noise in the null space is not amplified by the square root. Negative
/// eigenvalues beyond the tolerance are an error.
pub fn psd_sqrt<T: Real>(a: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = a.size();
    let eig = symmetric_eigen(a);
    let max_abs = eig.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = negative_eigen_tolerance(n, max_abs);
    let floor = eigen_noise_floor(n, max_abs);
    let mut roots = Vec::with_capacity(n);
    for &lambda in &eig.values {
        if !lambda.is_finite() {
            return Err(FrdError::NonFiniteDistance(0.0));
        }
        if lambda < -tol {
            return Err(FrdError::NegativeEigenvalue(lambda.as_f64()));
        }
        roots.push(if lambda <= floor { T::zero() } else { lambda.sqrt() });
    }
    let v = &eig.vectors;
    let out = SquareMatrix::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * roots[k] * v[(j, k)]).sum());
    Ok(out.symmetrized())
}
