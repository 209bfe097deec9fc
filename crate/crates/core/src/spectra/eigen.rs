use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

use super::CovMatrix;

pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with eigenvectors stored as columns of a
/// row-major `d×d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<T>,
    d: usize,
}

impl<T: Scalar> Eigen<T> {
    /// The `k`-th eigenvector (column `k`).
    pub fn vector(&self, k: usize) -> Vec<T> {
        (0..self.d).map(|i| self.vectors[i * self.d + k]).collect()
    }

    pub fn max(&self) -> (T, Vec<T>) {
        let k = self.d - 1;
        (self.values[k], self.vector(k))
    }

    /// `V·diag(λ)·Vᵀ`.
    pub fn reconstruct(&self) -> CovMatrix<T> {
        let mut m = CovMatrix::zeros(self.d);
        for k in 0..self.d {
            m.add_outer(self.values[k], &self.vector(k));
        }
        m
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Sweeps over all off-diagonal pairs, annihilating each with a plane
/// rotation, until the off-diagonal Frobenius norm falls below `1e-12`
/// relative to the matrix norm (absolute `1e-300` floor for the zero matrix).
pub fn eigendecompose<T: Scalar>(a: &CovMatrix<T>) -> Result<Eigen<T>> {
    let n = a.d;
    let mut m = a.entries.clone();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let frob = m.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
    let target = (T::lit(1e-12) * frob).max(T::min_positive_value());
    let off = |m: &[T]| {
        let mut s = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                s += m[p * n + q] * m[p * n + q];
            }
        }
        (s + s).sqrt()
    };
    let mut converged = off(&m) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = T::zero();
                m[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&m) <= target;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_scalar(&m[i * n + i], &m[j * n + j]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_k, &old_k) in order.iter().enumerate() {
        // sign convention: largest-magnitude component positive
        let col: Vec<T> = (0..n).map(|i| v[i * n + old_k]).collect();
        let lead = col.iter().copied().fold(T::zero(), |b, x| if x.abs() > b.abs() { x } else { b });
        let sign = if lead < T::zero() { -T::one() } else { T::one() };
        for i in 0..n {
            vectors[i * n + new_k] = sign * col[i];
        }
    }
    Ok(Eigen { values, vectors, d: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn residual(a: &CovMatrix<f64>, e: &Eigen<f64>) -> f64 {
        (0..a.d)
            .map(|k| {
                let v = e.vector(k);
                a.apply(&v).iter().zip(&v).map(|(av, vi)| (av - e.values[k] * vi).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_matrix() {
        let a = CovMatrix::diagonal(&[3.0, 1.0, 2.0]);
        let e = eigendecompose(&a).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(e.vector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.vector(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two_by_hand() {
        // characteristic polynomial (2-λ)² - 1 = 0 → λ = 1, 3
        let a = CovMatrix::<f64>::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = eigendecompose(&a).unwrap();
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 3.0, epsilon = 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vector(0);
        assert_abs_diff_eq!(v0[0].abs(), s, epsilon = 1e-14);
        assert_abs_diff_eq!(v0[0], -v0[1], epsilon = 1e-14);
        let v1 = e.vector(1);
        assert_abs_diff_eq!(v1[0], s, epsilon = 1e-14);
        assert_abs_diff_eq!(v1[1], s, epsilon = 1e-14);
    }

    #[test]
    fn rotated_diagonal_recovers_spectrum() {
        let (s, c) = 0.7f64.sin_cos();
        let q = [vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 1.0]];
        let lam = [0.5, 4.0, 2.0];
        let mut a = CovMatrix::zeros(3);
        for k in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| q[i][k]).collect();
            a.add_outer(lam[k], &col);
        }
        let e = eigendecompose(&a).unwrap();
        for (got, want) in e.values.iter().zip([0.5, 2.0, 4.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-10);
        }
        assert!(residual(&a, &e) < 1e-12);
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn zero_and_repeated() {
        let e = eigendecompose(&CovMatrix::<f64>::zeros(2)).unwrap();
        assert_eq!(e.values, vec![0.0, 0.0]);
        let e = eigendecompose(&CovMatrix::<f64>::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
    }
}
