//! Small dense matrices: linear maps, affine maps and the handful of
//! factorizations the measure operations need (determinant, inverse,
//! row orthonormalization).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense real matrix in row-major order, used for pushforwards.
///
/// Serialized as `{"rows":r,"cols":c,"entries":[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap<T> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<T>,
}

impl<T: Scalar> LinearMap<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        let map = Self { rows, cols, entries };
        map.validate()?;
        Ok(map)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::BadParameters("linear map with zero rows or columns".into()));
        }
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::BadParameters(format!(
                "linear map {}x{} has {} entries",
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        if self.entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::BadParameters("linear map has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![T::one(); n])
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * n + i] = d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::BadParameters("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// 2-D rotation by `angle` radians.
    pub fn rotation_2d(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self { rows: 2, cols: 2, entries: vec![c, -s, s, c] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.entries[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Determinant by partial-pivot elimination.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of non-square map".into()));
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| crate::scalar::cmp_scalar(&a[p * n + col].abs(), &a[q * n + col].abs()))
                .unwrap();
            if a[pivot * n + col] == T::zero() {
                return Ok(T::zero());
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in (col + 1)..n {
                let f = a[r * n + col] / p;
                if f != T::zero() {
                    for j in col..n {
                        let v = a[col * n + j];
                        a[r * n + j] -= f * v;
                    }
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan elimination; `SingularMap` when a pivot vanishes.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square map".into()));
        }
        let n = self.rows;
        let mut a = self.entries.clone();
        let mut inv = Self::identity(n).entries;
        let scale = self.entries.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| crate::scalar::cmp_scalar(&a[p * n + col].abs(), &a[q * n + col].abs()))
                .unwrap();
            let pv = a[pivot * n + col];
            if pv.abs() <= T::epsilon() * scale {
                return Err(Error::SingularMap(self.det().map(|d| d.as_f64()).unwrap_or(0.0)));
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    inv.swap(col * n + j, pivot * n + j);
                }
            }
            for j in 0..n {
                a[col * n + j] /= pv;
                inv[col * n + j] /= pv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[col * n + j], inv[col * n + j]);
                    a[r * n + j] -= f * ac;
                    inv[r * n + j] -= f * ic;
                }
            }
        }
        Ok(Self { rows: n, cols: n, entries: inv })
    }

    /// True when the map is square with `P² = P = Pᵀ` within `tol`.
    pub fn is_orthogonal_projection(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let sym = self.max_abs_diff(&self.transpose());
        let idem = match self.matmul(self) {
            Ok(p2) => self.max_abs_diff(&p2),
            Err(_) => return false,
        };
        sym <= tol && idem <= tol
    }

    /// True when the rows are mutually orthonormal within `tol`.
    pub fn has_orthonormal_rows(&self, tol: T) -> bool {
        (0..self.rows).all(|i| {
            (0..self.rows).all(|j| {
                let target = if i == j { T::one() } else { T::zero() };
                (dot(self.row(i), self.row(j)) - target).abs() <= tol
            })
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// Factor a full-row-rank `k×d` map as `L·Q` with `L` lower triangular
    /// (`k×k`) and `Q` having orthonormal rows (modified Gram-Schmidt).
    pub fn lq(&self) -> Result<(Self, Self)> {
        let k = self.rows;
        let d = self.cols;
        if k > d {
            return Err(Error::SingularMap(0.0));
        }
        let mut q: Vec<Vec<T>> = Vec::with_capacity(k);
        let mut l = Self::zeros(k, k);
        let scale = self.entries.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        for i in 0..k {
            let mut v = self.row(i).to_vec();
            for (j, qj) in q.iter().enumerate() {
                let c = dot(&v, qj);
                l.set(i, j, c);
                axpy(-c, qj, &mut v);
            }
            let nrm = norm(&v);
            if nrm <= T::lit(1e-12) * scale.max(T::one()) {
                return Err(Error::SingularMap(0.0));
            }
            l.set(i, i, nrm);
            v.iter_mut().for_each(|x| *x /= nrm);
            q.push(v);
        }
        Ok((l, Self::from_rows(&q)?))
    }

    pub fn cast<U: Scalar>(&self) -> LinearMap<U> {
        LinearMap {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

/// Affine map `x ↦ A·x + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap<T> {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<T>,
    pub offset: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    pub fn new(linear: LinearMap<T>, offset: Vec<T>) -> Result<Self> {
        if offset.len() != linear.rows {
            return Err(Error::DimensionMismatch("offset length differs from map rows".into()));
        }
        Ok(Self { rows: linear.rows, cols: linear.cols, entries: linear.entries, offset })
    }

    pub fn linear(&self) -> LinearMap<T> {
        LinearMap { rows: self.rows, cols: self.cols, entries: self.entries.clone() }
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = self.linear().apply(x);
        y.iter_mut().zip(&self.offset).for_each(|(a, b)| *a += *b);
        y
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let a = self.linear();
        let lin = a.matmul(&inner.linear())?;
        let mut off = a.apply(&inner.offset);
        off.iter_mut().zip(&self.offset).for_each(|(o, b)| *o += *b);
        Self::new(lin, off)
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.linear().inverse()?;
        let off: Vec<T> = inv.apply(&self.offset).into_iter().map(|v| -v).collect();
        Self::new(inv, off)
    }
}

impl<T: Scalar> From<LinearMap<T>> for AffineMap<T> {
    fn from(m: LinearMap<T>) -> Self {
        let rows = m.rows;
        Self { rows, cols: m.cols, entries: m.entries, offset: vec![T::zero(); rows] }
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * *xi);
}

/// Completes `k` orthonormal vectors in `R^d` to an orthonormal basis,
/// returned as rows with the given vectors first.
pub fn complete_orthonormal_basis<T: Scalar>(dirs: &[Vec<T>], d: usize) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = dirs.to_vec();
    for axis in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![T::zero(); d];
        v[axis] = T::one();
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                axpy(-c, b, &mut v);
            }
        }
        let nrm = norm(&v);
        if nrm > T::lit(1e-6) {
            v.iter_mut().for_each(|x| *x /= nrm);
            basis.push(v);
        }
    }
    basis
}
