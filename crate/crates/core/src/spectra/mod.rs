//! Covariance matrices and the eigenvalue machinery behind the
//! covariance splitting algorithm and the mixed-sum eigenvalue bounds.

mod addsections;
mod eigen;
pub mod random;
pub mod suite;
mod split;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::LinearMap;
use crate::scalar::Scalar;

pub use addsections::addsections_eig_bounds;
pub use eigen::{eigendecompose, Eigen, MAX_SWEEPS};
pub use split::{split_covariance, SplitProblem, SplitResult, Subspace};

/// Eigenvalues down to this are accepted as PSD.
pub const PSD_TOL: f64 = 1e-10;

/// Symmetric `d×d` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix<T> {
    pub d: usize,
    pub entries: Vec<T>,
}

impl<T: Scalar> CovMatrix<T> {
    /// Builds a covariance matrix; tiny asymmetries (relative `1e-12`) are
    /// averaged away so the stored matrix is exactly symmetric.
    pub fn new(d: usize, mut entries: Vec<T>) -> Result<Self> {
        if d == 0 || entries.len() != d * d {
            return Err(Error::BadParameters(format!("{} entries for a {d}x{d} matrix", entries.len())));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParameters("non-finite matrix entry".into()));
        }
        let scale = entries.iter().fold(T::zero(), |m, v| m.max(v.abs())).max(T::min_positive_value());
        let mut asym = T::zero();
        for i in 0..d {
            for j in (i + 1)..d {
                let (a, b) = (entries[i * d + j], entries[j * d + i]);
                asym = asym.max((a - b).abs());
                let avg = (a + b) / T::lit(2.0);
                entries[i * d + j] = avg;
                entries[j * d + i] = avg;
            }
        }
        if asym > T::lit(1e-12) * scale {
            return Err(Error::NotSymmetric(asym.as_f64()));
        }
        Ok(Self { d, entries })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::BadParameters("covariance rows must form a square".into()));
        }
        Self::new(d, rows.concat())
    }

    pub fn identity(d: usize) -> Self {
        Self::diagonal(&vec![T::one(); d])
    }

    pub fn zeros(d: usize) -> Self {
        Self { d, entries: vec![T::zero(); d * d] }
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d);
        for (i, &v) in diag.iter().enumerate() {
            m.entries[i * d + i] = v;
        }
        m
    }

    /// `Σ w vvᵀ`-style rank-one update.
    pub fn add_outer(&mut self, weight: T, v: &[T]) {
        for i in 0..self.d {
            for j in 0..self.d {
                self.entries[i * self.d + j] += weight * v[i] * v[j];
            }
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.d + j]
    }

    pub fn trace(&self) -> T {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.d, other.d)));
        }
        Ok(Self { d: self.d, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| *a + *b).collect() })
    }

    pub fn sum<'a>(d: usize, mats: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        T: 'a,
    {
        mats.into_iter().try_fold(Self::zeros(d), |acc, m| acc.add(m))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries.iter().zip(&other.entries).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn max_off_diagonal(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.d {
            for j in 0..self.d {
                if i != j {
                    m = m.max(self.get(i, j).abs());
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[T]) -> Vec<T> {
        (0..self.d)
            .map(|i| (0..self.d).fold(T::zero(), |s, j| s + self.get(i, j) * v[j]))
            .collect()
    }

    /// `M·self·Mᵀ`-style congruence with a diagonal `M`.
    pub fn scale_diagonal(&self, diag: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.d {
            for j in 0..self.d {
                out.entries[i * self.d + j] = diag[i] * self.get(i, j) * diag[j];
            }
        }
        out
    }

    /// Minimum eigenvalue must be at least `-PSD_TOL · max(1, ‖A‖)`.
    pub fn check_psd(&self) -> Result<()> {
        let eig = eigendecompose(self)?;
        let scale = self.entries.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let min = eig.values[0];
        if min < -T::lit(PSD_TOL) * scale {
            return Err(Error::NotPSD(min.as_f64()));
        }
        Ok(())
    }

    /// `self^p` for a PSD matrix via its eigendecomposition (e.g. `p = -1/2`).
    pub fn power(&self, p: T) -> Result<Self> {
        let eig = eigendecompose(self)?;
        let d = self.d;
        let mut out = Self::zeros(d);
        for k in 0..d {
            let lam = eig.values[k];
            if lam <= T::zero() {
                return Err(Error::DegenerateCovariance(lam.as_f64()));
            }
            out.add_outer(lam.powf(p), &eig.vector(k));
        }
        Self::new(d, out.entries)
    }

    pub fn to_linear_map(&self) -> LinearMap<T> {
        LinearMap { rows: self.d, cols: self.d, entries: self.entries.clone() }
    }
}
