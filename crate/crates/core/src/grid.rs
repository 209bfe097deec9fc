//! Grid-sampled densities: storage, midpoint quadrature, moments and the
//! log-concavity verifier.
//!
//! A sample at index `k` on axis `a` sits at `origin[a] + k·spacing[a]` and
//! stands for the cell of width `spacing[a]` centered there, so every
//! integral in the crate is a midpoint Riemann sum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectra::CovMatrix;

pub const MAX_DIM: usize = 3;

/// Relative tolerance for "normalized" and "isotropic".
pub const GRID_TOL: f64 = 1e-6;

/// Tolerance on log values used by the log-concavity check.
pub const LOG_CONCAVITY_TOL: f64 = 1e-7;

/// Shape, origin and spacing of a regular axis-aligned grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub shape: Vec<usize>,
    pub origin: Vec<T>,
    pub spacing: Vec<T>,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(shape: Vec<usize>, origin: Vec<T>, spacing: Vec<T>) -> Result<Self> {
        let dim = shape.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {dim} outside 1..=3")));
        }
        if origin.len() != dim || spacing.len() != dim {
            return Err(Error::InvalidGrid("origin/spacing length differs from dimension".into()));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidGrid("empty axis".into()));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > T::zero())) {
            return Err(Error::InvalidGrid("spacing must be positive and finite".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { shape, origin, spacing })
    }

    /// Grid with `counts[a]` samples per axis, symmetric about the origin.
    pub fn centered(counts: &[usize], spacing: &[T]) -> Result<Self> {
        let origin = counts
            .iter()
            .zip(spacing)
            .map(|(&n, &h)| -T::from_usize_lossy(n.saturating_sub(1)) * h / T::lit(2.0))
            .collect();
        Self::new(counts.to_vec(), origin, spacing.to_vec())
    }

    /// Smallest grid with the given spacing whose samples cover `[lo, hi]`
    /// on every axis, anchored at `lo`.
    pub fn covering(lo: &[T], hi: &[T], spacing: &[T]) -> Result<Self> {
        let shape = lo
            .iter()
            .zip(hi)
            .zip(spacing)
            .map(|((&l, &u), &h)| {
                let n = ((u - l) / h - T::lit(1e-9)).ceil().max(T::zero());
                n.to_usize().unwrap_or(0) + 1
            })
            .collect();
        Self::new(shape, lo.to_vec(), spacing.to_vec())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.shape[a + 1];
        }
        s
    }

    pub fn cell_volume(&self) -> T {
        self.spacing.iter().fold(T::one(), |v, h| v * *h)
    }

    /// Coordinate of sample `k`, measured from the axis midpoint so that
    /// centered grids get exactly antisymmetric coordinates.
    #[inline]
    pub fn coord(&self, axis: usize, k: usize) -> T {
        let h = self.spacing[axis];
        let half_span = T::from_usize_lossy(self.shape[axis] - 1) * h / T::lit(2.0);
        let mid = self.origin[axis] + half_span;
        let steps = T::from_usize_lossy(2 * k) - T::from_usize_lossy(self.shape[axis] - 1);
        mid + steps * h / T::lit(2.0)
    }

    pub fn coords(&self, axis: usize) -> Vec<T> {
        (0..self.shape[axis]).map(|k| self.coord(axis, k)).collect()
    }

    /// Coordinate of the last sample on `axis`.
    pub fn upper(&self, axis: usize) -> T {
        self.coord(axis, self.shape[axis] - 1)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |f, (&i, &n)| f * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<T> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.coord(a, k))
            .collect()
    }

    /// True when the samples on `axis` are placed symmetrically about 0.
    pub fn is_centered(&self, axis: usize) -> bool {
        let h = self.spacing[axis];
        (self.origin[axis] + self.upper(axis)).abs() <= T::lit(1e-9) * h
    }

    pub(crate) fn same_lattice(&self, other: &Self) -> bool {
        self.shape == other.shape
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .zip(self.spacing.iter().zip(&other.spacing))
                .all(|((o1, o2), (h1, h2))| {
                    (*o1 - *o2).abs() <= T::lit(1e-12) * *h1 && (*h1 - *h2).abs() <= T::lit(1e-12) * *h1
                })
    }
}

/// Nonnegative density sampled on a regular grid, stored row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid<T> {
    spec: GridSpec<T>,
    values: Vec<T>,
}

/// Which lattice lines the log-concavity check walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineSet {
    #[default]
    Axes,
    AxesAndDiagonals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogConcavityReport<T> {
    pub passed: bool,
    /// Largest value of `log f(x-h) + log f(x+h) - 2 log f(x)` over checked
    /// triples; `inf` when a line has a zero inside its support.
    pub worst_violation: T,
    pub worst_location: Option<Vec<usize>>,
    pub support_gaps: usize,
    pub lines_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSummary<T> {
    pub mean: Vec<T>,
    pub cov: CovMatrix<T>,
    pub sup_density: T,
    pub mass: T,
}

impl<T: Scalar> DensityGrid<T> {
    pub fn new(spec: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return Err(Error::InvalidGrid(format!("value {v} is negative or not finite")));
        }
        Ok(Self { spec, values })
    }

    /// Samples `f` at every grid point; negative samples are clamped to 0.
    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        let mut idx = vec![0usize; spec.dim()];
        let mut p: Vec<T> = (0..spec.dim()).map(|a| spec.coord(a, 0)).collect();
        for _ in 0..spec.len() {
            values.push(f(&p).max(T::zero()));
            for a in (0..spec.dim()).rev() {
                idx[a] += 1;
                if idx[a] < spec.shape[a] {
                    p[a] = spec.coord(a, idx[a]);
                    break;
                }
                idx[a] = 0;
                p[a] = spec.coord(a, 0);
            }
        }
        Self::new(spec, values)
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }
    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.spec.shape
    }
    #[inline]
    pub fn origin(&self) -> &[T] {
        &self.spec.origin
    }
    #[inline]
    pub fn spacing(&self) -> &[T] {
        &self.spec.spacing
    }
    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn into_parts(self) -> (GridSpec<T>, Vec<T>) {
        (self.spec, self.values)
    }

    pub fn value_at(&self, idx: &[usize]) -> T {
        self.values[self.spec.ravel(idx)]
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(*v))
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.spec.clone(), self.values.iter().map(|v| f(*v)).collect())
    }

    /// Riemann mass `Σ values · Π h`.
    pub fn mass(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.spec.cell_volume()
    }

    pub fn normalize(&self) -> Result<Self> {
        let m = self.mass();
        if !(m > T::zero()) {
            return Err(Error::ZeroMass);
        }
        if (m - T::one()).abs() <= T::epsilon() {
            return Ok(self.clone());
        }
        self.map_values(|v| v / m)
    }

    pub fn is_normalized(&self, tol: T) -> bool {
        (self.mass() - T::one()).abs() <= tol
    }

    /// Mean, covariance, sup and mass by midpoint quadrature.
    pub fn moments(&self) -> Result<MomentSummary<T>> {
        let mass = self.mass();
        if (mass - T::one()).abs() > T::lit(GRID_TOL) {
            return Err(Error::NotNormalized { mass: mass.as_f64() });
        }
        let d = self.dim();
        let coords: Vec<Vec<T>> = (0..d).map(|a| self.spec.coords(a)).collect();
        let total: T = self.values.iter().copied().sum();
        let mut mean = vec![T::zero(); d];
        self.for_each_positive(|idx, v| {
            for a in 0..d {
                mean[a] += coords[a][idx[a]] * v;
            }
        });
        mean.iter_mut().for_each(|m| *m /= total);
        let mut cov = vec![T::zero(); d * d];
        self.for_each_positive(|idx, v| {
            let mut c = [T::zero(); MAX_DIM];
            for a in 0..d {
                c[a] = coords[a][idx[a]] - mean[a];
            }
            for a in 0..d {
                for b in a..d {
                    cov[a * d + b] += c[a] * c[b] * v;
                }
            }
        });
        for a in 0..d {
            for b in a..d {
                cov[a * d + b] /= total;
                cov[b * d + a] = cov[a * d + b];
            }
        }
        Ok(MomentSummary {
            mean,
            cov: CovMatrix::new(d, cov)?,
            sup_density: self.max_value(),
            mass,
        })
    }

    /// Raw second moment `E⟨X, e_axis⟩²` about the coordinate origin.
    pub fn second_moment(&self, axis: usize) -> T {
        let coords = self.spec.coords(axis);
        let total: T = self.values.iter().copied().sum();
        let mut s = T::zero();
        self.for_each_positive(|idx, v| {
            let x = coords[idx[axis]];
            s += x * x * v;
        });
        s / total
    }

    fn for_each_positive(&self, mut f: impl FnMut(&[usize], T)) {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        for &v in &self.values {
            if v > T::zero() {
                f(&idx, v);
            }
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < self.spec.shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
    }

    /// Checks `2 log f(x) >= log f(x-h) + log f(x+h) - tol` on every lattice
    /// triple with positive values, and that no line has a zero between two
    /// positive samples.
    pub fn check_log_concave(&self, lines: LineSet, tol: T) -> LogConcavityReport<T> {
        let d = self.dim();
        let mut dirs: Vec<Vec<isize>> = (0..d)
            .map(|a| {
                let mut v = vec![0isize; d];
                v[a] = 1;
                v
            })
            .collect();
        if lines == LineSet::AxesAndDiagonals && d >= 2 {
            // main diagonals: all-±1 directions with a leading +1
            for mask in 0..(1usize << (d - 1)) {
                let mut v = vec![1isize; d];
                for (b, comp) in v.iter_mut().skip(1).enumerate() {
                    if mask & (1 << b) != 0 {
                        *comp = -1;
                    }
                }
                dirs.push(v);
            }
        }
        let logs: Vec<T> = self.values.iter().map(|v| v.ln()).collect();
        let mut report = LogConcavityReport {
            passed: true,
            worst_violation: T::neg_infinity(),
            worst_location: None,
            support_gaps: 0,
            lines_checked: 0,
        };
        let shape = &self.spec.shape;
        let in_bounds = |idx: &[isize]| idx.iter().zip(shape).all(|(&i, &n)| i >= 0 && (i as usize) < n);
        let mut line_flat: Vec<usize> = Vec::new();
        for dir in &dirs {
            for start in 0..self.spec.len() {
                let s: Vec<isize> = self.spec.unravel(start).iter().map(|&i| i as isize).collect();
                let prev: Vec<isize> = s.iter().zip(dir).map(|(a, b)| a - b).collect();
                if in_bounds(&prev) {
                    continue;
                }
                line_flat.clear();
                let mut cur = s;
                while in_bounds(&cur) {
                    let idx: Vec<usize> = cur.iter().map(|&i| i as usize).collect();
                    line_flat.push(self.spec.ravel(&idx));
                    cur.iter_mut().zip(dir).for_each(|(c, d)| *c += d);
                }
                report.lines_checked += 1;
                self.check_line(&line_flat, &logs, &mut report);
            }
        }
        if report.worst_violation > tol {
            report.passed = false;
        }
        if report.support_gaps > 0 {
            report.passed = false;
        }
        if report.worst_violation == T::neg_infinity() {
            report.worst_violation = T::zero();
        }
        report
    }

    fn check_line(&self, line: &[usize], logs: &[T], report: &mut LogConcavityReport<T>) {
        let v = &self.values;
        let first = line.iter().position(|&f| v[f] > T::zero());
        let last = line.iter().rposition(|&f| v[f] > T::zero());
        if let (Some(a), Some(b)) = (first, last) {
            if line[a..=b].iter().any(|&f| v[f] <= T::zero()) {
                report.support_gaps += 1;
                report.worst_violation = T::infinity();
                report.worst_location = Some(self.spec.unravel(line[a]));
                return;
            }
            for w in line[a..=b].windows(3) {
                let viol = logs[w[0]] + logs[w[2]] - T::lit(2.0) * logs[w[1]];
                if viol > report.worst_violation {
                    report.worst_violation = viol;
                    report.worst_location = Some(self.spec.unravel(w[1]));
                }
            }
        }
    }

    /// `sup_density^(1/dim)` of an isotropic grid.
    pub fn isotropic_constant(&self, tol: T) -> Result<T> {
        let m = self.moments()?;
        let (mean_dev, cov_dev) = isotropy_deviation(&m);
        if mean_dev > tol || cov_dev > tol {
            return Err(Error::NotIsotropic { mean_dev: mean_dev.as_f64(), cov_dev: cov_dev.as_f64() });
        }
        Ok(m.sup_density.powf(T::one() / T::from_usize_lossy(self.dim())))
    }

    /// Multilinear interpolation; zero outside the sampled range.
    pub fn interpolate(&self, p: &[T]) -> T {
        let d = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [T::zero(); MAX_DIM];
        let slack = T::lit(1e-9);
        for a in 0..d {
            let n = self.spec.shape[a];
            let t = (p[a] - self.spec.origin[a]) / self.spec.spacing[a];
            let top = T::from_usize_lossy(n - 1);
            if !(t >= -slack && t <= top + slack) {
                return T::zero();
            }
            let t = t.max(T::zero()).min(top);
            if n == 1 {
                base[a] = 0;
                frac[a] = T::zero();
                continue;
            }
            let i0 = t.floor().to_usize().unwrap_or(0).min(n - 2);
            base[a] = i0;
            frac[a] = t - T::from_usize_lossy(i0);
        }
        let strides = self.spec.strides();
        let mut acc = T::zero();
        for corner in 0..(1usize << d) {
            let mut w = T::one();
            let mut flat = 0;
            let mut skip = false;
            for a in 0..d {
                let up = corner & (1 << a) != 0;
                if up {
                    if self.spec.shape[a] == 1 {
                        skip = true;
                        break;
                    }
                    w *= frac[a];
                    flat += (base[a] + 1) * strides[a];
                } else {
                    w *= T::one() - frac[a];
                    flat += base[a] * strides[a];
                }
            }
            if !skip && w != T::zero() {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Reorders axes so that new axis `k` is old axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let d = self.dim();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&p| p >= d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::BadParameters(format!("{perm:?} is not a permutation of 0..{d}")));
        }
        let spec = GridSpec::new(
            perm.iter().map(|&p| self.spec.shape[p]).collect(),
            perm.iter().map(|&p| self.spec.origin[p]).collect(),
            perm.iter().map(|&p| self.spec.spacing[p]).collect(),
        )?;
        let mut values = vec![T::zero(); self.values.len()];
        let mut old = vec![0usize; d];
        for (flat, v) in values.iter_mut().enumerate() {
            let new_idx = spec.unravel(flat);
            for k in 0..d {
                old[perm[k]] = new_idx[k];
            }
            *v = self.values[self.spec.ravel(&old)];
        }
        Self::new(spec, values)
    }

    /// Pushforward under `x ↦ diag(s)·x` for positive `s`. Exact: only the
    /// lattice is relabeled and the values divided by `Π s`.
    pub fn scale_axes(&self, s: &[T]) -> Result<Self> {
        let d = self.dim();
        if s.len() != d || s.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::BadParameters(format!("scale factors must be {d} positive numbers")));
        }
        let spec = GridSpec::new(
            self.spec.shape.clone(),
            self.spec.origin.iter().zip(s).map(|(o, k)| *o * *k).collect(),
            self.spec.spacing.iter().zip(s).map(|(h, k)| *h * *k).collect(),
        )?;
        let jac = s.iter().fold(T::one(), |acc, k| acc * *k);
        Self::new(spec, self.values.iter().map(|v| *v / jac).collect())
    }

    /// Largest absolute pointwise difference, comparing `other` by
    /// interpolation at this grid's samples and vice versa.
    pub fn sup_distance(&self, other: &Self) -> T {
        if self.dim() != other.dim() {
            return T::infinity();
        }
        if self.spec.same_lattice(&other.spec) {
            return self
                .values
                .iter()
                .zip(&other.values)
                .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        }
        let one_way = |a: &Self, b: &Self| {
            (0..a.values.len()).fold(T::zero(), |m, f| m.max((a.values[f] - b.interpolate(&a.spec.point(f))).abs()))
        };
        one_way(self, other).max(one_way(other, self))
    }

    pub fn cast<U: Scalar>(&self) -> DensityGrid<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::lit(x.as_f64())).collect::<Vec<U>>();
        DensityGrid {
            spec: GridSpec {
                shape: self.spec.shape.clone(),
                origin: conv(&self.spec.origin),
                spacing: conv(&self.spec.spacing),
            },
            values: conv(&self.values),
        }
    }
}

/// `(max |mean_k|, max |cov - Id|)`.
pub fn isotropy_deviation<T: Scalar>(m: &MomentSummary<T>) -> (T, T) {
    let mean_dev = m.mean.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let d = m.mean.len();
    let mut cov_dev = T::zero();
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { T::one() } else { T::zero() };
            cov_dev = cov_dev.max((m.cov.get(i, j) - target).abs());
        }
    }
    (mean_dev, cov_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_square(n: usize) -> DensityGrid<f64> {
        let h = 1.0 / n as f64;
        let spec = GridSpec::new(vec![n, n], vec![h / 2.0; 2], vec![h; 2]).unwrap();
        DensityGrid::from_fn(spec, |_| 1.0).unwrap()
    }

    fn gaussian_1d(h: f64, cut: f64) -> DensityGrid<f64> {
        let m = (cut / h).round() as usize;
        let spec = GridSpec::centered(&[2 * m + 1], &[h]).unwrap();
        DensityGrid::from_fn(spec, |x| (-x[0] * x[0] / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).unwrap()
    }

    #[test]
    fn mass_of_uniform_square() {
        assert_abs_diff_eq!(unit_square(50).mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_is_linear() {
        let g = unit_square(20);
        let g2 = g.map_values(|v| 2.0 * v).unwrap();
        assert_eq!(g2.mass(), 2.0 * g.mass());
    }

    #[test]
    fn truncated_gaussian_mass() {
        // tail beyond ±8 is below 1.3e-15, midpoint rule error is spectrally small
        assert_abs_diff_eq!(gaussian_1d(0.01, 8.0).mass(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn normalize_cases() {
        let spec = GridSpec::new(vec![10], vec![0.05], vec![0.1]).unwrap();
        let g = DensityGrid::from_fn(spec.clone(), |_| 2.0).unwrap();
        let n = g.normalize().unwrap();
        assert!(n.values().iter().all(|v: &f64| (v - 1.0).abs() < 1e-12));
        assert_eq!(n.normalize().unwrap(), n);
        let z = DensityGrid::new(spec, vec![0.0; 10]).unwrap();
        assert_eq!(z.normalize(), Err(Error::ZeroMass));
    }

    #[test]
    fn rejects_negative_values() {
        let spec = GridSpec::new(vec![2], vec![0.0], vec![1.0]).unwrap();
        assert!(DensityGrid::new(spec, vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn moments_of_uniform_intervals() {
        // n cells tiling [a, b]: discrete variance is (b-a)²/12 · (1 - 1/n²)
        let n = 4000;
        let w = 2.0 * 3f64.sqrt();
        let h = w / n as f64;
        let spec = GridSpec::new(vec![n], vec![-w / 2.0 + h / 2.0], vec![h]).unwrap();
        let g = DensityGrid::from_fn(spec, |_| 1.0 / w).unwrap().normalize().unwrap();
        let m = g.moments().unwrap();
        assert_abs_diff_eq!(m.mean[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cov.get(0, 0), 1.0, epsilon = 1e-6);

        let n = 1000;
        let h = 1.0 / n as f64;
        let spec = GridSpec::new(vec![n], vec![h / 2.0], vec![h]).unwrap();
        let g = DensityGrid::from_fn(spec, |_| 1.0).unwrap();
        let m = g.moments().unwrap();
        assert_abs_diff_eq!(m.mean[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m.cov.get(0, 0), 1.0 / 12.0, epsilon = 1e-6);
    }

    #[test]
    fn moments_require_normalization() {
        let spec = GridSpec::new(vec![10], vec![0.05], vec![0.1]).unwrap();
        let g = DensityGrid::from_fn(spec, |_| 2.0).unwrap();
        assert!(matches!(g.moments(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn log_concavity_of_gaussian_and_box() {
        assert!(gaussian_1d(0.01, 8.0).check_log_concave(LineSet::Axes, 1e-7).passed);
        let r = unit_square(30).check_log_concave(LineSet::AxesAndDiagonals, 1e-7);
        assert!(r.passed);
        assert_eq!(r.lines_checked, 30 + 30 + 2 * 59);
    }

    #[test]
    fn bimodal_mixture_fails_near_zero() {
        let spec = GridSpec::centered(&[1201], &[0.01]).unwrap();
        let sd = 0.1f64.sqrt();
        let g = DensityGrid::from_fn(spec, |x| {
            let n = |m: f64| (-(x[0] - m).powi(2) / (2.0 * sd * sd)).exp();
            0.5 * n(-3.0) + 0.5 * n(3.0)
        })
        .unwrap();
        let r = g.check_log_concave(LineSet::Axes, 1e-7);
        assert!(!r.passed);
        let loc = r.worst_location.unwrap()[0] as f64 * 0.01 - 6.0;
        assert!(loc.abs() < 0.05, "violation located at {loc}");
        // second log-difference at 0 is h²·(9/σ⁴ − 1/σ²) up to an O(h⁴) term
        let expected = 0.01f64.powi(2) * (9.0 / 0.01 - 10.0);
        assert_abs_diff_eq!(r.worst_violation, expected, epsilon = 3e-2 * expected);
    }

    #[test]
    fn interior_zero_is_a_gap() {
        let spec = GridSpec::new(vec![5], vec![0.0], vec![1.0]).unwrap();
        let g = DensityGrid::new(spec, vec![0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let r = g.check_log_concave(LineSet::Axes, 1e-7);
        assert!(!r.passed);
        assert_eq!(r.support_gaps, 1);
    }

    #[test]
    fn isotropic_constant_of_uniform_interval() {
        let n = 4000;
        let w = 2.0 * 3f64.sqrt();
        let h = w / n as f64;
        let spec = GridSpec::new(vec![n], vec![-w / 2.0 + h / 2.0], vec![h]).unwrap();
        let g = DensityGrid::from_fn(spec, |_| 1.0 / w).unwrap();
        assert_abs_diff_eq!(g.isotropic_constant(1e-6).unwrap(), 1.0 / w, epsilon = 1e-12);
        assert!(matches!(unit_square(10).isotropic_constant(1e-6), Err(Error::NotIsotropic { .. })));
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_zero_outside() {
        let g = unit_square(10);
        assert_eq!(g.interpolate(&[0.05, 0.95]), 1.0);
        assert_eq!(g.interpolate(&[1.2, 0.5]), 0.0);
        let spec = GridSpec::new(vec![3], vec![0.0], vec![1.0]).unwrap();
        let line = DensityGrid::new(spec, vec![0.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(line.interpolate(&[1.25]), 2.5, epsilon = 1e-15);
    }

    #[test]
    fn permutation_roundtrip() {
        let spec = GridSpec::new(vec![2, 3], vec![0.0, 1.0], vec![0.5, 0.25]).unwrap();
        let g = DensityGrid::new(spec, (0..6).map(|v| v as f64).collect()).unwrap();
        let p = g.permute_axes(&[1, 0]).unwrap();
        assert_eq!(p.shape(), &[3, 2]);
        assert_eq!(p.value_at(&[2, 1]), g.value_at(&[1, 2]));
        assert_eq!(p.permute_axes(&[1, 0]).unwrap(), g);
        assert!(g.permute_axes(&[0, 0]).is_err());
    }

    #[test]
    fn f32_grid_works() {
        let spec = GridSpec::<f32>::new(vec![4], vec![0.125], vec![0.25]).unwrap();
        let g = DensityGrid::from_fn(spec, |_| 2.0).unwrap().normalize().unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-6);
    }
}
