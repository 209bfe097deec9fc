//! Canonical log-concave densities on centered grids, analytic oracles and
//! the demonstration pipelines built on them.

mod demos;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec, MAX_DIM};
use crate::scalar::Scalar;

pub use demos::{
    clt_diagonal_demo, closure_sequence_demo, scripted_closure_scenarios, write_clt_csv, write_closure_csv,
    ClosureConfig, ClosureRow, ClosureScenario, ClosureStep, CltRow, BOX_TOL,
};

/// Densities below this fraction of the supremum are cut off.
pub const TRUNCATION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    UniformBox,
    UniformBall,
    UniformSimplex,
    Gaussian,
    Laplace,
    Exponential,
    Triangle,
}

impl FamilyName {
    pub const ALL: [FamilyName; 7] = [
        FamilyName::UniformBox,
        FamilyName::UniformBall,
        FamilyName::UniformSimplex,
        FamilyName::Gaussian,
        FamilyName::Laplace,
        FamilyName::Exponential,
        FamilyName::Triangle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::UniformBox => "uniform_box",
            FamilyName::UniformBall => "uniform_ball",
            FamilyName::UniformSimplex => "uniform_simplex",
            FamilyName::Gaussian => "gaussian",
            FamilyName::Laplace => "laplace",
            FamilyName::Exponential => "exponential",
            FamilyName::Triangle => "triangle",
        }
    }

    /// Families whose parameters may differ per axis (product densities).
    pub fn is_product(self) -> bool {
        !matches!(self, FamilyName::UniformBall | FamilyName::UniformSimplex)
    }
}

impl std::fmt::Display for FamilyName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FamilyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::BadParameters(format!("unknown family {s:?}")))
    }
}

/// A named family with its parameters and grid resolution.
///
/// `params` holds one value broadcast to every axis, or one per axis for
/// product families:
///
/// | family | parameter | support / density |
/// |---|---|---|
/// | `uniform_box` | width `w` | `[-w/2, w/2]` |
/// | `uniform_ball` | radius `r` | `‖x‖ ≤ r` |
/// | `uniform_simplex` | scale `s` | `{y ≥ 0, Σy ≤ s}` shifted to its centroid |
/// | `gaussian` | `σ` | `N(0, σ²)` |
/// | `laplace` | rate `λ` | `(λ/2) e^{-λ|x|}` |
/// | `exponential` | rate `λ` | `λ e^{-λx}`, `x ≥ 0` |
/// | `triangle` | half-width `a` | `(1 - |x|/a)₊ / a` |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: FamilyName,
    pub dim: usize,
    pub params: Vec<f64>,
    pub h: f64,
}

impl FamilySpec {
    pub fn new(name: FamilyName, dim: usize, params: Vec<f64>, h: f64) -> Self {
        Self { name, dim, params, h }
    }

    /// Parameters giving variance `var` on every axis.
    pub fn with_variance(name: FamilyName, dim: usize, var: f64, h: f64) -> Self {
        let d = dim as f64;
        let p = match name {
            FamilyName::UniformBox => (12.0 * var).sqrt(),
            FamilyName::UniformBall => ((d + 2.0) * var).sqrt(),
            FamilyName::UniformSimplex => (d + 1.0) * ((d + 2.0) * var / d).sqrt(),
            FamilyName::Gaussian => var.sqrt(),
            FamilyName::Laplace => (2.0 / var).sqrt(),
            FamilyName::Exponential => 1.0 / var.sqrt(),
            FamilyName::Triangle => (6.0 * var).sqrt(),
        };
        Self::new(name, dim, vec![p], h)
    }

    /// Per-axis parameters after broadcasting.
    pub fn axis_params(&self) -> Result<Vec<f64>> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::BadParameters(format!("dimension {} outside 1..=3", self.dim)));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::BadParameters(format!("grid step {} must be positive", self.h)));
        }
        let p = match self.params.len() {
            1 => vec![self.params[0]; self.dim],
            n if n == self.dim && self.name.is_product() => self.params.clone(),
            n => {
                return Err(Error::BadParameters(format!(
                    "{} takes 1{} parameters, got {n}",
                    self.name,
                    if self.name.is_product() { format!(" or {}", self.dim) } else { String::new() }
                )))
            }
        };
        if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::BadParameters(format!("parameters must be positive, got {p:?}")));
        }
        Ok(p)
    }

    /// Analytic per-axis mean and variance.
    pub fn analytic_moments(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.axis_params()?;
        let d = self.dim as f64;
        let one = |x: f64| -> (f64, f64) {
            match self.name {
                FamilyName::UniformBox => (0.0, x * x / 12.0),
                FamilyName::UniformBall => (0.0, x * x / (d + 2.0)),
                FamilyName::UniformSimplex => (0.0, x * x * d / ((d + 1.0).powi(2) * (d + 2.0))),
                FamilyName::Gaussian => (0.0, x * x),
                FamilyName::Laplace => (0.0, 2.0 / (x * x)),
                FamilyName::Exponential => (1.0 / x, 1.0 / (x * x)),
                FamilyName::Triangle => (0.0, x * x / 6.0),
            }
        };
        Ok(p.iter().map(|&x| one(x)).unzip())
    }

    /// Normalized grid of the density, centered on every axis.
    pub fn generate<T: Scalar>(&self) -> Result<DensityGrid<T>> {
        let p = self.axis_params()?;
        let h = self.h;
        let d = self.dim;
        let cut = TRUNCATION.recip().ln();
        let reach: Vec<f64> = p
            .iter()
            .map(|&x| match self.name {
                FamilyName::UniformBox => x / 2.0,
                FamilyName::UniformBall | FamilyName::Triangle => x,
                FamilyName::UniformSimplex => x * d as f64 / (d as f64 + 1.0),
                FamilyName::Gaussian => x * (2.0 * cut).sqrt(),
                FamilyName::Laplace | FamilyName::Exponential => cut / x,
            })
            .collect();
        // box and exponential put a cell edge at 0 / ±w/2; the rest sample 0
        let even = matches!(self.name, FamilyName::UniformBox | FamilyName::Exponential);
        let counts: Vec<usize> = reach
            .iter()
            .map(|r| {
                let m = (r / h - 1e-9).ceil().max(1.0) as usize;
                if even {
                    2 * m
                } else {
                    2 * m + 1
                }
            })
            .collect();
        if counts.iter().product::<usize>() > 64_000_000 {
            return Err(Error::BadParameters(format!("grid of shape {counts:?} is too large")));
        }
        // exactly antisymmetric coordinates
        let axis_coords: Vec<Vec<f64>> = counts
            .iter()
            .map(|&n| (0..n).map(|k| (2.0 * k as f64 - (n - 1) as f64) * h / 2.0).collect())
            .collect();
        let factor = |a: usize, x: f64| -> f64 {
            let q = p[a];
            match self.name {
                FamilyName::UniformBox => {
                    let lo = (x - h / 2.0).max(-q / 2.0);
                    let hi = (x + h / 2.0).min(q / 2.0);
                    ((hi - lo) / h).clamp(0.0, 1.0)
                }
                FamilyName::Gaussian => (-x * x / (2.0 * q * q)).exp(),
                FamilyName::Laplace => (-q * x.abs()).exp(),
                FamilyName::Exponential => {
                    if x >= 0.0 {
                        (-q * x).exp()
                    } else {
                        0.0
                    }
                }
                FamilyName::Triangle => (1.0 - x.abs() / q).max(0.0),
                FamilyName::UniformBall | FamilyName::UniformSimplex => unreachable!(),
            }
        };
        let joint = |x: &[f64]| -> f64 {
            match self.name {
                FamilyName::UniformBall => {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    if r2 <= p[0] * p[0] * (1.0 + 1e-12) {
                        1.0
                    } else {
                        0.0
                    }
                }
                FamilyName::UniformSimplex => {
                    let c = p[0] / (d as f64 + 1.0);
                    let inside = x.iter().all(|&v| v >= -c - 1e-12 * p[0])
                        && x.iter().sum::<f64>() <= c + 1e-12 * p[0];
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                }
                _ => x.iter().enumerate().map(|(a, &v)| factor(a, v)).product(),
            }
        };
        let spec = GridSpec::new(
            counts.clone(),
            axis_coords.iter().map(|c| T::lit(c[0])).collect(),
            vec![T::lit(h); d],
        )?;
        let mut values = Vec::with_capacity(spec.len());
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        for _ in 0..spec.len() {
            for a in 0..d {
                x[a] = axis_coords[a][idx[a]];
            }
            let v = joint(&x);
            // every unnormalized density here peaks at (about) 1
            values.push(T::lit(if v >= TRUNCATION { v } else { 0.0 }));
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        DensityGrid::new(spec, values)?.normalize()
    }
}

/// Density of the sum of `n` independent uniform[0,1] variables.
pub fn irwin_hall_density(n: usize, x: f64) -> f64 {
    if n == 0 || !(0.0..=n as f64).contains(&x) {
        return 0.0;
    }
    if n == 1 {
        return 1.0;
    }
    // reflect to the left half, where the alternating sum is shorter
    let x = x.min(n as f64 - x);
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=(x.floor() as usize).min(n) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * (x - k as f64).powi(n as i32 - 1);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    let fact: f64 = (1..n).map(|k| k as f64).product();
    (sum / fact).max(0.0)
}

/// True when `g` looks like the uniform density on an axis-aligned box:
/// the positive cells fill their bounding box apart from one boundary cell
/// per face, and away from the boundary (two cells in) the positive values
/// agree up to a factor `1 + tol`.
pub fn is_uniform_box<T: Scalar>(g: &DensityGrid<T>, tol: T) -> bool {
    let d = g.dim();
    let shape = g.shape();
    let mut lo = shape.to_vec();
    let mut hi = vec![0usize; d];
    let mut any = false;
    let mut idx = vec![0usize; d];
    for &v in g.values() {
        if v > T::zero() {
            any = true;
            for a in 0..d {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a]);
            }
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    if !any || (0..d).any(|a| hi[a] < lo[a] + 4) {
        return false;
    }
    let mut min = T::infinity();
    let mut max = T::zero();
    idx.iter_mut().for_each(|i| *i = 0);
    for &v in g.values() {
        let depth = (0..d).map(|a| (idx[a] as isize - lo[a] as isize).min(hi[a] as isize - idx[a] as isize)).min();
        match depth {
            Some(k) if k >= 2 => {
                min = min.min(v);
                max = max.max(v);
            }
            Some(1) if v <= T::zero() => return false,
            _ => {}
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    min > T::zero() && max <= min * (T::one() + tol)
}

/// Members of every family in dimensions 1 to 3, each with unit variance per
/// axis. Resolutions keep 3-D grids near a million cells.
pub fn corpus() -> Vec<FamilySpec> {
    let mut out = Vec::new();
    for dim in 1..=3 {
        for name in FamilyName::ALL {
            out.push(corpus_member(name, dim));
        }
    }
    out
}

/// The corpus member of `name` in dimension `dim`.
pub fn corpus_member(name: FamilyName, dim: usize) -> FamilySpec {
    let per_axis = [4000.0, 300.0, 100.0][dim - 1];
    let probe = FamilySpec::with_variance(name, dim, 1.0, 1.0);
    let reach = match name {
        FamilyName::Gaussian => (2.0 * TRUNCATION.recip().ln()).sqrt(),
        FamilyName::Laplace | FamilyName::Exponential => TRUNCATION.recip().ln() / probe.params[0],
        FamilyName::UniformBox => probe.params[0] / 2.0,
        _ => probe.params[0],
    };
    // snap to a divisor or a multiple of 0.05, so tent kernels of width
    // 0.05 and 0.2 span whole cells on fine grids
    let h = 2.0 * reach / per_axis;
    let h = if h < 0.05 { 0.05 / (0.05 / h).floor() } else { 0.05 * (h / 0.05).ceil() };
    FamilySpec::with_variance(name, dim, 1.0, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{LineSet, LOG_CONCAVITY_TOL};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn irwin_hall_values() {
        assert_eq!(irwin_hall_density(1, 0.5), 1.0);
        assert_abs_diff_eq!(irwin_hall_density(2, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(irwin_hall_density(3, 1.5), 0.75, epsilon = 1e-15);
        assert_eq!(irwin_hall_density(3, 3.5), 0.0);
        // symmetric about n/2 and integrates to 1
        let n = 12;
        assert_abs_diff_eq!(irwin_hall_density(n, 4.3), irwin_hall_density(n, 7.7), epsilon = 1e-14);
        let dx = 1e-3;
        let mass: f64 = (0..12000).map(|k| irwin_hall_density(n, (k as f64 + 0.5) * dx) * dx).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn unit_box_1d() {
        let g: DensityGrid<f64> = FamilySpec::new(FamilyName::UniformBox, 1, vec![1.0], 0.01).generate().unwrap();
        assert_eq!(g.shape(), &[100]);
        assert!(g.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert_abs_diff_eq!(g.origin()[0], -0.495, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_2d_matches_formula() {
        let g: DensityGrid<f64> = FamilySpec::new(FamilyName::Gaussian, 2, vec![1.0], 0.05).generate().unwrap();
        let worst = (0..g.values().len())
            .map(|f| {
                let x = g.spec().point(f);
                (g.values()[f] - (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp() / (2.0 * PI)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn laplace_moments() {
        let g: DensityGrid<f64> = FamilySpec::new(FamilyName::Laplace, 1, vec![1.0], 0.005).generate().unwrap();
        assert_abs_diff_eq!(g.interpolate(&[0.0]), 0.5, epsilon = 1e-5);
        let m = g.moments().unwrap();
        assert_abs_diff_eq!(m.cov.get(0, 0), 2.0, epsilon = 1e-4);
    }

    #[test]
    fn every_family_is_log_concave_with_analytic_moments() {
        for dim in 1..=2 {
            for name in FamilyName::ALL {
                let spec = FamilySpec::with_variance(name, dim, 1.0, [0.002, 0.01][dim - 1]);
                let g: DensityGrid<f64> = spec.generate().unwrap();
                assert!(g.check_log_concave(LineSet::AxesAndDiagonals, LOG_CONCAVITY_TOL).passed, "{name} {dim}");
                let (mean, var) = spec.analytic_moments().unwrap();
                let m = g.moments().unwrap();
                // point-sampled indicators of curved or slanted bodies converge slowest
                let tol = match name {
                    FamilyName::UniformBall | FamilyName::UniformSimplex => 2e-2,
                    _ => 1e-4,
                };
                for a in 0..dim {
                    assert_abs_diff_eq!(m.mean[a], mean[a], epsilon = tol);
                    assert!((m.cov.get(a, a) - var[a]).abs() <= tol, "{name} {dim} var {}", m.cov.get(a, a));
                }
            }
        }
    }

    #[test]
    fn box_detector() {
        let sq: DensityGrid<f64> = FamilySpec::new(FamilyName::UniformBox, 2, vec![1.0, 2.0], 0.02).generate().unwrap();
        assert!(is_uniform_box(&sq, 0.05));
        for name in FamilyName::ALL.into_iter().filter(|n| *n != FamilyName::UniformBox) {
            let g: DensityGrid<f64> = FamilySpec::with_variance(name, 2, 1.0, 0.02).generate().unwrap();
            assert!(!is_uniform_box(&g, 0.05), "{name}");
        }
        let tri: DensityGrid<f64> = FamilySpec::new(FamilyName::Triangle, 1, vec![1.0], 0.01).generate().unwrap();
        assert!(!is_uniform_box(&tri, 0.05));
    }

    #[test]
    fn rotated_square_is_not_a_box() {
        let spec = GridSpec::centered(&[201, 201], &[0.01, 0.01]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let g = DensityGrid::from_fn(spec, |x| {
            let (u, v) = (s * (x[0] + x[1]), s * (x[0] - x[1]));
            if u.abs() <= 0.5 && v.abs() <= 0.5 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
        .normalize()
        .unwrap();
        assert!(!is_uniform_box(&g, 0.05));
    }

    #[test]
    fn bad_parameters() {
        let bad = [
            FamilySpec::new(FamilyName::Gaussian, 4, vec![1.0], 0.1),
            FamilySpec::new(FamilyName::Gaussian, 2, vec![1.0, 2.0, 3.0], 0.1),
            FamilySpec::new(FamilyName::UniformBall, 2, vec![1.0, 2.0], 0.1),
            FamilySpec::new(FamilyName::Laplace, 1, vec![-1.0], 0.1),
            FamilySpec::new(FamilyName::Triangle, 1, vec![1.0], 0.0),
        ];
        for spec in bad {
            assert!(matches!(spec.generate::<f64>(), Err(Error::BadParameters(_))), "{spec:?}");
        }
    }

    #[test]
    fn spec_json() {
        let s: FamilySpec = serde_json::from_str(r#"{"name":"uniform_box","dim":2,"params":[1.0,2.0],"h":0.01}"#).unwrap();
        assert_eq!(s.name, FamilyName::UniformBox);
        assert_eq!("laplace".parse::<FamilyName>().unwrap(), FamilyName::Laplace);
    }

    #[test]
    fn corpus_covers_everything() {
        let c = corpus();
        assert_eq!(c.len(), 21);
        for s in &c {
            let n: usize = s.axis_params().unwrap().len();
            assert_eq!(n, s.dim);
        }
    }
}
