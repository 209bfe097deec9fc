//! Directional Lipschitz estimates, the tent-kernel smoothing functional and
//! the profile-convolution integral that bounds Lipschitz constants of sums
//! of independent log-concave vectors.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{FamilyName, FamilySpec};
use crate::grid::DensityGrid;
use crate::ops::{convolve, sup_profile, tensor_product};
use crate::scalar::Scalar;
use crate::spectra::CovMatrix;

/// Ratio `L(h/2) / L(h)` above which a jump is reported.
pub const DISCONTINUITY_RATIO: f64 = 1.6;
/// Tolerance of the covariance contract of [`mainlemma_integral`].
pub const COVARIANCE_CONTRACT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport<T> {
    pub axis: usize,
    pub direction: Vec<T>,
    pub constant: T,
    pub discontinuity_flag: bool,
    pub refinement_ratio: Option<T>,
}

fn axis_constant<T: Scalar>(g: &DensityGrid<T>, axis: usize) -> T {
    let n = g.shape()[axis];
    let stride = g.spec().strides()[axis];
    let h = g.spacing()[axis];
    let v = g.values();
    let mut best = T::zero();
    for l in 0..v.len() / n {
        let base = (l / stride) * n * stride + l % stride;
        // the density vanishes outside the grid
        let mut prev = T::zero();
        for k in 0..n {
            let cur = v[base + k * stride];
            best = best.max((cur - prev).abs());
            prev = cur;
        }
        best = best.max(prev);
    }
    best / h
}

/// `max |f(x + h e_axis) − f(x)| / h` over adjacent samples, counting the
/// steps onto the zero outside the grid. With a `refined` grid of the same
/// density (half the step) the refinement ratio decides the jump flag.
pub fn directional_lipschitz<T: Scalar>(
    g: &DensityGrid<T>,
    axis: usize,
    refined: Option<&DensityGrid<T>>,
) -> Result<LipschitzReport<T>> {
    let d = g.dim();
    if axis >= d {
        return Err(Error::BadParameters(format!("axis {axis} out of range for dimension {d}")));
    }
    let constant = axis_constant(g, axis);
    let ratio = match refined {
        Some(r) if r.dim() != d => {
            return Err(Error::DimensionMismatch(format!("refined grid has dimension {}, expected {d}", r.dim())))
        }
        Some(r) if constant > T::zero() => Some(axis_constant(r, axis) / constant),
        Some(_) => Some(T::one()),
        None => None,
    };
    let mut direction = vec![T::zero(); d];
    direction[axis] = T::one();
    Ok(LipschitzReport {
        axis,
        direction,
        constant,
        discontinuity_flag: ratio.is_some_and(|r| r > T::lit(DISCONTINUITY_RATIO)),
        refinement_ratio: ratio,
    })
}

/// `∫ h_{δ,z} g dx / ∫ h_{δ,z} dx` with the tent `h_{δ,z}(x) = (1 − |x−z|/δ)₊`.
/// The denominator is exact: `δ`, `πδ²/3`, `πδ³/3` in dimensions 1, 2, 3.
pub fn smooth_functional<T: Scalar>(g: &DensityGrid<T>, delta: T, z: &[T]) -> Result<T> {
    let d = g.dim();
    if z.len() != d {
        return Err(Error::DimensionMismatch(format!("point of length {} for dimension {d}", z.len())));
    }
    let hmax = g.spacing().iter().copied().fold(T::zero(), T::max);
    if !(delta > T::lit(2.0) * hmax) {
        return Err(Error::DeltaTooSmall { delta: delta.as_f64(), spacing: hmax.as_f64() });
    }
    let spec = g.spec();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..d {
        let h = spec.spacing[a];
        let top = T::from_usize_lossy(spec.shape[a] - 1);
        let t0 = ((z[a] - delta - spec.origin[a]) / h).ceil().max(T::zero());
        let t1 = ((z[a] + delta - spec.origin[a]) / h).floor().min(top);
        if t1 < t0 {
            return Ok(T::zero());
        }
        lo[a] = t0.to_usize().unwrap_or(0);
        hi[a] = t1.to_usize().unwrap_or(0);
    }
    let mut idx = lo;
    let mut acc = T::zero();
    loop {
        let mut r2 = T::zero();
        for a in 0..d {
            let dx = spec.coord(a, idx[a]) - z[a];
            r2 += dx * dx;
        }
        let k = T::one() - r2.sqrt() / delta;
        if k > T::zero() {
            acc += k * g.value_at(&idx[..d]);
        }
        let mut a = d;
        loop {
            if a == 0 {
                let pi = T::PI();
                let denom = match d {
                    1 => delta,
                    2 => pi * delta * delta / T::lit(3.0),
                    _ => pi * delta * delta * delta / T::lit(3.0),
                };
                return Ok(acc * spec.cell_volume() / denom);
            }
            a -= 1;
            if idx[a] < hi[a] {
                idx[a] += 1;
                break;
            }
            idx[a] = lo[a];
        }
    }
}

/// `∫_{e_i^⊥} g'(v) h'(z − v) dv` for the sup-profiles `g'`, `h'` along
/// `axis`; in dimension 1 the product `max g · max h`.
///
/// The covariances must be diagonal and sum to the identity within `1e-4`.
pub fn mainlemma_integral<T: Scalar>(g: &DensityGrid<T>, h: &DensityGrid<T>, axis: usize, z: &[T]) -> Result<T> {
    let d = g.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch(format!("dimensions {d} and {}", h.dim())));
    }
    if axis >= d {
        return Err(Error::BadParameters(format!("axis {axis} out of range for dimension {d}")));
    }
    if z.len() != d - 1 {
        return Err(Error::DimensionMismatch(format!("point of length {} in a {}-dimensional hyperplane", z.len(), d - 1)));
    }
    let cg = g.moments()?.cov;
    let ch = h.moments()?.cov;
    let tol = T::lit(COVARIANCE_CONTRACT_TOL);
    let sum_dev = cg.add(&ch)?.max_abs_diff(&CovMatrix::identity(d));
    if sum_dev > tol {
        return Err(Error::CovarianceContractViolated(format!("cov(g) + cov(h) deviates from Id by {sum_dev}")));
    }
    let off = cg.max_off_diagonal().max(ch.max_off_diagonal());
    if off > tol {
        return Err(Error::CovarianceContractViolated(format!("off-diagonal covariance {off}")));
    }
    if d == 1 {
        return Ok(g.max_value() * h.max_value());
    }
    let pg = sup_profile(g, axis)?;
    let ph = sup_profile(h, axis)?;
    Ok(convolve(&pg.grid, &ph.grid)?.interpolate(z))
}

/// One row of a Lipschitz scaling sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub family: String,
    pub dim: usize,
    pub axis: usize,
    #[serde(rename = "varX")]
    pub var_x: f64,
    pub lipschitz: f64,
    pub product: f64,
}

/// Builds `X` from `fx` with variance `var_x` and `Y` from `fy` with
/// variance `1 − var_x` on every axis, and reports the Lipschitz constant
/// `L` of the density of `X + Y` along `axis` together with
/// `L·√(var_x·(1 − var_x))`.
pub fn lipschitz_scaling_check(
    var_x: f64,
    fx: FamilyName,
    fy: FamilyName,
    dim: usize,
    axis: usize,
    h: f64,
) -> Result<ScalingRow> {
    if !(var_x > 0.0 && var_x < 1.0) {
        return Err(Error::BadParameters(format!("varX {var_x} outside (0, 1)")));
    }
    if fx == FamilyName::UniformSimplex || fy == FamilyName::UniformSimplex {
        return Err(Error::BadParameters("uniform_simplex has a non-diagonal covariance".into()));
    }
    let sum = if fx.is_product() && fy.is_product() {
        // both are products of identical factors, so the sum is the product
        // of the one-dimensional sums
        let x: DensityGrid<f64> = FamilySpec::with_variance(fx, 1, var_x, h).generate()?;
        let y: DensityGrid<f64> = FamilySpec::with_variance(fy, 1, 1.0 - var_x, h).generate()?;
        let line = convolve(&x, &y)?;
        let mut sum = line.clone();
        for _ in 1..dim {
            sum = tensor_product(&sum, &line)?;
        }
        sum
    } else {
        let x: DensityGrid<f64> = FamilySpec::with_variance(fx, dim, var_x, h).generate()?;
        let y: DensityGrid<f64> = FamilySpec::with_variance(fy, dim, 1.0 - var_x, h).generate()?;
        convolve(&x, &y)?
    };
    let lipschitz = directional_lipschitz(&sum, axis, None)?.constant;
    Ok(ScalingRow {
        family: format!("{fx}+{fy}"),
        dim,
        axis,
        var_x,
        lipschitz,
        product: lipschitz * (var_x * (1.0 - var_x)).sqrt(),
    })
}

/// The nine variance splits `0.1, 0.2, ..., 0.9`.
pub fn default_splits() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

pub fn lipschitz_sweep(
    fx: FamilyName,
    fy: FamilyName,
    dim: usize,
    axis: usize,
    h: f64,
    splits: &[f64],
) -> Result<Vec<ScalingRow>> {
    splits.iter().map(|&v| lipschitz_scaling_check(v, fx, fy, dim, axis, h)).collect()
}

/// CSV with columns `family,dim,axis,varX,lipschitz,product`.
pub fn write_sweep_csv<W: Write>(rows: &[ScalingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `mainlemma_integral(g, h, axis, 0)·√(s²(1 − s²))` for `g` from `fx` with
/// variance `s2` per axis and `h` from `fy` with variance `1 − s2`. Both
/// grids are rescaled so their sampled variances are exact.
pub fn mainlemma_product(fx: FamilyName, fy: FamilyName, dim: usize, s2: f64, h: f64) -> Result<f64> {
    if !(s2 > 0.0 && s2 < 1.0) {
        return Err(Error::BadParameters(format!("s² {s2} outside (0, 1)")));
    }
    let calibrated = |name: FamilyName, var: f64| -> Result<DensityGrid<f64>> {
        let g: DensityGrid<f64> = FamilySpec::with_variance(name, dim, var, h).generate()?;
        let m = g.moments()?;
        let s: Vec<f64> = (0..dim).map(|a| (var / m.cov.get(a, a)).sqrt()).collect();
        g.scale_axes(&s)
    };
    let g = calibrated(fx, s2)?;
    let k = calibrated(fy, 1.0 - s2)?;
    let v = mainlemma_integral(&g, &k, 0, &vec![0.0; dim - 1])?;
    Ok(v * (s2 * (1.0 - s2)).sqrt())
}

/// `L·√(Var X · Var Y)` for uniform densities of widths `w1`, `w2` on the
/// line; the exact value is `1/12` whatever the widths.
pub fn uniform_pair_product(w1: f64, w2: f64, h: f64) -> Result<f64> {
    let a: DensityGrid<f64> = FamilySpec::new(FamilyName::UniformBox, 1, vec![w1], h).generate()?;
    let b: DensityGrid<f64> = FamilySpec::new(FamilyName::UniformBox, 1, vec![w2], h).generate()?;
    let l = directional_lipschitz(&convolve(&a, &b)?, 0, None)?.constant;
    Ok(l * w1 * w2 / 12.0)
}

/// `∫ |g(t + s) − g(t)| dt` for a 1-D grid, with `g` zero outside the grid
/// and shifts evaluated by interpolation.
pub fn shift_l1<T: Scalar>(g: &DensityGrid<T>, s: T) -> Result<T> {
    if g.dim() != 1 {
        return Err(Error::DimensionMismatch(format!("shift integral needs a 1-D grid, got {}", g.dim())));
    }
    let h = g.spacing()[0];
    let pad = (s.abs() / h).ceil().to_usize().unwrap_or(0) + 1;
    let n = g.shape()[0];
    let mut acc = T::zero();
    for k in 0..(n + 2 * pad) {
        let t = g.origin()[0] + (T::from_usize_lossy(k) - T::from_usize_lossy(pad)) * h;
        acc += (g.interpolate(&[t + s]) - g.interpolate(&[t])).abs();
    }
    Ok(acc * h)
}

/// Right-hand side `2|s|·max g + 4h·max g` of the shift bound.
pub fn shift_l1_bound<T: Scalar>(g: &DensityGrid<T>, s: T) -> T {
    let m = g.max_value();
    T::lit(2.0) * s.abs() * m + T::lit(4.0) * g.spacing()[0] * m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn unit_interval(h: f64) -> DensityGrid<f64> {
        let n = (1.0 / h).round() as usize;
        DensityGrid::from_fn(GridSpec::new(vec![n], vec![h / 2.0], vec![h]).unwrap(), |_| 1.0).unwrap()
    }

    #[test]
    fn triangle_slope() {
        let g: DensityGrid<f64> = FamilySpec::new(FamilyName::Triangle, 1, vec![1.0], 0.01).generate().unwrap();
        let r = directional_lipschitz(&g, 0, None).unwrap();
        assert_abs_diff_eq!(r.constant, 1.0, epsilon = 0.02);
        assert!(!r.discontinuity_flag);
    }

    #[test]
    fn jump_is_flagged() {
        let h = 0.01;
        let coarse = unit_interval(h);
        let fine = unit_interval(h / 2.0);
        let r = directional_lipschitz(&coarse, 0, Some(&fine)).unwrap();
        assert_abs_diff_eq!(r.constant, 1.0 / h, epsilon = 1e-9);
        assert_abs_diff_eq!(r.refinement_ratio.unwrap(), 2.0, epsilon = 1e-9);
        assert!(r.discontinuity_flag);
    }

    #[test]
    fn gaussian_slope() {
        let g: DensityGrid<f64> = FamilySpec::new(FamilyName::Gaussian, 1, vec![1.0], 0.005).generate().unwrap();
        let fine: DensityGrid<f64> = FamilySpec::new(FamilyName::Gaussian, 1, vec![1.0], 0.0025).generate().unwrap();
        let r = directional_lipschitz(&g, 0, Some(&fine)).unwrap();
        let want = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert!((r.constant - want).abs() <= 0.01 * want, "{}", r.constant);
        assert!(!r.discontinuity_flag);
    }

    #[test]
    fn smoothing_constant_and_linear() {
        let h = 0.01;
        let spec = GridSpec::centered(&[401], &[h]).unwrap();
        let one = DensityGrid::from_fn(spec.clone(), |_| 1.0).unwrap();
        assert_abs_diff_eq!(smooth_functional(&one, 0.5, &[0.3]).unwrap(), 1.0, epsilon = 1e-12);
        let lin = DensityGrid::from_fn(spec, |x| x[0] + 2.0).unwrap();
        assert_abs_diff_eq!(smooth_functional(&lin, 0.5, &[0.3]).unwrap(), 2.3, epsilon = 1e-12);
        assert!(matches!(smooth_functional(&lin, 0.015, &[0.0]), Err(Error::DeltaTooSmall { .. })));
    }

    #[test]
    fn smoothing_constant_2d_3d() {
        let h = 0.02;
        let g = DensityGrid::from_fn(GridSpec::centered(&[151, 151], &[h, h]).unwrap(), |_| 1.0).unwrap();
        // lattice sum of the cone against its exact volume
        assert_abs_diff_eq!(smooth_functional(&g, 1.0, &[0.0, 0.1]).unwrap(), 1.0, epsilon = 1e-4);
        let g = DensityGrid::from_fn(GridSpec::centered(&[61, 61, 61], &[0.05; 3]).unwrap(), |_| 1.0).unwrap();
        assert_abs_diff_eq!(smooth_functional(&g, 1.0, &[0.0; 3]).unwrap(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn mainlemma_gaussian_oracle() {
        // profiles are N(0,s²)/(s√2π) and N(0,1-s²)/(σ√2π); their convolution
        // at 0 is φ(0)/(2π s σ)
        let h = 0.02;
        let s2: f64 = 0.5;
        let g: DensityGrid<f64> = FamilySpec::with_variance(FamilyName::Gaussian, 2, s2, h).generate().unwrap();
        let k: DensityGrid<f64> = FamilySpec::with_variance(FamilyName::Gaussian, 2, 1.0 - s2, h).generate().unwrap();
        let v = mainlemma_integral(&g, &k, 1, &[0.0]).unwrap();
        let want = 1.0 / (2.0 * PI * (s2 * (1.0 - s2)).sqrt()) / (2.0 * PI).sqrt();
        assert_abs_diff_eq!(v, want, epsilon = 1e-6);
        assert_abs_diff_eq!(want, 1.0 / (PI * (2.0 * PI).sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn mainlemma_contract() {
        let g: DensityGrid<f64> = FamilySpec::with_variance(FamilyName::Gaussian, 2, 0.5, 0.05).generate().unwrap();
        assert!(mainlemma_integral(&g, &g.clone(), 0, &[0.0]).is_ok());
        let small: DensityGrid<f64> = FamilySpec::with_variance(FamilyName::Gaussian, 2, 0.2, 0.05).generate().unwrap();
        assert!(matches!(mainlemma_integral(&g, &small, 0, &[0.0]), Err(Error::CovarianceContractViolated(_))));
    }

    #[test]
    fn uniform_pairs_give_one_twelfth() {
        for (w1, w2) in [(1.0, 1.0), (0.5, 2.0), (1.2, 0.8)] {
            assert_abs_diff_eq!(uniform_pair_product(w1, w2, 0.005).unwrap(), 1.0 / 12.0, epsilon = 0.03 / 12.0);
        }
    }

    #[test]
    fn gaussian_pair_half_split() {
        let r = lipschitz_scaling_check(0.5, FamilyName::Gaussian, FamilyName::Gaussian, 1, 0, 0.005).unwrap();
        let want = (-0.5f64).exp() / (2.0 * PI).sqrt() * 0.5;
        assert!((r.product - want).abs() <= 0.01 * want, "{}", r.product);
        assert!(lipschitz_scaling_check(1.0, FamilyName::Gaussian, FamilyName::Gaussian, 1, 0, 0.01).is_err());
    }

    #[test]
    fn sweep_csv_columns() {
        let rows =
            lipschitz_sweep(FamilyName::UniformBox, FamilyName::Gaussian, 1, 0, 0.01, &[0.3, 0.7]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "family,dim,axis,varX,lipschitz,product");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn shift_integral_of_box() {
        // |1_{[0,1]}(t+s) − 1_{[0,1]}(t)| integrates to 2s
        let g = unit_interval(0.01);
        assert_abs_diff_eq!(shift_l1(&g, 0.1).unwrap(), 0.2, epsilon = 1e-12);
        assert!(shift_l1(&g, 0.1).unwrap() <= shift_l1_bound(&g, 0.1));
    }
}
