use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec, MAX_DIM};
use crate::scalar::{cmp_scalar, Scalar};

/// Density of `X + Y` for independent `X ~ a`, `Y ~ b`.
///
/// Direct discrete convolution scaled by the cell volume. The output grid
/// has origin `origin_a + origin_b` and `n_a + n_b - 1` samples per axis.
/// When the spacings differ, both operands are first resampled to the
/// finer spacing on each axis.
pub fn convolve<T: Scalar>(a: &DensityGrid<T>, b: &DensityGrid<T>) -> Result<DensityGrid<T>> {
    let d = a.dim();
    if b.dim() != d {
        return Err(Error::DimensionMismatch(format!("convolving dimension {d} with {}", b.dim())));
    }
    let same = a
        .spacing()
        .iter()
        .zip(b.spacing())
        .all(|(x, y)| (*x - *y).abs() <= T::lit(1e-12) * x.max(*y));
    if !same {
        let h: Vec<T> = a.spacing().iter().zip(b.spacing()).map(|(x, y)| x.min(*y)).collect();
        return convolve(&resample(a, &h)?, &resample(b, &h)?);
    }
    // a fixed operand order makes the floating-point sums, and hence the
    // result, independent of argument order
    let (a, b) = if canonical_cmp(a, b) == Ordering::Greater { (b, a) } else { (a, b) };

    let pad = |s: &[usize]| {
        let mut p = [1usize; MAX_DIM];
        p[MAX_DIM - d..].copy_from_slice(s);
        p
    };
    let na = pad(a.shape());
    let nb = pad(b.shape());
    let no: [usize; MAX_DIM] = std::array::from_fn(|k| na[k] + nb[k] - 1);
    let spec = GridSpec::new(
        no[MAX_DIM - d..].to_vec(),
        a.origin().iter().zip(b.origin()).map(|(x, y)| *x + *y).collect(),
        a.spacing().to_vec(),
    )?;
    let cell = a.spec().cell_volume();
    let (av, bv) = (a.values(), b.values());
    let values: Vec<T> = (0..spec.len())
        .into_par_iter()
        .map(|f| {
            let m = [f / (no[1] * no[2]), (f / no[2]) % no[1], f % no[2]];
            let lo: [usize; MAX_DIM] = std::array::from_fn(|k| (m[k] + 1).saturating_sub(na[k]));
            let hi: [usize; MAX_DIM] = std::array::from_fn(|k| m[k].min(nb[k] - 1));
            let mut acc = T::zero();
            for j0 in lo[0]..=hi[0] {
                for j1 in lo[1]..=hi[1] {
                    let brow = (j0 * nb[1] + j1) * nb[2];
                    let arow = ((m[0] - j0) * na[1] + (m[1] - j1)) * na[2];
                    for j2 in lo[2]..=hi[2] {
                        acc += av[arow + m[2] - j2] * bv[brow + j2];
                    }
                }
            }
            acc * cell
        })
        .collect();
    DensityGrid::new(spec, values)
}

fn canonical_cmp<T: Scalar>(a: &DensityGrid<T>, b: &DensityGrid<T>) -> Ordering {
    let seq = |x: &[T], y: &[T]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| cmp_scalar(p, q))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or_else(|| x.len().cmp(&y.len()))
    };
    a.shape()
        .cmp(b.shape())
        .then_with(|| seq(a.origin(), b.origin()))
        .then_with(|| seq(a.values(), b.values()))
}

/// Resamples `g` onto spacing `h` by multilinear interpolation. The new
/// samples are placed symmetrically within the old sampled range, so a
/// centered grid stays centered.
pub fn resample<T: Scalar>(g: &DensityGrid<T>, h: &[T]) -> Result<DensityGrid<T>> {
    let d = g.dim();
    if h.len() != d {
        return Err(Error::DimensionMismatch(format!("{} spacings for dimension {d}", h.len())));
    }
    let mut shape = Vec::with_capacity(d);
    let mut origin = Vec::with_capacity(d);
    for a in 0..d {
        let lo = g.origin()[a];
        let hi = g.spec().upper(a);
        let n = ((hi - lo) / h[a] + T::lit(1e-9)).floor().to_usize().unwrap_or(0) + 1;
        let mid = (lo + hi) / T::lit(2.0);
        shape.push(n);
        origin.push(mid - T::from_usize_lossy(n - 1) * h[a] / T::lit(2.0));
    }
    let spec = GridSpec::new(shape, origin, h.to_vec())?;
    let values = (0..spec.len()).into_par_iter().map(|f| g.interpolate(&spec.point(f))).collect();
    DensityGrid::new(spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn centered_box(width: f64, h: f64) -> DensityGrid<f64> {
        let n = (width / h).round() as usize;
        DensityGrid::from_fn(GridSpec::centered(&[n], &[h]).unwrap(), |_| 1.0 / width).unwrap()
    }

    fn gauss(sigma: f64, h: f64) -> DensityGrid<f64> {
        let m = (9.0 * sigma / h).ceil() as usize;
        DensityGrid::from_fn(GridSpec::centered(&[2 * m + 1], &[h]).unwrap(), |x: &[f64]| {
            (-x[0] * x[0] / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt())
        })
        .unwrap()
    }

    #[test]
    fn box_with_box_is_triangle() {
        let h = 0.01;
        let u = centered_box(1.0, h);
        let t = convolve(&u, &u).unwrap();
        assert_eq!(t.shape(), &[199]);
        let worst = (0..199)
            .map(|k| {
                let x: f64 = t.spec().coord(0, k);
                (t.values()[k] - (1.0 - x.abs()).max(0.0)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= h, "{worst}");
        assert_abs_diff_eq!(t.interpolate(&[0.0]), 1.0, epsilon = h);
        assert_abs_diff_eq!(t.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussians_add_variances() {
        let h = 0.005;
        let (s1, s2) = (0.6f64, 0.8f64);
        let c = convolve(&gauss(s1, h), &gauss(s2, h)).unwrap();
        let s = (s1 * s1 + s2 * s2).sqrt();
        let worst = (0..c.values().len())
            .map(|k| {
                let x = c.spec().coord(0, k);
                (c.values()[k] - (-x * x / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-5, "{worst}");
    }

    #[test]
    fn spike_is_approximate_identity() {
        let h = 0.01;
        let spike = DensityGrid::new(GridSpec::centered(&[1], &[h]).unwrap(), vec![1.0 / h]).unwrap();
        let g = gauss(1.0, h);
        let c = convolve(&spike, &g).unwrap();
        assert!(c.sup_distance(&g) < 1e-14);
    }

    #[test]
    fn commutes_bit_exactly_in_2d() {
        let a = DensityGrid::from_fn(GridSpec::centered(&[7, 5], &[0.1, 0.1]).unwrap(), |x: &[f64]| {
            (-x[0] * x[0] - 2.0 * x[1] * x[1] + 0.3 * x[0]).exp()
        })
        .unwrap();
        let b = DensityGrid::from_fn(GridSpec::new(vec![4, 6], vec![0.2, -0.3], vec![0.1, 0.1]).unwrap(), |x: &[f64]| {
            1.0 + x[0] * x[1]
        })
        .unwrap();
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        assert_eq!(ab, ba);
        assert_abs_diff_eq!(ab.mass(), a.mass() * b.mass(), epsilon = 1e-12);
    }

    #[test]
    fn mixed_spacing_resamples_to_finer() {
        let a = centered_box(1.0, 0.01);
        let b = centered_box(1.0, 0.02);
        let c = convolve(&a, &b).unwrap();
        assert_eq!(c.spacing(), &[0.01]);
        assert_abs_diff_eq!(c.interpolate(&[0.0]), 1.0, epsilon = 0.03);
    }

    #[test]
    fn dimension_mismatch() {
        let a = centered_box(1.0, 0.1);
        let b = DensityGrid::from_fn(GridSpec::centered(&[3, 3], &[0.1, 0.1]).unwrap(), |_| 1.0).unwrap();
        assert!(matches!(convolve(&a, &b), Err(Error::DimensionMismatch(_))));
    }
}
