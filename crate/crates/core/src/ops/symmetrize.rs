use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec};
use crate::scalar::{cmp_scalar, Scalar};

/// Symmetric decreasing rearrangement along `axis`.
///
/// Every grid line parallel to `axis` keeps its multiset of values: they
/// are sorted descending (stable, so ties keep index order) and laid out
/// at indices `n/2, n/2 - 1, n/2 + 1, n/2 - 2, ...`. The grid must be
/// centered on `axis`; see [`center_axis`].
pub fn symmetrize<T: Scalar>(g: &DensityGrid<T>, axis: usize) -> Result<DensityGrid<T>> {
    if axis >= g.dim() {
        return Err(Error::BadParameters(format!("axis {axis} out of range for dimension {}", g.dim())));
    }
    if !g.spec().is_centered(axis) {
        return Err(Error::GridNotCentered { axis });
    }
    let n = g.shape()[axis];
    let stride = g.spec().strides()[axis];
    let placement = center_out_order(n);
    let values = g.values();
    let lines = values.len() / n;
    // line l starts at (l / stride)·n·stride + l % stride
    let rearranged: Vec<Vec<T>> = (0..lines)
        .into_par_iter()
        .map(|l| {
            let base = (l / stride) * n * stride + l % stride;
            let mut line: Vec<T> = (0..n).map(|k| values[base + k * stride]).collect();
            line.sort_by(|x, y| cmp_scalar(y, x));
            let mut out = vec![T::zero(); n];
            for (v, &pos) in line.into_iter().zip(&placement) {
                out[pos] = v;
            }
            out
        })
        .collect();
    let mut out = vec![T::zero(); values.len()];
    for (l, line) in rearranged.into_iter().enumerate() {
        let base = (l / stride) * n * stride + l % stride;
        for (k, v) in line.into_iter().enumerate() {
            out[base + k * stride] = v;
        }
    }
    DensityGrid::new(g.spec().clone(), out)
}

fn center_out_order(n: usize) -> Vec<usize> {
    let c = n / 2;
    let mut order = Vec::with_capacity(n);
    order.push(c);
    for r in 1..=n {
        if r <= c {
            order.push(c - r);
        }
        if c + r < n {
            order.push(c + r);
        }
    }
    order
}

/// Extends `g` along `axis` to a grid placed symmetrically about 0.
///
/// When twice the origin is a whole number of cells the existing samples
/// are kept and zeros are padded on the short side; otherwise the axis is
/// resampled by interpolation onto a centered lattice of the same spacing.
pub fn center_axis<T: Scalar>(g: &DensityGrid<T>, axis: usize) -> Result<DensityGrid<T>> {
    let d = g.dim();
    if axis >= d {
        return Err(Error::BadParameters(format!("axis {axis} out of range for dimension {d}")));
    }
    if g.spec().is_centered(axis) {
        return Ok(g.clone());
    }
    let h = g.spacing()[axis];
    let lo = g.origin()[axis];
    let hi = g.spec().upper(axis);
    let reach = lo.abs().max(hi.abs());
    let twice = T::lit(2.0) * lo / h;
    let aligned = (twice - twice.round()).abs() <= T::lit(1e-9);
    let n_new = if aligned {
        (T::lit(2.0) * reach / h).round().to_usize().unwrap_or(0) + 1
    } else {
        (T::lit(2.0) * reach / h - T::lit(1e-9)).ceil().to_usize().unwrap_or(0) + 1
    };
    let mut shape = g.shape().to_vec();
    let mut origin = g.origin().to_vec();
    shape[axis] = n_new;
    origin[axis] = -T::from_usize_lossy(n_new - 1) * h / T::lit(2.0);
    let spec = GridSpec::new(shape, origin, g.spacing().to_vec())?;
    if aligned {
        let shift = ((lo - spec.origin[axis]) / h).round().to_usize().unwrap_or(0);
        let mut values = vec![T::zero(); spec.len()];
        let mut idx = vec![0usize; d];
        for &v in g.values() {
            let mut dst = idx.clone();
            dst[axis] += shift;
            values[spec.ravel(&dst)] = v;
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < g.shape()[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        DensityGrid::new(spec, values)
    } else {
        DensityGrid::from_fn(spec, |p| g.interpolate(p))
    }
}
