use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec};
use crate::scalar::Scalar;

/// A `(d-1)`-dimensional function on the hyperplane orthogonal to `axis`.
/// Values need not integrate to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileGrid<T> {
    pub grid: DensityGrid<T>,
    pub axis: usize,
}

fn drop_axis<T: Scalar>(g: &DensityGrid<T>, axis: usize) -> Result<GridSpec<T>> {
    let d = g.dim();
    if d < 2 {
        return Err(Error::DimensionTooLow(d));
    }
    if axis >= d {
        return Err(Error::BadParameters(format!("axis {axis} out of range for dimension {d}")));
    }
    let keep = |v: &[T]| v.iter().enumerate().filter(|(a, _)| *a != axis).map(|(_, x)| *x).collect();
    GridSpec::new(
        g.shape().iter().enumerate().filter(|(a, _)| *a != axis).map(|(_, n)| *n).collect(),
        keep(g.origin()),
        keep(g.spacing()),
    )
}

/// Visits every line parallel to `axis`; line `l` is flat index `l` of the
/// reduced grid.
fn for_each_line<T: Scalar>(g: &DensityGrid<T>, axis: usize, mut f: impl FnMut(usize, &mut dyn Iterator<Item = T>)) {
    let n = g.shape()[axis];
    let stride = g.spec().strides()[axis];
    let lines = g.values().len() / n;
    let v = g.values();
    for l in 0..lines {
        let base = (l / stride) * n * stride + l % stride;
        f(l, &mut (0..n).map(|k| v[base + k * stride]));
    }
}

/// `g'(z) = max_t g(z + t e_axis)` over the sampled `t`.
pub fn sup_profile<T: Scalar>(g: &DensityGrid<T>, axis: usize) -> Result<ProfileGrid<T>> {
    let spec = drop_axis(g, axis)?;
    let mut values = vec![T::zero(); spec.len()];
    for_each_line(g, axis, |l, line| values[l] = line.fold(T::zero(), |m, v| m.max(v)));
    Ok(ProfileGrid { grid: DensityGrid::new(spec, values)?, axis })
}

/// Slice of `g` on the hyperplane `x_axis = level`, linearly interpolated
/// between the neighbouring lattice planes. Levels within `1e-9` cells of
/// a lattice plane return that plane's samples exactly.
pub fn restrict_hyperplane<T: Scalar>(g: &DensityGrid<T>, axis: usize, level: T) -> Result<DensityGrid<T>> {
    let spec = drop_axis(g, axis)?;
    let lo = g.origin()[axis];
    let hi = g.spec().upper(axis);
    let h = g.spacing()[axis];
    let slack = T::lit(1e-9) * h;
    if !(level >= lo - slack && level <= hi + slack) {
        return Err(Error::LevelOutOfRange { level: level.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let n = g.shape()[axis];
    let t = ((level - lo) / h).max(T::zero()).min(T::from_usize_lossy(n - 1));
    let snapped = t.round();
    let (k0, frac) = if (t - snapped).abs() <= T::lit(1e-9) {
        (snapped.to_usize().unwrap_or(0), T::zero())
    } else {
        let k = t.floor().to_usize().unwrap_or(0).min(n - 2);
        (k, t - T::from_usize_lossy(k))
    };
    let mut values = vec![T::zero(); spec.len()];
    for_each_line(g, axis, |l, line| {
        let mut line = line.skip(k0);
        let a = line.next().unwrap_or(T::zero());
        values[l] = if frac == T::zero() {
            a
        } else {
            let b = line.next().unwrap_or(T::zero());
            a * (T::one() - frac) + b * frac
        };
    });
    DensityGrid::new(spec, values)
}
