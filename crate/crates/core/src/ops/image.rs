use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{isotropy_deviation, DensityGrid, GridSpec};
use crate::linalg::{complete_orthonormal_basis, AffineMap, LinearMap};
use crate::scalar::Scalar;
use crate::spectra::eigendecompose;

/// `|det T|` below this is treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;
pub const ISOTROPY_MEAN_TOL: f64 = 1e-6;
pub const ISOTROPY_COV_TOL: f64 = 1e-4;
const ORTHONORMAL_TOL: f64 = 1e-10;
const ISOTROPIZE_ROUNDS: usize = 5;

/// Pushforward `g ∘ T⁻¹ / |det T|` of an invertible linear map, resampled
/// onto `out` by multilinear interpolation.
pub fn linear_image<T: Scalar>(g: &DensityGrid<T>, map: &LinearMap<T>, out: &GridSpec<T>) -> Result<DensityGrid<T>> {
    affine_image(g, &AffineMap::from(map.clone()), out)
}

/// Pushforward under `x ↦ A·x + b` with invertible `A`.
pub fn affine_image<T: Scalar>(g: &DensityGrid<T>, map: &AffineMap<T>, out: &GridSpec<T>) -> Result<DensityGrid<T>> {
    let d = g.dim();
    if map.rows != d || map.cols != d || out.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} map on a {d}-dimensional grid into a {}-dimensional grid",
            map.rows,
            map.cols,
            out.dim()
        )));
    }
    let det = map.linear().det()?;
    if !(det.abs() > T::lit(SINGULAR_DET)) {
        return Err(Error::SingularMap(det.as_f64()));
    }
    let inv = map.inverse()?;
    let jac = det.abs();
    let values: Vec<T> = (0..out.len())
        .into_par_iter()
        .map(|f| g.interpolate(&inv.apply(&out.point(f))) / jac)
        .collect();
    DensityGrid::new(out.clone(), values)
}

/// Output grid covering the image of `g`'s sampled box under `map`, with one
/// spare cell per face. Default spacing is uniform across axes and keeps
/// roughly the input cell volume scaled by `|det A|`.
pub fn image_spec<T: Scalar>(g: &DensityGrid<T>, map: &AffineMap<T>, spacing: Option<&[T]>) -> Result<GridSpec<T>> {
    let d = g.dim();
    let k = map.rows;
    let mut lo = vec![T::infinity(); k];
    let mut hi = vec![T::neg_infinity(); k];
    for corner in 0..(1usize << d) {
        let p: Vec<T> = (0..d)
            .map(|a| if corner & (1 << a) != 0 { g.spec().upper(a) } else { g.origin()[a] })
            .collect();
        for (i, y) in map.apply(&p).into_iter().enumerate() {
            lo[i] = lo[i].min(y);
            hi[i] = hi[i].max(y);
        }
    }
    let h: Vec<T> = match spacing {
        Some(s) => s.to_vec(),
        None => {
            let cell = g.spec().cell_volume();
            let det = if k == d { map.linear().det()?.abs() } else { T::one() };
            let step = (cell * det).powf(T::one() / T::from_usize_lossy(d));
            vec![step; k]
        }
    };
    let lo: Vec<T> = lo.iter().zip(&h).map(|(l, s)| *l - *s).collect();
    let hi: Vec<T> = hi.iter().zip(&h).map(|(u, s)| *u + *s).collect();
    GridSpec::covering(&lo, &hi, &h)
}

/// Density of the orthogonal projection onto the span of `dirs`, expressed
/// in the coordinates `⟨x, dirs[j]⟩`.
///
/// Coordinate-axis directions are marginalized exactly; anything else is
/// rotated onto the leading axes with [`linear_image`] and the trailing
/// axes are summed out.
pub fn project<T: Scalar>(g: &DensityGrid<T>, dirs: &[Vec<T>]) -> Result<DensityGrid<T>> {
    let d = g.dim();
    let k = dirs.len();
    if k == 0 || k >= d {
        return Err(Error::BadParameters(format!("need 1..{d} directions, got {k}")));
    }
    if dirs.iter().any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch("direction length differs from grid dimension".into()));
    }
    let q = LinearMap::from_rows(dirs)?;
    if !q.has_orthonormal_rows(T::lit(ORTHONORMAL_TOL)) {
        return Err(Error::NotOrthonormal(format!("{k} directions in dimension {d}")));
    }
    let axes: Option<Vec<usize>> = dirs
        .iter()
        .map(|v| {
            let nz: Vec<usize> = (0..d).filter(|&j| v[j] != T::zero()).collect();
            (nz.len() == 1 && v[nz[0]] == T::one()).then(|| nz[0])
        })
        .collect();
    if let Some(axes) = axes {
        return marginal(g, &axes);
    }
    let basis = complete_orthonormal_basis(dirs, d);
    let rot = LinearMap::from_rows(&basis)?;
    let h = g.spacing().iter().copied().fold(T::infinity(), T::min);
    let spec = image_spec(g, &AffineMap::from(rot.clone()), Some(&vec![h; d]))?;
    let rotated = linear_image(g, &rot, &spec)?;
    let keep: Vec<usize> = (0..k).collect();
    marginal(&rotated, &keep)
}

/// Integrates out every axis not listed in `keep`; output axes follow `keep`.
fn marginal<T: Scalar>(g: &DensityGrid<T>, keep: &[usize]) -> Result<DensityGrid<T>> {
    let d = g.dim();
    let out_spec = GridSpec::new(
        keep.iter().map(|&a| g.shape()[a]).collect(),
        keep.iter().map(|&a| g.origin()[a]).collect(),
        keep.iter().map(|&a| g.spacing()[a]).collect(),
    )?;
    let dropped_volume = (0..d)
        .filter(|a| !keep.contains(a))
        .fold(T::one(), |v, a| v * g.spacing()[a]);
    let mut values = vec![T::zero(); out_spec.len()];
    let mut idx = vec![0usize; d];
    let mut sub = vec![0usize; keep.len()];
    for &v in g.values() {
        if v != T::zero() {
            for (s, &a) in sub.iter_mut().zip(keep) {
                *s = idx[a];
            }
            values[out_spec.ravel(&sub)] += v;
        }
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < g.shape()[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    values.iter_mut().for_each(|v| *v *= dropped_volume);
    DensityGrid::new(out_spec, values)
}

/// Image of `g` under an arbitrary linear map.
///
/// * invertible square maps go through [`linear_image`] on an automatic grid;
/// * square orthogonal projections become a projection onto their range,
///   expressed in an orthonormal basis of that range;
/// * wide `k×d` maps of full row rank are factored `T = L·Q` (orthonormal
///   rows `Q`), projected onto `Q` and then mapped by `L`.
///
/// The result is `k`-dimensional when the image is a `k`-dimensional subspace.
pub fn pushforward<T: Scalar>(g: &DensityGrid<T>, map: &LinearMap<T>) -> Result<DensityGrid<T>> {
    map.validate()?;
    let d = g.dim();
    if map.cols != d {
        return Err(Error::DimensionMismatch(format!("{}x{} map on dimension {d}", map.rows, map.cols)));
    }
    if map.is_square() {
        let det = map.det()?;
        if det.abs() > T::lit(SINGULAR_DET) {
            let affine = AffineMap::from(map.clone());
            let spec = image_spec(g, &affine, None)?;
            return affine_image(g, &affine, &spec);
        }
        if map.is_orthogonal_projection(T::lit(ORTHONORMAL_TOL)) {
            let eig = eigendecompose(&crate::spectra::CovMatrix::new(d, map.entries.clone())?)?;
            let dirs: Vec<Vec<T>> = (0..d)
                .filter(|&k| eig.values[k] > T::lit(0.5))
                .map(|k| eig.vector(k))
                .collect();
            if dirs.is_empty() {
                return Err(Error::SingularMap(0.0));
            }
            if dirs.len() == d {
                return Ok(g.clone());
            }
            return project(g, &dirs);
        }
        return Err(Error::SingularMap(det.as_f64()));
    }
    if map.rows > map.cols {
        return Err(Error::SingularMap(0.0));
    }
    let (l, q) = map.lq()?;
    let rows: Vec<Vec<T>> = (0..q.rows).map(|i| q.row(i).to_vec()).collect();
    let projected = project(g, &rows)?;
    let affine = AffineMap::from(l);
    let spec = image_spec(&projected, &affine, None)?;
    affine_image(&projected, &affine, &spec)
}

/// Affine image in isotropic position: mean 0 and identity covariance.
///
/// The map `x ↦ cov^{-1/2}(x − mean)` is refined by re-measuring the
/// resampled grid and composing a correction (always resampling from `g`
/// itself) until the covariance is within `1e-4` of the identity. After
/// each resampling the grid is renormalized to unit mass, then the residual
/// mean and axis variances are removed by shifting and rescaling its axes.
/// When no spacing is given and the rounds stall, they are repeated once on
/// a lattice of half the default spacing.
pub fn isotropize<T: Scalar>(g: &DensityGrid<T>) -> Result<(DensityGrid<T>, AffineMap<T>)> {
    isotropize_with_spacing(g, None)
}

pub fn isotropize_with_spacing<T: Scalar>(
    g: &DensityGrid<T>,
    spacing: Option<T>,
) -> Result<(DensityGrid<T>, AffineMap<T>)> {
    isotropize_image(g, &LinearMap::identity(g.dim()), spacing)
}

/// Isotropic position of the image of `g` under the invertible map `pre`,
/// resampled once from `g`. The returned map acts on `g`'s coordinates and
/// already includes `pre`.
pub fn isotropize_image<T: Scalar>(
    g: &DensityGrid<T>,
    pre: &LinearMap<T>,
    spacing: Option<T>,
) -> Result<(DensityGrid<T>, AffineMap<T>)> {
    let g = g.normalize()?;
    let d = g.dim();
    if pre.rows != d || pre.cols != d {
        return Err(Error::DimensionMismatch(format!("{}x{} map on dimension {d}", pre.rows, pre.cols)));
    }
    let whitening = |mean: &[T], cov: &crate::spectra::CovMatrix<T>| -> Result<AffineMap<T>> {
        let eig = eigendecompose(cov)?;
        if !(eig.values[0] > T::lit(1e-10)) {
            return Err(Error::DegenerateCovariance(eig.values[0].as_f64()));
        }
        let a = cov.power(-T::lit(0.5))?.to_linear_map();
        let offset = a.apply(mean).into_iter().map(|v| -v).collect();
        AffineMap::new(a, offset)
    };
    let m = g.moments()?;
    // moments of the image: T·mean and T·cov·Tᵀ
    let tc = pre.matmul(&m.cov.to_linear_map())?.matmul(&pre.transpose())?;
    let cov = crate::spectra::CovMatrix::new(d, tc.entries)?;
    let start = whitening(&pre.apply(&m.mean), &cov)?.compose(&AffineMap::from(pre.clone()))?;
    let lattice = image_spec(&g, &start, spacing.map(|s| vec![s; d]).as_deref())?;
    match isotropize_rounds(&g, start.clone(), lattice.clone(), &whitening) {
        // an oblique edge aliases differently under every correction on a
        // coarse lattice; a finer one makes the moments smooth in the map
        Err(Error::IsotropizationFailed { .. }) if spacing.is_none() => {
            let h = lattice.spacing.iter().copied().fold(T::infinity(), T::min) / T::lit(2.0);
            let fine = image_spec(&g, &start, Some(&vec![h; d]))?;
            isotropize_rounds(&g, start, fine, &whitening)
        }
        r => r,
    }
}

fn isotropize_rounds<T: Scalar>(
    g: &DensityGrid<T>,
    mut map: AffineMap<T>,
    mut lattice: GridSpec<T>,
    whitening: &dyn Fn(&[T], &crate::spectra::CovMatrix<T>) -> Result<AffineMap<T>>,
) -> Result<(DensityGrid<T>, AffineMap<T>)> {
    let d = g.dim();
    let mut last = (T::infinity(), T::infinity());
    // later rounds reuse the previous output lattice: the corrections are
    // small, and a fixed lattice keeps sharp edges from aliasing differently
    for _ in 0..ISOTROPIZE_ROUNDS {
        let out = affine_image(g, &map, &lattice)?.normalize()?;
        // residual mean and axis variances are removed exactly by relabeling
        // the output grid: a shift, then a per-axis change of spacing
        let m = out.moments()?;
        let (mut spec, mut values) = out.into_parts();
        let mut jac = T::one();
        for a in 0..d {
            let s = T::one() / m.cov.get(a, a).sqrt();
            spec.origin[a] = (spec.origin[a] - m.mean[a]) * s;
            spec.spacing[a] *= s;
            map.offset[a] = (map.offset[a] - m.mean[a]) * s;
            for j in 0..d {
                map.entries[a * d + j] *= s;
            }
            jac *= s;
        }
        values.iter_mut().for_each(|v| *v /= jac);
        lattice = spec.clone();
        let out = DensityGrid::new(spec, values)?;
        let m = out.moments()?;
        let (mean_dev, cov_dev) = isotropy_deviation(&m);
        if mean_dev <= T::lit(ISOTROPY_MEAN_TOL) && cov_dev <= T::lit(ISOTROPY_COV_TOL) {
            return Ok((out, map));
        }
        last = (mean_dev, cov_dev);
        map = whitening(&m.mean, &m.cov)?.compose(&map)?;
    }
    Err(Error::IsotropizationFailed { mean_dev: last.0.as_f64(), cov_dev: last.1.as_f64() })
}
