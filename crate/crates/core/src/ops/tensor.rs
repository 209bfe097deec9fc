use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec, MAX_DIM};
use crate::scalar::Scalar;

/// Product measure `a ⊗ b`; axes of `a` come first.
pub fn tensor_product<T: Scalar>(a: &DensityGrid<T>, b: &DensityGrid<T>) -> Result<DensityGrid<T>> {
    let dim = a.dim() + b.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionOverflow(dim));
    }
    let spec = GridSpec::new(
        [a.shape(), b.shape()].concat(),
        [a.origin(), b.origin()].concat(),
        [a.spacing(), b.spacing()].concat(),
    )?;
    let mut values = Vec::with_capacity(spec.len());
    for &x in a.values() {
        values.extend(b.values().iter().map(|&y| x * y));
    }
    DensityGrid::new(spec, values)
}
