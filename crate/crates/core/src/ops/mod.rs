//! Transformations of grid-sampled measures: products, linear images,
//! projections, convolution, symmetrization, isotropization, sup-profiles
//! and hyperplane sections.

mod convolve;
mod image;
mod profile;
mod symmetrize;
mod tensor;

pub use convolve::{convolve, resample};
pub use image::{
    affine_image, image_spec, isotropize, isotropize_image, isotropize_with_spacing, linear_image, project, pushforward,
    ISOTROPY_COV_TOL, ISOTROPY_MEAN_TOL, SINGULAR_DET,
};
pub use profile::{restrict_hyperplane, sup_profile, ProfileGrid};
pub use symmetrize::{center_axis, symmetrize};
pub use tensor::tensor_product;
