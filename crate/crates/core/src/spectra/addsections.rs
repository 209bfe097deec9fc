use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{eigendecompose, CovMatrix};

/// `W² + V² = Id` must hold to this tolerance.
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Extreme eigenvalues of `W·G1·W + V·G2·V` for diagonal `W`, `V` with
/// `W² + V² = Id`, i.e. of the covariance of `W X1 + V X2` for independent
/// `X1`, `X2` with covariances `G1`, `G2`.
///
/// When the spectra of `G1` and `G2` lie in `[c, C]`, so does the result:
/// `⟨(WG1W + VG2V)θ, θ⟩ ≥ c(‖Wθ‖² + ‖Vθ‖²) = c` and likewise above.
pub fn addsections_eig_bounds<T: Scalar>(
    g1: &CovMatrix<T>,
    g2: &CovMatrix<T>,
    w: &[T],
    v: &[T],
) -> Result<(T, T)> {
    let d = g1.d;
    if g2.d != d || w.len() != d || v.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "G1 {d}x{d}, G2 {}x{}, |W| {}, |V| {}",
            g2.d,
            g2.d,
            w.len(),
            v.len()
        )));
    }
    let dev = w
        .iter()
        .zip(v)
        .fold(T::zero(), |m, (a, b)| m.max((*a * *a + *b * *b - T::one()).abs()));
    if dev > T::lit(DIAGONAL_TOL) {
        return Err(Error::DiagonalConstraintViolated(dev.as_f64()));
    }
    g1.check_psd()?;
    g2.check_psd()?;
    let mixed = g1.scale_diagonal(w).add(&g2.scale_diagonal(v))?;
    let eig = eigendecompose(&mixed)?;
    Ok((eig.values[0], eig.values[d - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn balanced_identity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let id = CovMatrix::identity(3);
        let (lo, hi) = addsections_eig_bounds(&id, &id, &[s; 3], &[s; 3]).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_mixing_returns_g1_spectrum() {
        let g1 = CovMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let g2 = CovMatrix::diagonal(&[5.0, 7.0]);
        let (lo, hi) = addsections_eig_bounds(&g1, &g2, &[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 3.0, epsilon = 1e-14);
        let (lo, hi) = addsections_eig_bounds(&g1, &g2, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(lo, 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(hi, 7.0, epsilon = 1e-14);
    }

    #[test]
    fn constraint_violation() {
        let id = CovMatrix::<f64>::identity(2);
        assert!(matches!(
            addsections_eig_bounds(&id, &id, &[1.0, 0.5], &[0.0, 0.5]),
            Err(Error::DiagonalConstraintViolated(_))
        ));
    }
}
