//! Random generators for the spectral property suites. All of them are
//! driven by a caller-supplied RNG so suites are reproducible from a seed.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::Result;
use crate::linalg::{axpy, dot, norm};
use crate::scalar::Scalar;

use super::CovMatrix;

pub fn random_unit_vector<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<T> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-8 {
            return v.iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

/// Haar-ish random orthonormal basis (Gram-Schmidt of Gaussian vectors), as rows.
pub fn random_orthonormal_basis<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<T> = random_unit_vector(d, rng);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                axpy(-c, b, &mut v);
            }
        }
        let n = norm(&v);
        if n > T::lit(1e-6) {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis
}

/// Random symmetric matrix `Q·diag(λ)·Qᵀ` with `λ` uniform in `[lo, hi]`.
pub fn random_spd_with_spectrum<T: Scalar, R: Rng + ?Sized>(d: usize, lo: f64, hi: f64, rng: &mut R) -> CovMatrix<T> {
    let q = random_orthonormal_basis::<T, R>(d, rng);
    let dist = Uniform::new_inclusive(lo, hi).expect("valid spectrum range");
    let mut m = CovMatrix::zeros(d);
    for v in &q {
        m.add_outer(T::lit(dist.sample(rng)), v);
    }
    m
}

/// Random `(G1, G2, W, V)` for the mixed-sum eigenvalue suite: spectra of
/// `G1`, `G2` in `[lo, hi]`, `W` uniform in `[0, 1]`, `V = sqrt(1 - W²)`.
#[allow(clippy::type_complexity)]
pub fn random_addsections_trial<T: Scalar, R: Rng + ?Sized>(
    d: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> (CovMatrix<T>, CovMatrix<T>, Vec<T>, Vec<T>) {
    let g1 = random_spd_with_spectrum(d, lo, hi, rng);
    let g2 = random_spd_with_spectrum(d, lo, hi, rng);
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=1.0)).collect();
    let v: Vec<T> = w.iter().map(|x: &f64| T::lit((1.0 - x * x).max(0.0).sqrt())).collect();
    (g1, g2, w.into_iter().map(T::lit).collect(), v)
}

/// Flavor of a random identity decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionStyle {
    /// Convex combinations of random rank-one projectors, whitened to sum to Id.
    Generic,
    /// Each vector of a random orthonormal basis goes almost entirely to one
    /// part; leftovers are spread thinly. Tends to hit the full decomposition.
    Concentrated,
    /// A few dominant parts plus many parts with tiny traces. Tends to hit
    /// the prefix-sum branch.
    Dust,
}

impl DecompositionStyle {
    pub const ALL: [DecompositionStyle; 3] =
        [DecompositionStyle::Generic, DecompositionStyle::Concentrated, DecompositionStyle::Dust];
}

/// Random decomposition of the `d×d` identity into `parts` PSD matrices.
pub fn random_identity_decomposition<T: Scalar, R: Rng + ?Sized>(
    d: usize,
    parts: usize,
    style: DecompositionStyle,
    eps: f64,
    rng: &mut R,
) -> Result<Vec<CovMatrix<T>>> {
    let parts = parts.max(1);
    let mut mats: Vec<CovMatrix<T>> = (0..parts).map(|_| CovMatrix::zeros(d)).collect();
    match style {
        DecompositionStyle::Generic => {
            let mut terms: Vec<usize> = (0..parts).map(|_| rng.random_range(1..=d + 1)).collect();
            // at least d + 1 terms overall, so the sum is invertible
            while terms.iter().sum::<usize>() <= d {
                terms[rng.random_range(0..parts)] += 1;
            }
            for (m, &k) in mats.iter_mut().zip(&terms) {
                for _ in 0..k {
                    let u: Vec<T> = random_unit_vector(d, rng);
                    m.add_outer(T::lit(rng.random_range(0.05..1.0)), &u);
                }
            }
            return whiten(d, mats);
        }
        DecompositionStyle::Concentrated => {
            let basis = random_orthonormal_basis::<T, R>(d, rng);
            for v in &basis {
                let owner = rng.random_range(0..parts);
                // leftover stays below eps/d per part so no middle eigenvalue appears
                let leftover = if parts > 1 { rng.random_range(0.0..eps / 2.0) } else { 0.0 };
                mats[owner].add_outer(T::lit(1.0 - leftover), v);
                if parts > 1 {
                    let weights = random_simplex_weights(parts - 1, rng);
                    let mut wi = weights.into_iter();
                    for (i, m) in mats.iter_mut().enumerate() {
                        if i != owner {
                            m.add_outer(T::lit(leftover * wi.next().unwrap()), v);
                        }
                    }
                }
            }
        }
        DecompositionStyle::Dust => {
            let basis = random_orthonormal_basis::<T, R>(d, rng);
            let big = rng.random_range(0..d.min(parts));
            for (k, v) in basis.iter().enumerate() {
                if k < big {
                    // dominant part k takes this basis vector with weight near one
                    let keep = 1.0 - rng.random_range(0.0..eps / 4.0);
                    mats[k].add_outer(T::lit(keep), v);
                    let rest = 1.0 - keep;
                    spread(&mut mats[big..], v, rest, rng);
                } else {
                    spread(&mut mats[big..], v, 1.0, rng);
                }
            }
        }
    }
    Ok(mats)
}

fn spread<T: Scalar, R: Rng + ?Sized>(mats: &mut [CovMatrix<T>], v: &[T], total: f64, rng: &mut R) {
    if mats.is_empty() {
        return;
    }
    let weights = random_simplex_weights(mats.len(), rng);
    for (m, w) in mats.iter_mut().zip(weights) {
        m.add_outer(T::lit(total * w), v);
    }
}

fn random_simplex_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random_range(f64::EPSILON..1.0).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn whiten<T: Scalar>(d: usize, mats: Vec<CovMatrix<T>>) -> Result<Vec<CovMatrix<T>>> {
    let total = CovMatrix::sum(d, &mats)?;
    let r = total.power(-T::lit(0.5))?;
    let rl = r.to_linear_map();
    mats.into_iter()
        .map(|m| {
            let prod = rl.matmul(&m.to_linear_map())?.matmul(&rl)?;
            let mut e = prod.entries;
            // exact symmetry before validation
            for i in 0..d {
                for j in (i + 1)..d {
                    let avg = (e[i * d + j] + e[j * d + i]) / T::lit(2.0);
                    e[i * d + j] = avg;
                    e[j * d + i] = avg;
                }
            }
            CovMatrix::new(d, e)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decompositions_sum_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for style in DecompositionStyle::ALL {
            for d in [1, 2, 5] {
                let mats = random_identity_decomposition::<f64, _>(d, 6, style, 0.02, &mut rng).unwrap();
                let s = CovMatrix::sum(d, &mats).unwrap();
                assert!(s.max_abs_diff(&CovMatrix::identity(d)) < 1e-12, "{style:?} d={d}");
                for m in &mats {
                    m.check_psd().unwrap();
                }
            }
        }
    }

    #[test]
    fn orthonormal_basis_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthonormal_basis::<f64, _>(8, &mut rng);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - want).abs() < 1e-12);
            }
        }
    }
}
