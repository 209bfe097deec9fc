use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{eigendecompose, CovMatrix};

/// Allowed deviation of `Σ A_i` from the identity.
pub const IDENTITY_SUM_TOL: f64 = 1e-8;
/// Slack applied to the closed interval `[eps, 1 - eps]` and to the
/// "large eigenvalue" quadratic-form bound.
pub const BOUNDARY_SLACK: f64 = 1e-9;
/// Slack toward inclusion when counting eigenvalues above `1 - eps`.
pub const LARGE_EIGEN_SLACK: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Input of the splitting algorithm, in its JSON file form
/// `{"d":d,"matrices":[[...row-major...],...],"eps":e}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitProblem<T> {
    pub d: usize,
    pub matrices: Vec<Vec<T>>,
    pub eps: T,
}

impl<T: Scalar> SplitProblem<T> {
    pub fn covariances(&self) -> Result<Vec<CovMatrix<T>>> {
        self.matrices.iter().map(|m| CovMatrix::new(self.d, m.clone())).collect()
    }

    pub fn solve(&self) -> Result<SplitResult<T>> {
        split_covariance(&self.covariances()?, self.eps)
    }
}

/// Orthonormal basis of the span of large-eigenvalue eigenvectors of one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace<T> {
    pub index: usize,
    pub basis: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SplitResult<T> {
    /// The large-eigenvalue subspaces of the inputs fill the whole space.
    FullDecomposition { subspaces: Vec<Subspace<T>> },
    /// Some partial sum has an eigenvalue away from 0 and 1. `step` records
    /// which branch produced it (1: a single input, 3: a prefix sum).
    MiddleEigen { subset: Vec<usize>, lambda: T, vector: Vec<T>, step: u8 },
}

impl<T: Scalar> SplitResult<T> {
    /// Checks the result invariants against the inputs with the crate's
    /// own eigensolver.
    pub fn check(&self, mats: &[CovMatrix<T>], eps: T) -> Result<()> {
        let d = mats[0].d;
        let slack = T::lit(BOUNDARY_SLACK);
        match self {
            SplitResult::FullDecomposition { subspaces } => {
                let total: usize = subspaces.iter().map(|s| s.basis.len()).sum();
                if total != d {
                    return Err(Error::InternalContractViolation(format!(
                        "subspace dimensions sum to {total}, expected {d}"
                    )));
                }
                for s in subspaces {
                    for v in &s.basis {
                        let q = quadratic_form(&mats[s.index], v);
                        if !(q > T::one() - eps - slack) {
                            return Err(Error::InternalContractViolation(format!(
                                "basis vector of input {} has <Av,v> = {q}",
                                s.index
                            )));
                        }
                    }
                }
                Ok(())
            }
            SplitResult::MiddleEigen { subset, lambda, vector, .. } => {
                let lam = *lambda;
                let half = eps / T::lit(2.0);
                let in_closed = lam >= eps - slack && lam <= T::one() - eps + slack;
                let in_open_half = lam > half && lam < T::one() - half;
                if !(in_closed && in_open_half) {
                    return Err(Error::InternalContractViolation(format!(
                        "lambda {lam} outside [eps, 1 - eps] for eps {eps}"
                    )));
                }
                let sum = CovMatrix::sum(d, subset.iter().map(|&i| &mats[i]))?;
                let av = sum.apply(vector);
                let resid = av.iter().zip(vector).fold(T::zero(), |m, (a, v)| m.max((*a - lam * *v).abs()));
                let nrm = vector.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
                if resid > T::lit(RESIDUAL_TOL) || (nrm - T::one()).abs() > T::lit(1e-10) {
                    return Err(Error::InternalContractViolation(format!(
                        "eigenvector residual {resid}, norm {nrm}"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn quadratic_form<T: Scalar>(a: &CovMatrix<T>, v: &[T]) -> T {
    a.apply(v).iter().zip(v).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

/// Splits a decomposition of the identity into PSD parts.
///
/// 1. If some `A_i` has an eigenvalue in `(eps, 1 - eps)`, return it with
///    `S = {i}`.
/// 2. Otherwise count `k_i`, the eigenvalues of `A_i` above `1 - eps`; when
///    `Σ k_i = d` the corresponding eigenvectors give a full decomposition.
/// 3. Otherwise put the `k_i = 0` inputs first, take the smallest prefix
///    whose trace reaches `d·eps`, and return the top eigenpair of its sum.
///    The trace budget guarantees this prefix trace stays below `2·d·eps`.
pub fn split_covariance<T: Scalar>(mats: &[CovMatrix<T>], eps: T) -> Result<SplitResult<T>> {
    let d = mats
        .first()
        .ok_or_else(|| Error::BadParameters("no matrices to split".into()))?
        .d;
    if let Some(m) = mats.iter().find(|m| m.d != d) {
        return Err(Error::DimensionMismatch(format!("matrix of size {} among size {d}", m.d)));
    }
    let bound = T::one() / T::from_usize_lossy((d + 1) * (d + 1));
    if !(eps > T::zero() && eps < bound) {
        return Err(Error::EpsOutOfRange { eps: eps.as_f64(), bound: bound.as_f64() });
    }
    let total = CovMatrix::sum(d, mats)?;
    let dev = total.max_abs_diff(&CovMatrix::identity(d));
    if dev > T::lit(IDENTITY_SUM_TOL) {
        return Err(Error::NotIdentitySum(dev.as_f64()));
    }
    for m in mats {
        m.check_psd()?;
    }

    let eigs = mats.iter().map(eigendecompose).collect::<Result<Vec<_>>>()?;
    let result = 'found: {
        // step 1
        for (i, e) in eigs.iter().enumerate() {
            if let Some(k) = e.values.iter().position(|&l| l > eps && l < T::one() - eps) {
                break 'found SplitResult::MiddleEigen {
                    subset: vec![i],
                    lambda: e.values[k],
                    vector: e.vector(k),
                    step: 1,
                };
            }
        }
        // step 2
        let threshold = T::one() - eps - T::lit(LARGE_EIGEN_SLACK);
        let large: Vec<Vec<usize>> = eigs
            .iter()
            .map(|e| (0..d).filter(|&k| e.values[k] > threshold).collect())
            .collect();
        let k_total: usize = large.iter().map(Vec::len).sum();
        if k_total == d {
            let subspaces = large
                .iter()
                .enumerate()
                .filter(|(_, ks)| !ks.is_empty())
                .map(|(i, ks)| Subspace { index: i, basis: ks.iter().map(|&k| eigs[i].vector(k)).collect() })
                .collect();
            break 'found SplitResult::FullDecomposition { subspaces };
        }
        if k_total > d {
            return Err(Error::InternalContractViolation(format!(
                "{k_total} eigenvalues above 1 - eps in dimension {d}"
            )));
        }
        // step 3
        let order: Vec<usize> = (0..mats.len())
            .filter(|&i| large[i].is_empty())
            .chain((0..mats.len()).filter(|&i| !large[i].is_empty()))
            .collect();
        let target = T::from_usize_lossy(d) * eps;
        let mut prefix = T::zero();
        let mut m0 = None;
        for (m, &i) in order.iter().enumerate() {
            prefix += mats[i].trace();
            if prefix >= target {
                m0 = Some(m + 1);
                break;
            }
        }
        let m0 = m0.ok_or_else(|| {
            Error::InternalContractViolation(format!("prefix traces never reach d*eps = {target}"))
        })?;
        let mut subset = order[..m0].to_vec();
        subset.sort_unstable();
        let sum = CovMatrix::sum(d, subset.iter().map(|&i| &mats[i]))?;
        let (lambda, vector) = eigendecompose(&sum)?.max();
        SplitResult::MiddleEigen { subset, lambda, vector, step: 3 }
    };
    result.check(mats, eps)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> CovMatrix<f64> {
        CovMatrix::diagonal(v)
    }

    #[test]
    fn single_input_middle_eigen() {
        let r = split_covariance(&[diag(&[0.5]), diag(&[0.5])], 0.1).unwrap();
        match r {
            SplitResult::MiddleEigen { subset, lambda, step, .. } => {
                assert_eq!(subset, vec![0]);
                assert_abs_diff_eq!(lambda, 0.5);
                assert_eq!(step, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_decomposition_by_hand() {
        let mats = [diag(&[0.98, 0.0]), diag(&[0.02, 0.02]), diag(&[0.0, 0.98])];
        match split_covariance(&mats, 0.05).unwrap() {
            SplitResult::FullDecomposition { subspaces } => {
                assert_eq!(subspaces.len(), 2);
                assert_eq!(subspaces[0].index, 0);
                assert_eq!(subspaces[0].basis, vec![vec![1.0, 0.0]]);
                assert_eq!(subspaces[1].index, 2);
                assert_eq!(subspaces[1].basis, vec![vec![0.0, 1.0]]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn prefix_sum_branch() {
        // b(m) = 0.1·m ≥ d·eps = 0.2 first at m = 2
        let mats: Vec<_> = (0..10).map(|_| diag(&[0.1])).collect();
        match split_covariance(&mats, 0.2).unwrap() {
            SplitResult::MiddleEigen { subset, lambda, step, vector } => {
                assert_eq!(subset, vec![0, 1]);
                assert_abs_diff_eq!(lambda, 0.2, epsilon = 1e-15);
                assert_eq!(step, 3);
                assert_eq!(vector, vec![1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            split_covariance(&[diag(&[0.5]), diag(&[0.5])], 0.3),
            Err(Error::EpsOutOfRange { .. })
        ));
        assert!(matches!(split_covariance(&[diag(&[0.5]), diag(&[0.4])], 0.1), Err(Error::NotIdentitySum(_))));
        assert!(matches!(split_covariance(&[diag(&[1.2]), diag(&[-0.2])], 0.1), Err(Error::NotPSD(_))));
        assert!(matches!(split_covariance(&[diag(&[1.0]), diag(&[0.0, 0.0])], 0.1), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn json_roundtrip_tagged() {
        let r: SplitResult<f64> = SplitResult::MiddleEigen { subset: vec![0], lambda: 0.5, vector: vec![1.0], step: 1 };
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"kind":"MiddleEigen""#));
        assert_eq!(serde_json::from_str::<SplitResult<f64>>(&s).unwrap(), r);
        let p: SplitProblem<f64> = serde_json::from_str(r#"{"d":1,"matrices":[[0.5],[0.5]],"eps":0.1}"#).unwrap();
        assert!(matches!(p.solve().unwrap(), SplitResult::MiddleEigen { .. }));
    }
}
