//! Seeded randomized suites for the spectral contracts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;

use super::random::{random_addsections_trial, random_identity_decomposition, DecompositionStyle};
use super::{addsections_eig_bounds, split_covariance, CovMatrix, SplitResult};

/// Dimensions exercised by the splitting suite.
pub const SPLIT_DIMS: [usize; 5] = [1, 2, 3, 5, 8];
/// `eps` values of the splitting suite, as multiples of `(d+1)^-2`.
pub const SPLIT_EPS_FACTORS: [f64; 2] = [0.5, 0.9];
/// Dimensions exercised by the mixed-sum suite.
pub const ADDSECTIONS_DIMS: [usize; 4] = [2, 3, 5, 8];
/// Spectral range of `G1`, `G2` in the mixed-sum suite.
pub const ADDSECTIONS_RANGE: (f64, f64) = (0.3, 2.0);
/// Slack on the mixed-sum eigenvalue bounds.
pub const ADDSECTIONS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    fn new(name: impl Into<String>) -> Self {
        SuiteReport { name: name.into(), trials: 0, failures: 0, first_failure: None }
    }

    fn record(&mut self, outcome: std::result::Result<(), String>) {
        self.trials += 1;
        if let Err(msg) = outcome {
            self.failures += 1;
            self.first_failure.get_or_insert(msg);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Mixed-sum eigenvalue bounds on `trials` random `(G1, G2, W, V)` in
/// dimension `d`, with the spectra of `G1`, `G2` drawn in
/// [`ADDSECTIONS_RANGE`].
pub fn addsections_suite(d: usize, trials: usize, seed: u64) -> Result<SuiteReport> {
    let (lo, hi) = ADDSECTIONS_RANGE;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(format!("addsections d={d}"));
    for t in 0..trials {
        let (g1, g2, w, v) = random_addsections_trial::<f64, _>(d, lo, hi, &mut rng);
        let (min, max) = addsections_eig_bounds(&g1, &g2, &w, &v)?;
        let ok = min >= lo - ADDSECTIONS_SLACK && max <= hi + ADDSECTIONS_SLACK;
        report.record(if ok { Ok(()) } else { Err(format!("trial {t}: eigenvalues [{min}, {max}]")) });
    }
    Ok(report)
}

/// Runs the splitting algorithm on `trials` random decompositions of the
/// `d×d` identity into 2 to 20 parts and hands every result to `check`.
///
/// Errors from the algorithm itself count as failures.
pub fn split_suite<F>(d: usize, eps: f64, trials: usize, seed: u64, mut check: F) -> SuiteReport
where
    F: FnMut(&[CovMatrix<f64>], f64, &SplitResult<f64>) -> std::result::Result<(), String>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(format!("split d={d} eps={eps:.5}"));
    for t in 0..trials {
        let style = DecompositionStyle::ALL[t % DecompositionStyle::ALL.len()];
        let parts = rng.random_range(2..=20);
        let outcome = random_identity_decomposition::<f64, _>(d, parts, style, eps, &mut rng)
            .map_err(|e| e.to_string())
            .and_then(|mats| {
                let r = split_covariance(&mats, eps).map_err(|e| format!("{}: {e}", e.name()))?;
                check(&mats, eps, &r)
            })
            .map_err(|msg| format!("trial {t} ({style:?}, {parts} parts): {msg}"));
        report.record(outcome);
    }
    report
}

/// Every splitting configuration `(d, eps)` of the suite.
pub fn split_configurations() -> Vec<(usize, f64)> {
    SPLIT_DIMS
        .iter()
        .flat_map(|&d| SPLIT_EPS_FACTORS.iter().map(move |f| (d, f / ((d + 1) * (d + 1)) as f64)))
        .collect()
}

/// Both suites with the crate's own result checks; `trials` per
/// configuration, seeds derived from `seed`.
pub fn default_suites(trials: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    for (k, &d) in ADDSECTIONS_DIMS.iter().enumerate() {
        out.push(addsections_suite(d, trials, seed.wrapping_add(k as u64))?);
    }
    for (k, (d, eps)) in split_configurations().into_iter().enumerate() {
        let s = seed.wrapping_add(100 + k as u64);
        out.push(split_suite(d, eps, trials, s, |mats, eps, r| r.check(mats, eps).map_err(|e| e.to_string())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for r in default_suites(30, 0).unwrap() {
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.trials, 30);
        }
    }

    #[test]
    fn failing_check_is_counted() {
        let r = split_suite(2, 0.05, 5, 1, |_, _, _| Err("no".into()));
        assert_eq!(r.failures, 5);
        assert!(r.first_failure.unwrap().starts_with("trial 0"));
    }

    #[test]
    fn configurations_cover_ten_pairs() {
        let c = split_configurations();
        assert_eq!(c.len(), 10);
        assert!((c[0].1 - 0.125).abs() < 1e-15);
    }
}
