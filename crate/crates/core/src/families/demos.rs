use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec, LineSet, LOG_CONCAVITY_TOL};
use crate::linalg::LinearMap;
use crate::ops::{convolve, isotropize_image, pushforward, tensor_product, SINGULAR_DET};

use super::{irwin_hall_density, is_uniform_box, FamilyName, FamilySpec};

/// Detector tolerance used by the closure demo.
pub const BOX_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub n: usize,
    /// Sup distance between the standardized grid and the standard normal.
    pub sup_distance: f64,
    /// Same distance computed from the Irwin–Hall formula on a fine mesh.
    pub oracle_distance: f64,
    /// Largest deviation of the unstandardized grid from Irwin–Hall.
    pub irwin_hall_error: f64,
}

fn phi(z: f64) -> f64 {
    (-z * z / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Sums of `n = 1..=n_max` uniform[0,1] variables, built by repeated grid
/// convolution, standardized and compared with the standard normal.
pub fn clt_diagonal_demo(n_max: usize, h: f64) -> Result<Vec<CltRow>> {
    if n_max < 2 {
        return Err(Error::BadParameters(format!("n_max must be at least 2, got {n_max}")));
    }
    if !(h > 0.0 && h <= 0.25) {
        return Err(Error::BadParameters(format!("grid step {h} outside (0, 0.25]")));
    }
    let cells = (1.0 / h - 1e-9).ceil() as usize;
    let spec = GridSpec::new(vec![cells], vec![h / 2.0], vec![h])?;
    let unit = DensityGrid::from_fn(spec, |x| ((x[0] + h / 2.0).min(1.0) - (x[0] - h / 2.0)) / h)?.normalize()?;
    let mut sum = unit.clone();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            sum = convolve(&sum, &unit)?;
        }
        let nf = n as f64;
        let sigma = (nf / 12.0).sqrt();
        let mut ih_err: f64 = 0.0;
        let mut dist: f64 = 0.0;
        for (k, &v) in sum.values().iter().enumerate() {
            let x = sum.spec().coord(0, k);
            ih_err = ih_err.max((v - irwin_hall_density(n, x)).abs());
            dist = dist.max((sigma * v - phi((x - nf / 2.0) / sigma)).abs());
        }
        // outside the grid the normal density is compared with zero
        let edge = (sum.origin()[0] - nf / 2.0).abs().min((sum.spec().upper(0) - nf / 2.0).abs()) / sigma;
        dist = dist.max(phi(edge));
        rows.push(CltRow { n, sup_distance: dist, oracle_distance: oracle_distance(n), irwin_hall_error: ih_err });
    }
    Ok(rows)
}

/// `sup_z |σ f_n(n/2 + σz) − φ(z)|` on a mesh of width `1e-4`.
fn oracle_distance(n: usize) -> f64 {
    let nf = n as f64;
    let sigma = (nf / 12.0).sqrt();
    let reach = nf / 2.0 / sigma + 1.0;
    let steps = (2.0 * reach / 1e-4) as usize;
    (0..=steps)
        .map(|k| {
            let z = -reach + k as f64 * 1e-4;
            (sigma * irwin_hall_density(n, nf / 2.0 + sigma * z) - phi(z)).abs()
        })
        .fold(0.0, f64::max)
}

pub fn write_clt_csv<W: Write>(rows: &[CltRow], out: W) -> Result<()> {
    write_csv(rows, out)
}

fn write_csv<R: Serialize, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// One iterate of the closure sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureStep {
    pub step: usize,
    pub dim: usize,
    pub is_box: bool,
    pub log_concave: bool,
    /// Sup distance to the previous isotropized iterate, when dimensions agree.
    pub sup_distance_prev: Option<f64>,
    pub grid: DensityGrid<f64>,
}

/// Starts from the product of the 1-D `seeds` and applies
/// `maps[0], maps[1], ...` (cyclically) for `steps` steps. Every iterate is
/// isotropized and run through the box detector.
pub fn closure_sequence_demo(seeds: &[FamilySpec], maps: &[LinearMap<f64>], steps: usize) -> Result<Vec<ClosureStep>> {
    if seeds.is_empty() || seeds.iter().any(|s| s.dim != 1) {
        return Err(Error::BadParameters("seeds must be a nonempty list of 1-D families".into()));
    }
    if steps > 0 && maps.is_empty() {
        return Err(Error::BadParameters("no maps to apply".into()));
    }
    let mut base = seeds[0].generate::<f64>()?;
    for s in &seeds[1..] {
        base = tensor_product(&base, &s.generate()?)?;
    }
    // invertible steps are composed and applied to `base` in one resampling;
    // a rank-reducing step materializes the image and restarts from it
    let mut total = LinearMap::identity(base.dim());
    let mut out: Vec<ClosureStep> = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        if step > 0 {
            let map = &maps[(step - 1) % maps.len()];
            let composed = map.matmul(&total)?;
            let invertible = composed.is_square() && composed.det()?.abs() > SINGULAR_DET;
            if invertible {
                total = composed;
            } else {
                let current = if total == LinearMap::identity(base.dim()) {
                    base.clone()
                } else {
                    pushforward(&base, &total)?
                };
                base = pushforward(&current, map)?;
                total = LinearMap::identity(base.dim());
            }
        }
        let (iso, _) = isotropize_image(&base, &total, None)?;
        let prev = out.last().filter(|p| p.dim == iso.dim()).map(|p| p.grid.sup_distance(&iso));
        out.push(ClosureStep {
            step,
            dim: iso.dim(),
            is_box: is_uniform_box(&iso, BOX_TOL),
            log_concave: iso.check_log_concave(LineSet::Axes, LOG_CONCAVITY_TOL).passed,
            sup_distance_prev: prev,
            grid: iso,
        });
    }
    Ok(out)
}

/// A named closure sequence with the detector output expected at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureScenario {
    pub name: String,
    pub seeds: Vec<FamilySpec>,
    #[serde(default)]
    pub maps: Vec<LinearMap<f64>>,
    pub steps: usize,
    /// Expected detector result per step (`steps + 1` entries), if known.
    #[serde(default)]
    pub expect_box: Option<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureConfig {
    pub scenarios: Vec<ClosureScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureRow {
    pub scenario: String,
    pub step: usize,
    pub dim: usize,
    pub is_box: bool,
    pub expected: Option<bool>,
    pub log_concave: bool,
    pub sup_distance_prev: Option<f64>,
}

impl ClosureScenario {
    pub fn run(&self) -> Result<Vec<ClosureRow>> {
        if let Some(e) = &self.expect_box {
            if e.len() != self.steps + 1 {
                return Err(Error::BadParameters(format!(
                    "scenario {}: {} expectations for {} iterates",
                    self.name,
                    e.len(),
                    self.steps + 1
                )));
            }
        }
        Ok(closure_sequence_demo(&self.seeds, &self.maps, self.steps)?
            .into_iter()
            .map(|s| ClosureRow {
                scenario: self.name.clone(),
                step: s.step,
                dim: s.dim,
                is_box: s.is_box,
                expected: self.expect_box.as_ref().map(|e| e[s.step]),
                log_concave: s.log_concave,
                sup_distance_prev: s.sup_distance_prev,
            })
            .collect())
    }
}

impl ClosureConfig {
    pub fn run(&self) -> Result<Vec<ClosureRow>> {
        let mut rows = Vec::new();
        for s in &self.scenarios {
            rows.extend(s.run()?);
        }
        Ok(rows)
    }
}

pub fn write_closure_csv<W: Write>(rows: &[ClosureRow], out: W) -> Result<()> {
    write_csv(rows, out)
}

/// The built-in scenario set: products of intervals under diagonal and
/// permutation maps, products with a non-uniform factor, and the shadow of
/// the cube on the plane orthogonal to `(1,1,1)`.
pub fn scripted_closure_scenarios() -> ClosureConfig {
    let h = 0.02;
    let uni = |w: f64| FamilySpec::new(FamilyName::UniformBox, 1, vec![w], h);
    let gauss = FamilySpec::new(FamilyName::Gaussian, 1, vec![0.5], h);
    let lap = FamilySpec::new(FamilyName::Laplace, 1, vec![3.0], h);
    let tri = FamilySpec::new(FamilyName::Triangle, 1, vec![1.0], h);
    let diag = |d: &[f64]| LinearMap::diagonal(d);
    let swap = LinearMap::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).expect("2x2");
    let cycle = LinearMap::from_rows(&[vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).expect("3x3");
    let rot = LinearMap::rotation_2d(PI / 6.0);
    let third = 1.0 / 3.0;
    let shadow = LinearMap::from_rows(&[
        vec![1.0 - third, -third, -third],
        vec![-third, 1.0 - third, -third],
        vec![-third, -third, 1.0 - third],
    ])
    .expect("3x3");
    let scenario = |name: &str, seeds: Vec<FamilySpec>, maps: Vec<LinearMap<f64>>, expect: Vec<bool>| ClosureScenario {
        name: name.into(),
        seeds,
        maps,
        steps: expect.len() - 1,
        expect_box: Some(expect),
    };
    ClosureConfig {
        scenarios: vec![
            scenario("interval", vec![uni(2.0)], vec![diag(&[3.0])], vec![true, true]),
            scenario(
                "two_intervals",
                vec![uni(1.0), uni(2.0)],
                vec![diag(&[2.0, 0.5]), swap.clone()],
                vec![true, true, true],
            ),
            scenario("three_intervals", vec![uni(1.0), uni(1.5), uni(0.5)], vec![diag(&[1.0, 2.0, 3.0]), cycle], vec![
                true, true, true,
            ]),
            scenario("uniform_gaussian", vec![uni(1.0), gauss], vec![diag(&[2.0, 1.0]), rot], vec![false, false, false]),
            scenario("uniform_laplace", vec![uni(1.0), lap], vec![swap], vec![false, false]),
            scenario("uniform_triangle_uniform", vec![uni(1.0), tri, uni(1.0)], vec![diag(&[1.0, 0.5, 2.0])], vec![
                false, false,
            ]),
            scenario("cube_shadow", vec![uni(1.0), uni(1.0), uni(1.0)], vec![shadow], vec![true, false]),
        ],
    }
}
