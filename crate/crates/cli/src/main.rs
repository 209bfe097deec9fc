use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use logcone::bands::{slice_mass_in_band, sup_density_in_band};
use logcone::families::{
    clt_diagonal_demo, scripted_closure_scenarios, write_clt_csv, write_closure_csv, ClosureConfig, FamilyName,
    FamilySpec,
};
use logcone::lcgrid;
use logcone::lipschitz::{default_splits, directional_lipschitz, lipschitz_sweep, write_sweep_csv};
use logcone::ops::{center_axis, convolve, isotropize, project, restrict_hyperplane, symmetrize};
use logcone::spectra::split_covariance;
use logcone::spectra::suite::default_suites;
use logcone::{Cov, Grid, LineSet, Moments};

/// Tolerance on mean and covariance below which `stats` treats a grid as
/// isotropic.
const STATS_ISOTROPY_TOL: f64 = 1e-3;

#[derive(Parser)]
#[command(name = "logcone", version, about = "Log-concave densities on regular grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a named family into an LCGRID file.
    Gen {
        family: FamilyName,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        h: f64,
        /// Family parameter; repeat for per-axis values. Defaults to 1.
        #[arg(long = "param", conflicts_with = "unit_variance")]
        params: Vec<f64>,
        /// Choose the parameter giving variance 1 on every axis.
        #[arg(long)]
        unit_variance: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Symmetric decreasing rearrangement along one axis.
    Symmetrize {
        #[command(flatten)]
        io: InOut,
        #[arg(long)]
        axis: usize,
        /// Extend the grid to be symmetric about 0 on the axis first.
        #[arg(long)]
        recenter: bool,
    },
    /// Density of the sum of two independent variables.
    Convolve {
        #[arg(short, long = "input", num_args = 1, required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Affine image in isotropic position.
    Isotropize {
        #[command(flatten)]
        io: InOut,
        /// Where to write the applied affine map as JSON.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Orthogonal projection onto the span of orthonormal directions.
    Project {
        #[command(flatten)]
        io: InOut,
        /// JSON list of direction vectors.
        #[arg(long)]
        dirs: PathBuf,
    },
    /// Moments, isotropic constant and band membership as JSON.
    Stats {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Log-concavity report as JSON; exits 1 when the check fails.
    Check {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Lines::Axes)]
        lines: Lines,
    },
    /// Lipschitz constant along an axis, as JSON.
    Lipschitz {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        axis: usize,
        /// The same density sampled at half the spacing.
        #[arg(long)]
        refined: Option<PathBuf>,
    },
    /// Run the covariance splitting algorithm on a JSON input.
    SplitCov {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Lipschitz scaling across the nine variance splits, as CSV.
    SweepLipschitz {
        #[arg(long = "family", num_args = 1, required = true)]
        families: Vec<FamilyName>,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        axis: usize,
        /// Grid step; defaults to 0.005 in dimension 1 and 0.02 above.
        #[arg(long)]
        h: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    #[command(subcommand)]
    Demo(Demo),
    /// Write a 2-D grid as a binary greyscale PGM.
    Render {
        #[command(flatten)]
        io: InOut,
    },
    /// Seeded randomized spectral suites; exits 1 on any failure.
    Suite {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Standardized sums of uniforms against the normal density.
    Clt {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Box detection on linear images of products.
    Parallelotope {
        /// Scenario file; the built-in scenarios when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct InOut {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lines {
    Axes,
    Diagonals,
}

#[derive(Deserialize)]
struct SplitInput {
    eps: f64,
    /// Each matrix as a list of rows.
    matrices: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
struct Stats {
    moments: Moments,
    isotropic_constant: Option<f64>,
    sup_in_band: Option<bool>,
    /// Mass of the central section `{x_i = 0}` per axis.
    slice_masses: Option<Vec<f64>>,
    slices_in_band: Option<bool>,
}

/// A failed `check`, reported like any other error.
#[derive(Debug)]
struct NotLogConcave;

impl std::fmt::Display for NotLogConcave {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("grid failed the log-concavity check")
    }
}

impl std::error::Error for NotLogConcave {}

/// A randomized suite with failures.
#[derive(Debug)]
struct SuiteFailed(usize);

impl std::fmt::Display for SuiteFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} suite(s) had failures", self.0)
    }
}

impl std::error::Error for SuiteFailed {}

fn load(path: &Path) -> anyhow::Result<Grid> {
    lcgrid::load(path).with_context(|| path.display().to_string())
}

fn save(g: &Grid, path: &Path) -> anyhow::Result<()> {
    lcgrid::save(g, path).with_context(|| path.display().to_string())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
    Ok(serde_json::from_str(&text)?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| path.display().to_string())?))
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn stats(g: &Grid) -> anyhow::Result<Stats> {
    let moments = g.normalize()?.moments()?;
    let Ok(c) = g.isotropic_constant(STATS_ISOTROPY_TOL) else {
        return Ok(Stats { moments, isotropic_constant: None, sup_in_band: None, slice_masses: None, slices_in_band: None });
    };
    let d = g.dim();
    let masses = if d == 1 {
        vec![g.interpolate(&[0.0])]
    } else {
        (0..d).map(|a| Ok(restrict_hyperplane(g, a, 0.0)?.mass())).collect::<anyhow::Result<Vec<_>>>()?
    };
    Ok(Stats {
        sup_in_band: Some(sup_density_in_band(d, moments.sup_density)),
        slices_in_band: Some(masses.iter().all(|&m| slice_mass_in_band(d, m))),
        slice_masses: Some(masses),
        isotropic_constant: Some(c),
        moments,
    })
}

fn render(g: &Grid, path: &Path) -> anyhow::Result<()> {
    if g.dim() != 2 {
        return Err(logcone::Error::DimensionMismatch(format!("render needs a 2-D grid, got {}", g.dim())).into());
    }
    let (w, h) = (g.shape()[0], g.shape()[1]);
    let max = g.max_value();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    let mut out = create(path)?;
    write!(out, "P5\n{w} {h}\n255\n")?;
    // first image row is the largest second coordinate
    let mut row = vec![0u8; w];
    for j in (0..h).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = (g.value_at(&[i, j]) * scale).round().clamp(0.0, 255.0) as u8;
        }
        out.write_all(&row)?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen { family, dim, h, params, unit_variance, output } => {
            let spec = if unit_variance {
                FamilySpec::with_variance(family, dim, 1.0, h)
            } else if params.is_empty() {
                FamilySpec::new(family, dim, vec![1.0], h)
            } else {
                FamilySpec::new(family, dim, params, h)
            };
            save(&spec.generate()?, &output)
        }
        Command::Symmetrize { io, axis, recenter } => {
            let mut g = load(&io.input)?;
            if recenter {
                g = center_axis(&g, axis)?;
            }
            save(&symmetrize(&g, axis)?, &io.output)
        }
        Command::Convolve { inputs, output } => {
            if inputs.len() != 2 {
                bail!(logcone::Error::BadParameters(format!("convolve takes two inputs, got {}", inputs.len())));
            }
            save(&convolve(&load(&inputs[0])?, &load(&inputs[1])?)?, &output)
        }
        Command::Isotropize { io, map } => {
            let (iso, applied) = isotropize(&load(&io.input)?)?;
            save(&iso, &io.output)?;
            if let Some(path) = map {
                serde_json::to_writer_pretty(create(&path)?, &applied)?;
            }
            Ok(())
        }
        Command::Project { io, dirs } => {
            let dirs: Vec<Vec<f64>> = read_json(&dirs)?;
            save(&project(&load(&io.input)?, &dirs)?, &io.output)
        }
        Command::Stats { input } => print_json(&stats(&load(&input)?)?),
        Command::Check { input, tol, lines } => {
            let lines = match lines {
                Lines::Axes => LineSet::Axes,
                Lines::Diagonals => LineSet::AxesAndDiagonals,
            };
            let report = load(&input)?.check_log_concave(lines, tol);
            print_json(&report)?;
            if !report.passed {
                bail!(NotLogConcave);
            }
            Ok(())
        }
        Command::Lipschitz { input, axis, refined } => {
            let refined = refined.map(|p| load(&p)).transpose()?;
            print_json(&directional_lipschitz(&load(&input)?, axis, refined.as_ref())?)
        }
        Command::SplitCov { input } => {
            let s: SplitInput = read_json(&input)?;
            let mats = s.matrices.iter().map(|rows| Cov::from_rows(rows)).collect::<logcone::Result<Vec<_>>>()?;
            print_json(&split_covariance(&mats, s.eps)?)
        }
        Command::SweepLipschitz { families, dim, axis, h, output } => {
            let (fx, fy) = match families[..] {
                [x] => (x, x),
                [x, y] => (x, y),
                _ => bail!(logcone::Error::BadParameters("give one or two families".into())),
            };
            let h = h.unwrap_or(if dim == 1 { 0.005 } else { 0.02 });
            let rows = lipschitz_sweep(fx, fy, dim, axis, h, &default_splits())?;
            write_sweep_csv(&rows, create(&output)?)?;
            Ok(())
        }
        Command::Demo(Demo::Clt { n, h, output }) => {
            write_clt_csv(&clt_diagonal_demo(n, h)?, create(&output)?)?;
            Ok(())
        }
        Command::Demo(Demo::Parallelotope { config, output }) => {
            let config: ClosureConfig = match config {
                Some(path) => read_json(&path)?,
                None => scripted_closure_scenarios(),
            };
            write_closure_csv(&config.run()?, create(&output)?)?;
            Ok(())
        }
        Command::Render { io } => render(&load(&io.input)?, &io.output),
        Command::Suite { seed, trials } => {
            let reports = default_suites(trials, seed)?;
            print_json(&reports)?;
            let failed = reports.iter().filter(|r| !r.passed()).count();
            if failed > 0 {
                bail!(SuiteFailed(failed));
            }
            Ok(())
        }
    }
}

fn error_name(e: &anyhow::Error) -> &'static str {
    if let Some(e) = e.downcast_ref::<logcone::Error>() {
        e.name()
    } else if e.is::<NotLogConcave>() {
        "NotLogConcave"
    } else if e.is::<SuiteFailed>() {
        "SuiteFailed"
    } else if e.is::<serde_json::Error>() {
        "Parse"
    } else {
        "Io"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {e:#}", error_name(&e));
            ExitCode::from(1)
        }
    }
}
