//! `LCGRID v1` text format.
//!
//! ```text
//! LCGRID v1
//! dim <d>
//! shape n1 … nd
//! origin o1 … od
//! spacing h1 … hd
//! <one value per line, row-major>
//! ```
//!
//! Reals are written with 17 significant digits so `f64` values survive a
//! write/read cycle bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{DensityGrid, GridSpec};
use crate::scalar::Scalar;

pub const MAGIC: &str = "LCGRID v1";

fn fmt_real<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

pub fn write_lcgrid<T: Scalar, W: Write>(g: &DensityGrid<T>, mut w: W) -> Result<()> {
    let join = |xs: &[T]| xs.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(" ");
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "dim {}", g.dim())?;
    writeln!(w, "shape {}", g.shape().iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "))?;
    writeln!(w, "origin {}", join(g.origin()))?;
    writeln!(w, "spacing {}", join(g.spacing()))?;
    for v in g.values() {
        writeln!(w, "{}", fmt_real(*v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_lcgrid_string<T: Scalar>(g: &DensityGrid<T>) -> String {
    let mut buf = Vec::new();
    write_lcgrid(g, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

fn header<'a>(line: Option<&'a str>, key: &str, lineno: usize) -> Result<Vec<&'a str>> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::Parse(format!("line {lineno}: expected `{key} ...`, got `{line}`")));
    }
    Ok(parts.collect())
}

fn parse_real<T: Scalar>(s: &str, lineno: usize) -> Result<T> {
    s.parse::<f64>()
        .map(T::lit)
        .map_err(|e| Error::Parse(format!("line {lineno}: `{s}`: {e}")))
}

pub fn read_lcgrid<T: Scalar, R: BufRead>(r: R) -> Result<DensityGrid<T>> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(|l| l.trim_end());
    match it.next() {
        Some(MAGIC) => {}
        other => return Err(Error::Parse(format!("expected `{MAGIC}`, got {other:?}"))),
    }
    let dim_fields = header(it.next(), "dim", 2)?;
    let dim: usize = match dim_fields.as_slice() {
        [d] => d.parse().map_err(|e| Error::Parse(format!("line 2: {e}")))?,
        _ => return Err(Error::Parse("line 2: `dim` takes one value".into())),
    };
    let shape = header(it.next(), "shape", 3)?
        .iter()
        .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(format!("line 3: `{s}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let origin = header(it.next(), "origin", 4)?
        .iter()
        .map(|s| parse_real(s, 4))
        .collect::<Result<Vec<T>>>()?;
    let spacing = header(it.next(), "spacing", 5)?
        .iter()
        .map(|s| parse_real(s, 5))
        .collect::<Result<Vec<T>>>()?;
    if shape.len() != dim || origin.len() != dim || spacing.len() != dim {
        return Err(Error::Parse(format!("header fields disagree with dim {dim}")));
    }
    let spec = GridSpec::new(shape, origin, spacing)?;
    let values = it
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_real(l.trim(), i + 6))
        .collect::<Result<Vec<T>>>()?;
    DensityGrid::new(spec, values)
}

pub fn from_lcgrid_str<T: Scalar>(s: &str) -> Result<DensityGrid<T>> {
    read_lcgrid(s.as_bytes())
}

pub fn save<T: Scalar>(g: &DensityGrid<T>, path: impl AsRef<Path>) -> Result<()> {
    write_lcgrid(g, BufWriter::new(File::create(path)?))
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<DensityGrid<T>> {
    read_lcgrid(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_layout() {
        let spec = GridSpec::new(vec![2], vec![-0.25], vec![0.5]).unwrap();
        let g = DensityGrid::new(spec, vec![1.0, 1.0]).unwrap();
        let s = to_lcgrid_string(&g);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "LCGRID v1");
        assert_eq!(lines[1], "dim 1");
        assert_eq!(lines[2], "shape 2");
        assert_eq!(lines[3], "origin -2.5000000000000000e-1");
        assert_eq!(lines[4], "spacing 5.0000000000000000e-1");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn malformed_inputs() {
        assert!(from_lcgrid_str::<f64>("LCGRID v2\n").is_err());
        assert!(from_lcgrid_str::<f64>("LCGRID v1\ndim 1\nshape 2\norigin 0\nspacing 1\n1\n").is_err());
        assert!(from_lcgrid_str::<f64>("LCGRID v1\ndim 2\nshape 1\norigin 0\nspacing 1\n1\n").is_err());
        assert!(from_lcgrid_str::<f64>("LCGRID v1\ndim 1\nshape 1\norigin 0\nspacing 1\n-1\n").is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(
            dims in prop::collection::vec(1usize..4, 1..=3),
            origin in prop::collection::vec(-10.0f64..10.0, 3),
            spacing in prop::collection::vec(1e-3f64..1.0, 3),
            seed in prop::collection::vec(0.0f64..1e3, 64),
        ) {
            let d = dims.len();
            let spec = GridSpec::new(dims.clone(), origin[..d].to_vec(), spacing[..d].to_vec()).unwrap();
            let values: Vec<f64> = (0..spec.len()).map(|i| seed[i % seed.len()] / (i as f64 + 1.0)).collect();
            let g = DensityGrid::new(spec, values).unwrap();
            let back: DensityGrid<f64> = from_lcgrid_str(&to_lcgrid_string(&g)).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
