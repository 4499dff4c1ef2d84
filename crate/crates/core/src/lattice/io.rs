//! Plain-text field files.
//!
//! ```text
//! GLF1 d=2 n=5,5 delta=0.25 comps=1
//! 0.0000000000000000e0
//! ...
//! ```
//!
//! One row per node in row-major order (last axis fastest); each row holds
//! `comps` values printed with 17 significant digits.

use super::{LatticeDomain, ScalarField, VectorField};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

/// Parsed file contents.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub dim: usize,
    pub extents: Vec<usize>,
    pub delta: f64,
    pub comps: usize,
    pub values: Vec<f64>,
}

impl FieldFile {
    pub fn from_scalar(domain: &LatticeDomain, v: &ScalarField) -> Result<Self> {
        domain.check_scalar(v)?;
        Ok(FieldFile {
            dim: domain.dim(),
            extents: domain.extents().to_vec(),
            delta: domain.spacing(),
            comps: 1,
            values: v.as_slice().to_vec(),
        })
    }

    pub fn from_vector(domain: &LatticeDomain, u: &VectorField) -> Result<Self> {
        domain.check_vector(u)?;
        Ok(FieldFile {
            dim: domain.dim(),
            extents: domain.extents().to_vec(),
            delta: domain.spacing(),
            comps: domain.dim(),
            values: u.as_slice().to_vec(),
        })
    }

    /// Box domain (origin 0, no Dirichlet layer) matching the header.
    pub fn domain(&self) -> Result<LatticeDomain> {
        LatticeDomain::from_extents(self.dim, &vec![0.0; self.dim], &self.extents, self.delta)
    }

    /// Checks that the header agrees with `domain` (node counts and spacing).
    pub fn matches(&self, domain: &LatticeDomain) -> bool {
        self.dim == domain.dim() && self.extents == domain.extents() && self.delta == domain.spacing()
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        if self.comps != 1 {
            return Err(Error::InvalidParams(format!(
                "expected a scalar field, file has {} components",
                self.comps
            )));
        }
        Ok(ScalarField::from_values(self.values))
    }

    pub fn into_vector(self) -> Result<VectorField> {
        if self.comps != self.dim {
            return Err(Error::InvalidParams(format!(
                "expected a {}-component field, file has {}",
                self.dim, self.comps
            )));
        }
        VectorField::from_values(self.dim, self.values)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let n: Vec<String> = self.extents.iter().map(|e| e.to_string()).collect();
        writeln!(
            w,
            "GLF1 d={} n={} delta={} comps={}",
            self.dim,
            n.join(","),
            fmt17(self.delta),
            self.comps
        )?;
        let mut line = String::new();
        for row in self.values.chunks(self.comps) {
            line.clear();
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                write!(line, "{}", fmt17(*x)).expect("writing to a String cannot fail");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))??;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("GLF1") {
            return Err(parse_err(1, "missing GLF1 magic"));
        }
        let (mut dim, mut extents, mut delta, mut comps) = (None, None, None, None);
        for tok in tokens {
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(1, &format!("malformed header token `{tok}`")))?;
            match key {
                "d" => dim = Some(val.parse::<usize>().map_err(|e| parse_err(1, &e.to_string()))?),
                "n" => {
                    extents = Some(
                        val.split(',')
                            .map(|s| s.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| parse_err(1, &e.to_string()))?,
                    )
                }
                "delta" => delta = Some(val.parse::<f64>().map_err(|e| parse_err(1, &e.to_string()))?),
                "comps" => comps = Some(val.parse::<usize>().map_err(|e| parse_err(1, &e.to_string()))?),
                other => return Err(parse_err(1, &format!("unknown header key `{other}`"))),
            }
        }
        let dim = dim.ok_or_else(|| parse_err(1, "missing d"))?;
        let extents: Vec<usize> = extents.ok_or_else(|| parse_err(1, "missing n"))?;
        let delta = delta.ok_or_else(|| parse_err(1, "missing delta"))?;
        let comps = comps.ok_or_else(|| parse_err(1, "missing comps"))?;
        if extents.len() != dim {
            return Err(parse_err(1, "n has the wrong number of entries"));
        }
        if comps != 1 && comps != dim {
            return Err(parse_err(1, "comps must be 1 or d"));
        }
        let nodes: usize = extents.iter().product();
        let mut values = Vec::with_capacity(nodes * comps);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(i + 2, &e.to_string()))?;
            if row.len() != comps {
                return Err(parse_err(i + 2, &format!("expected {comps} values, got {}", row.len())));
            }
            values.extend(row);
        }
        if values.len() != nodes * comps {
            return Err(parse_err(
                0,
                &format!("expected {nodes} rows, got {}", values.len() / comps),
            ));
        }
        Ok(FieldFile { dim, extents, delta, comps, values })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_string() }
}

/// 17 significant digits in scientific notation.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
