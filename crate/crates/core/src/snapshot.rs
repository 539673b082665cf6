//! Plain-text spectral dumps.
//!
//! ```text
//! # couette-snapshot v1
//! # grid nx=16 ny=64 nz=16 ly=32
//! # time 0.0e0
//! # nu 1.0e-2
//! k,j,l,eta,u1_re,u1_im,u2_re,u2_im,u3_re,u3_im
//! 1,5,1,9.8e-1,...
//! ```
//!
//! Only modes with a non-zero coefficient are listed; values are written
//! with 17 significant digits so a dump reads back bit for bit.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::VelocityField;
use crate::spectral::GridSpec;

const MAGIC: &str = "# couette-snapshot v1";
const COLUMNS: &str = "k,j,l,eta,u1_re,u1_im,u2_re,u2_im,u3_re,u3_im";

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: VelocityField,
    pub nu: f64,
}

pub fn format_snapshot(u: &VelocityField, nu: f64) -> String {
    let g = u.grid();
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    writeln!(s, "# grid nx={} ny={} nz={} ly={:e}", g.nx, g.ny, g.nz, g.ly).unwrap();
    writeln!(s, "# time {:.17e}", u.time()).unwrap();
    writeln!(s, "# nu {:.17e}", nu).unwrap();
    writeln!(s, "{COLUMNS}").unwrap();
    for idx in 0..g.len() {
        let c = [u.u[0].coeffs[idx], u.u[1].coeffs[idx], u.u[2].coeffs[idx]];
        if c.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let (k, j, l) = g.mode(idx);
        write!(s, "{k},{j},{l},{:.17e}", g.eta_of(j)).unwrap();
        for z in c {
            write!(s, ",{:.17e},{:.17e}", z.re, z.im).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_snapshot(path: &Path, u: &VelocityField, nu: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(format_snapshot(u, nu).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    parse_snapshot(&std::fs::read_to_string(path)?)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Snapshot(msg.into())
}

pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(bad("missing header line"));
    }
    let grid_line = lines.next().ok_or_else(|| bad("missing grid line"))?;
    let mut dims = [None::<f64>; 4];
    for tok in grid_line.trim_start_matches("# grid").split_whitespace() {
        let (key, val) = tok.split_once('=').ok_or_else(|| bad(format!("bad grid token {tok}")))?;
        let v: f64 = val.parse().map_err(|_| bad(format!("bad grid value {tok}")))?;
        let slot = ["nx", "ny", "nz", "ly"].iter().position(|k| *k == key).ok_or_else(|| bad(format!("unknown key {key}")))?;
        dims[slot] = Some(v);
    }
    let [Some(nx), Some(ny), Some(nz), Some(ly)] = dims else {
        return Err(bad("grid line must give nx, ny, nz, ly"));
    };
    let grid = GridSpec::new(nx as usize, ny as usize, nz as usize, ly)?;
    let scalar = |line: Option<&str>, key: &str| -> Result<f64> {
        let line = line.ok_or_else(|| bad(format!("missing {key} line")))?;
        line.strip_prefix(&format!("# {key} "))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(format!("bad {key} line: {line}")))
    };
    let time = scalar(lines.next(), "time")?;
    let nu = scalar(lines.next(), "nu")?;
    if lines.next().map(str::trim) != Some(COLUMNS) {
        return Err(bad("missing column header"));
    }
    let mut field = VelocityField::zeros(grid, time);
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 10 {
            return Err(bad(format!("row {}: expected 10 fields", n + 1)));
        }
        let int = |s: &str| s.trim().parse::<i64>().map_err(|_| bad(format!("row {}: bad index {s}", n + 1)));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("row {}: bad number {s}", n + 1)));
        let idx = grid
            .index_of(int(parts[0])?, int(parts[1])?, int(parts[2])?)
            .ok_or_else(|| bad(format!("row {}: mode outside grid", n + 1)))?;
        for i in 0..3 {
            field.u[i].coeffs[idx] = Complex64::new(num(parts[4 + 2 * i])?, num(parts[5 + 2 * i])?);
        }
    }
    Ok(Snapshot { field, nu })
}
