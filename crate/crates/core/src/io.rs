//! Grid exchange format.
//!
//! ```text
//! # {"format":"weylchar-grid/1","quantity":"char","axes":["eta","xi"],"extent":12.0,"points":128,"hbar":1.0,"meta":{...}}
//! eta,xi,re,im
//! -1.2e1,-1.2e1,3.1e-32,0e0
//! ...
//! ```
//!
//! Line 1 is `# ` followed by a single-line JSON object. Line 2 names the
//! columns. Data rows follow with the first-axis index as the outer loop and
//! the second-axis index as the inner loop, `points^2` rows in total. Complex
//! grids carry `re,im` columns, real grids a single `value` column. Numbers
//! are written in Rust's shortest round-trip exponent form (`{:e}`), lines
//! end with `\n`.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Axes, PhaseGrid};

pub const FORMAT_TAG: &str = "weylchar-grid/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub format: String,
    pub quantity: String,
    pub axes: [String; 2],
    pub extent: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hbar: Option<f64>,
    #[serde(default)]
    pub meta: serde_json::Value,
}

impl GridHeader {
    pub fn new(quantity: &str, grid: &PhaseGrid, hbar: Option<f64>, meta: serde_json::Value) -> Self {
        let [a, b] = grid.axes().labels();
        Self {
            format: FORMAT_TAG.to_string(),
            quantity: quantity.to_string(),
            axes: [a.to_string(), b.to_string()],
            extent: grid.extent(),
            points: grid.points(),
            hbar,
            meta,
        }
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        let axes = match (self.axes[0].as_str(), self.axes[1].as_str()) {
            ("eta", "xi") => Axes::EtaXi,
            ("q", "p") => Axes::QP,
            (a, b) => return Err(Error::Format(format!("unknown axes ({a}, {b})"))),
        };
        PhaseGrid::new(self.extent, self.points, axes)
    }
}

fn write_header<W: Write>(out: &mut W, header: &GridHeader, columns: &[&str]) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(header)?)?;
    let [a, b] = &header.axes;
    writeln!(out, "{a},{b},{}", columns.join(","))?;
    Ok(())
}

pub fn write_complex_grid<W: Write>(out: &mut W, header: &GridHeader, values: &DMatrix<Complex64>) -> Result<()> {
    let grid = header.grid()?;
    check_shape(&grid, values.shape())?;
    write_header(out, header, &["re", "im"])?;
    let c = grid.coords();
    for i in 0..grid.points() {
        for j in 0..grid.points() {
            let v = values[(i, j)];
            writeln!(out, "{:e},{:e},{:e},{:e}", c[i], c[j], v.re, v.im)?;
        }
    }
    Ok(())
}

pub fn write_real_grid<W: Write>(out: &mut W, header: &GridHeader, values: &DMatrix<f64>) -> Result<()> {
    let grid = header.grid()?;
    check_shape(&grid, values.shape())?;
    write_header(out, header, &["value"])?;
    let c = grid.coords();
    for i in 0..grid.points() {
        for j in 0..grid.points() {
            writeln!(out, "{:e},{:e},{:e}", c[i], c[j], values[(i, j)])?;
        }
    }
    Ok(())
}

fn check_shape(grid: &PhaseGrid, shape: (usize, usize)) -> Result<()> {
    let m = grid.points();
    if shape != (m, m) {
        return Err(Error::GridMismatch(format!("values are {shape:?}, grid is {m}x{m}")));
    }
    Ok(())
}

fn parse_f64(field: Option<&str>, line: usize) -> Result<f64> {
    field
        .ok_or_else(|| Error::Format(format!("line {line}: missing column")))?
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Format(format!("line {line}: {e}")))
}

/// Reads a grid file; returns the header and the value columns as complex
/// numbers (real grids get a zero imaginary part).
pub fn read_grid<R: BufRead>(input: R) -> Result<(GridHeader, DMatrix<Complex64>)> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("first line must start with '# '".into()))?;
    let header: GridHeader = serde_json::from_str(json)?;
    if header.format != FORMAT_TAG {
        return Err(Error::Format(format!("unsupported format tag {}", header.format)));
    }
    let grid = header.grid()?;
    let columns = lines
        .next()
        .ok_or_else(|| Error::Format("missing column line".into()))??;
    let complex = match columns.split(',').count() {
        4 => true,
        3 => false,
        n => return Err(Error::Format(format!("expected 3 or 4 columns, got {n}"))),
    };
    let m = grid.points();
    let mut values = DMatrix::zeros(m, m);
    let mut count = 0usize;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if count >= m * m {
            return Err(Error::Format("too many rows".into()));
        }
        let lineno = idx + 3;
        let mut f = line.split(',');
        let x = parse_f64(f.next(), lineno)?;
        let y = parse_f64(f.next(), lineno)?;
        let (i, j) = (count / m, count % m);
        if (x - grid.coord(i)).abs() > 1e-9 * grid.extent() || (y - grid.coord(j)).abs() > 1e-9 * grid.extent() {
            return Err(Error::Format(format!("line {lineno}: coordinates do not match the header grid")));
        }
        let re = parse_f64(f.next(), lineno)?;
        let im = if complex { parse_f64(f.next(), lineno)? } else { 0.0 };
        values[(i, j)] = Complex64::new(re, im);
        count += 1;
    }
    if count != m * m {
        return Err(Error::Format(format!("expected {} rows, got {count}", m * m)));
    }
    Ok((header, values))
}
