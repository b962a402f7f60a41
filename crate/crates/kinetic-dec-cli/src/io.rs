//! CSV and JSON artifacts.
//!
//! All numbers are written as `{:.16e}` (17 significant digits), which
//! parses back to the identical `f64`.

use std::io::{Read, Write};

use kinetic_dec::cases::{ConvergenceRow, StepFlags};
use kinetic_dec::fourier::RasterCell;
use kinetic_dec::grid::{Field, Grid2D};

use crate::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Rows `x,y,<names...>` with `j` outer and `i` inner.
pub fn write_field_csv<W: Write>(u: &Field, names: &[&str], w: W) -> Result<(), CliError> {
    if names.len() != u.ncomp() {
        return Err(CliError::Config("column names do not match the field".into()));
    }
    if let Some(k) = u.first_non_finite() {
        return Err(CliError::Solver(kinetic_dec::Error::NonFinite { what: "field value", index: k }));
    }
    let g = u.grid();
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["x", "y"];
    header.extend_from_slice(names);
    out.write_record(&header)?;
    let mut rec = Vec::with_capacity(names.len() + 2);
    for j in 0..g.ny {
        for i in 0..g.nx {
            rec.clear();
            rec.push(num(g.x(i)));
            rec.push(num(g.y(j)));
            for c in 0..u.ncomp() {
                rec.push(num(u.get(i, j, c)));
            }
            out.write_record(&rec)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Header and numeric rows of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Parses a numeric CSV; empty cells read as NaN.
pub fn read_csv<R: Read>(r: R) -> Result<Table, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.iter().map(String::from).collect::<Vec<_>>();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(f64::NAN)
                } else {
                    s.parse::<f64>().map_err(|e| CliError::Config(format!("bad number '{s}': {e}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Rebuilds a field written by [`write_field_csv`] on `grid`.
pub fn field_from_table(grid: Grid2D, t: &Table) -> Result<Field, CliError> {
    let ncomp = t.header.len().saturating_sub(2);
    if ncomp == 0 || t.header[0] != "x" || t.header[1] != "y" || t.rows.len() != grid.nodes() {
        return Err(CliError::Config("table does not match the grid".into()));
    }
    let mut u = Field::zeros(grid, ncomp);
    for (k, row) in t.rows.iter().enumerate() {
        let (i, j) = (k % grid.nx, k / grid.nx);
        for c in 0..ncomp {
            u.set(i, j, c, row[c + 2]);
        }
    }
    Ok(u)
}

/// `n,h,l1,l1_slope,l2,l2_slope,linf,linf_slope`; the first row has empty
/// slopes.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "h", "l1", "l1_slope", "l2", "l2_slope", "linf", "linf_slope"])?;
    for r in rows {
        let s = |f: fn(&kinetic_dec::grid::Norms) -> f64| r.slopes.as_ref().map(|n| num(f(n))).unwrap_or_default();
        out.write_record([
            r.n.to_string(),
            num(r.h),
            num(r.errors.l1),
            s(|n| n.l1),
            num(r.errors.l2),
            s(|n| n.l2),
            num(r.errors.linf),
            s(|n| n.linf),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `re,im,modulus` samples of the amplification factor.
pub fn write_raster_csv<W: Write>(cells: &[RasterCell], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["re", "im", "modulus"])?;
    for c in cells {
        out.write_record([num(c.re), num(c.im), num(c.modulus)])?;
    }
    out.flush()?;
    Ok(())
}

/// `step,time,dt,lambda,trial_nodes,quads,fallback` per step.
pub fn write_flags_csv<W: Write>(flags: &[StepFlags], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "time", "dt", "lambda", "trial_nodes", "quads", "fallback"])?;
    for f in flags {
        out.write_record([
            f.step.to_string(),
            num(f.time),
            num(f.dt),
            num(f.lambda),
            f.trial_nodes.to_string(),
            f.quads.to_string(),
            u8::from(f.fallback).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `x,y,count`: how many steps flagged the quad whose lower-left node is
/// `(x, y)`.
pub fn write_flag_map_csv<W: Write>(grid: &Grid2D, counts: &[u32], w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "y", "count"])?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            out.write_record([num(grid.x(i)), num(grid.y(j)), counts[grid.node(i, j)].to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
