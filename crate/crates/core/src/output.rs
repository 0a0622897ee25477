//! CSV and JSON artifacts. Floats carry 17 significant digits and every file
//! is written to a sibling temporary and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::ResidualRow;
use crate::error::{Error, Result};
use crate::grid::{DiscreteField, Grid};
use crate::sweep::SweepRow;

/// Round-trip exact float text.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn coord_header(dim: usize) -> Vec<&'static str> {
    if dim == 1 {
        vec!["x"]
    } else {
        vec!["x", "y"]
    }
}

fn coords(x: [f64; 2], dim: usize) -> Vec<String> {
    x[..dim].iter().map(|&c| fmt_f64(c)).collect()
}

pub fn solution_csv(field: &DiscreteField) -> Result<Vec<u8>> {
    let g = field.grid();
    let mut header = coord_header(g.dim());
    header.push("u");
    csv_bytes(
        &header,
        (0..g.node_count()).map(|k| {
            let mut row = coords(g.node_point(k), g.dim());
            row.push(fmt_f64(field.values()[k]));
            row
        }),
    )
}

pub fn write_solution(path: &Path, field: &DiscreteField) -> Result<()> {
    write_atomic(path, &solution_csv(field)?)
}

/// Reads a solution CSV onto `grid`. Node coordinates must match the grid.
pub fn read_solution(path: &Path, grid: Arc<Grid>) -> Result<DiscreteField> {
    let bad = |m: String| Error::Discretization(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_path(path)?;
    let dim = grid.dim();
    let mut header = coord_header(dim);
    header.push("u");
    let got: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        return Err(bad(format!("header {got:?}, expected {header:?}")));
    }
    let tol = 1e-9 * grid.h();
    let mut values = Vec::with_capacity(grid.node_count());
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(format!("row {}: {s:?} is not a number", k + 1))))
            .collect::<Result<_>>()?;
        if k >= grid.node_count() {
            return Err(bad(format!("more rows than the {} grid nodes", grid.node_count())));
        }
        let x = grid.node_point(k);
        if (0..dim).any(|i| (nums[i] - x[i]).abs() > tol) {
            return Err(bad(format!("row {} is not at node {k} of the configured grid", k + 1)));
        }
        values.push(nums[dim]);
    }
    if values.len() != grid.node_count() {
        return Err(bad(format!("{} rows for {} grid nodes", values.len(), grid.node_count())));
    }
    DiscreteField::new(grid, values)
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["n", "F", "logF", "root", "d_root", "supgradD", "supdiff", "iters"],
        rows.iter().map(|r| {
            let mut v: Vec<String> = [r.n, r.total, r.log_total, r.root, r.d_root, r.sup_grad_d, r.sup_diff]
                .into_iter()
                .map(fmt_f64)
                .collect();
            v.push(r.iterations.to_string());
            v
        }),
    )
}

pub fn check_csv(rows: &[ResidualRow], dim: usize) -> Result<Vec<u8>> {
    let mut header = coord_header(dim);
    header.extend(["region", "kind", "value", "verdict"]);
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            let mut v = coords(r.point, dim);
            v.push(r.region.to_string());
            v.push(r.kind.to_string());
            v.push(fmt_f64(r.value));
            v.push(
                match r.satisfied {
                    Some(true) => "satisfied",
                    Some(false) => "violated",
                    None => "n/a",
                }
                .into(),
            );
            v
        }),
    )
}

/// The `x,u` oracle curve.
pub fn curve_csv(points: &[(f64, f64)]) -> Result<Vec<u8>> {
    csv_bytes(&["x", "u"], points.iter().map(|&(x, u)| vec![fmt_f64(x), fmt_f64(u)]))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
