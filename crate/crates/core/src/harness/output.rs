//! CSV, JSON and legacy-ASCII VTK writers.

use super::study::{stress_magnitude, LevelRow, Solved, StudyReport};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

type Scalar = fn(&crate::weaksym::PointValues) -> f64;

pub fn csv_string(rows: &[LevelRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_csv(rows: &[LevelRow], path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(rows)?)?;
    Ok(())
}

pub fn write_json(report: &StudyReport, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

/// Structured grid of `m` x `m` points over one patch with displacement, stress entries
/// and stress magnitude as point data.
pub fn vtk_string(sol: &Solved, patch: usize, m: usize) -> Result<String> {
    let mut pts = Vec::with_capacity(m * m);
    for b in 0..m {
        for a in 0..m {
            let z = [a as f64 / (m - 1) as f64, b as f64 / (m - 1) as f64];
            pts.push(sol.eval(patch, z)?);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nisoelast patch {patch}\nASCII\nDATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {m} {m} 1\nPOINTS {} double", m * m);
    for v in &pts {
        let _ = writeln!(s, "{:e} {:e} 0", v.x[0], v.x[1]);
    }
    let _ = writeln!(s, "POINT_DATA {}\nVECTORS displacement double", m * m);
    for v in &pts {
        let _ = writeln!(s, "{:e} {:e} 0", v.u[0], v.u[1]);
    }
    let scalars: [(&str, Scalar); 6] = [
        ("u1", |v| v.u[0]),
        ("u2", |v| v.u[1]),
        ("sigma11", |v| v.sigma[0][0]),
        ("sigma12", |v| v.sigma[0][1]),
        ("sigma22", |v| v.sigma[1][1]),
        ("stress_magnitude", |v| stress_magnitude(&v.sigma)),
    ];
    for (name, f) in scalars {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in &pts {
            let _ = writeln!(s, "{:e}", f(v));
        }
    }
    Ok(s)
}

pub fn write_vtk(sol: &Solved, patch: usize, m: usize, path: &Path) -> Result<()> {
    std::fs::write(path, vtk_string(sol, patch, m)?)?;
    Ok(())
}
