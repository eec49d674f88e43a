//! Cell-mean snapshots of the potential in legacy VTK and CSV form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use polydg_core::dgspace::DgSpace;

use crate::config::SnapshotFormat;
use crate::error::CliError;

pub fn cell_means(space: &DgSpace, u: &[f64]) -> Vec<f64> {
    (0..space.n_elements()).map(|k| space.cell_mean(u, k)).collect()
}

pub fn export_snapshot(space: &DgSpace, u: &[f64], t: f64, path: &Path, format: SnapshotFormat) -> Result<(), CliError> {
    let means = cell_means(space, u);
    let text = match format {
        SnapshotFormat::VtkLegacy => format_vtk(space, &means, t),
        SnapshotFormat::CsvCellMeans => return write_csv(space, &means, path),
    };
    fs::write(path, text).map_err(CliError::io(path))
}

fn format_vtk(space: &DgSpace, means: &[f64], t: f64) -> String {
    let mesh = space.mesh();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "polydg transmembrane potential t={t:?} ms");
    s.push_str("ASCII\nDATASET POLYDATA\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?} 0", v[0], v[1]);
    }
    let size: usize = mesh.cells().iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "POLYGONS {} {}", mesh.n_cells(), size);
    for c in mesh.cells() {
        s.push_str(&c.len().to_string());
        for v in c {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
    s.push_str("SCALARS u_mean double 1\nLOOKUP_TABLE default\n");
    for m in means {
        let _ = writeln!(s, "{m:?}");
    }
    s
}

fn write_csv(space: &DgSpace, means: &[f64], path: &Path) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["cell_id", "centroid_x", "centroid_y", "u_mean"]).map_err(csv_err)?;
    for (k, (c, m)) in space.mesh().centroids().iter().zip(means).enumerate() {
        w.write_record([k.to_string(), format!("{:?}", c[0]), format!("{:?}", c[1]), format!("{m:?}")]).map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMean {
    pub cell_id: usize,
    pub centroid: [f64; 2],
    pub u_mean: f64,
}

pub fn read_csv_cellmeans(path: &Path) -> Result<Vec<CellMean>, CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().collect::<Vec<_>>() != ["cell_id", "centroid_x", "centroid_y", "u_mean"] {
        return Err(CliError::Parse { path: path.to_path_buf(), line: 1, message: "unexpected cell-means header".into() });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = || CliError::Parse { path: path.to_path_buf(), line: i + 2, message: "malformed cell-means row".into() };
        let f = |j: usize| rec.get(j).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
        let cell_id = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        out.push(CellMean { cell_id, centroid: [f(1)?, f(2)?], u_mean: f(3)? });
    }
    Ok(out)
}

/// Cell data read back from a legacy VTK snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkSnapshot {
    pub t: Option<f64>,
    pub n_points: usize,
    pub n_cells: usize,
    pub u_mean: Vec<f64>,
}

pub fn read_vtk(path: &Path) -> Result<VtkSnapshot, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let err = |line: usize, message: &str| CliError::Parse { path: path.to_path_buf(), line, message: message.into() };
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().map(|l| l.trim()) != Some("# vtk DataFile Version 3.0") {
        return Err(err(1, "not a legacy VTK file"));
    }
    let t = lines.get(1).and_then(|l| l.split("t=").nth(1)).and_then(|s| s.split_whitespace().next()).and_then(|s| s.parse().ok());
    let mut n_points = None;
    let mut n_cells = None;
    let mut u_mean = Vec::new();
    let mut i = 2;
    while i < lines.len() {
        let parts: Vec<&str> = lines[i].split_whitespace().collect();
        match parts.first().copied() {
            Some("POINTS") => n_points = parts.get(1).and_then(|s| s.parse().ok()),
            Some("POLYGONS") => n_cells = parts.get(1).and_then(|s| s.parse::<usize>().ok()),
            Some("SCALARS") => {
                let n = n_cells.ok_or_else(|| err(i + 1, "cell data before POLYGONS"))?;
                // skip the lookup-table line
                for j in 0..n {
                    let ln = i + 2 + j;
                    let v = lines.get(ln).and_then(|l| l.trim().parse::<f64>().ok()).ok_or_else(|| err(ln + 1, "bad cell value"))?;
                    u_mean.push(v);
                }
                i += 1 + n;
            }
            _ => {}
        }
        i += 1;
    }
    let n_cells = n_cells.ok_or_else(|| err(lines.len(), "missing POLYGONS section"))?;
    if u_mean.len() != n_cells {
        return Err(err(lines.len(), "missing cell data"));
    }
    Ok(VtkSnapshot { t, n_points: n_points.unwrap_or(0), n_cells, u_mean })
}

/// Snapshot path for step `k`.
pub fn snapshot_path(dir: &Path, k: usize, format: SnapshotFormat) -> PathBuf {
    dir.join(format!("u_{k:06}.{}", format.extension()))
}
