//! Text mesh format:
//!
//! ```text
//! polymesh 2 <n_cells> <n_vertices>
//! x y                      (n_vertices lines)
//! k v1 ... vk G|W          (n_cells lines, 0-based vertex indices)
//! ```
//!
//! Lines starting with `#` are comments.

use std::fs;
use std::io::Write;
use std::path::Path;

use polydg_core::mesh::{PolygonalMesh, Region};

use crate::error::CliError;

/// Renders a mesh in the text format. Coordinates use the shortest
/// representation that parses back to the same `f64`.
pub fn format_mesh(mesh: &PolygonalMesh) -> String {
    let mut s = format!("polymesh 2 {} {}\n", mesh.n_cells(), mesh.n_vertices());
    for v in mesh.vertices() {
        s.push_str(&format!("{:?} {:?}\n", v[0], v[1]));
    }
    for (k, cell) in mesh.cells().iter().enumerate() {
        s.push_str(&cell.len().to_string());
        for v in cell {
            s.push(' ');
            s.push_str(&v.to_string());
        }
        s.push_str(match mesh.region(k) {
            Region::Grey => " G\n",
            Region::White => " W\n",
        });
    }
    s
}

pub fn write_mesh(mesh: &PolygonalMesh, path: &Path) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(CliError::io(path))?;
    f.write_all(format_mesh(mesh).as_bytes()).map_err(CliError::io(path))
}

pub fn read_mesh(path: &Path) -> Result<PolygonalMesh, CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_mesh(&text, path)
}

pub fn parse_mesh(text: &str, path: &Path) -> Result<PolygonalMesh, CliError> {
    let err = |line: usize, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| err(1, "empty mesh file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "polymesh" || h[1] != "2" {
        return Err(err(ln, format!("expected header `polymesh 2 <n_cells> <n_vertices>`, found `{header}`")));
    }
    let n_cells: usize = h[2].parse().map_err(|_| err(ln, format!("bad cell count `{}`", h[2])))?;
    let n_vertices: usize = h[3].parse().map_err(|_| err(ln, format!("bad vertex count `{}`", h[3])))?;

    let mut vertices = Vec::with_capacity(n_vertices);
    for i in 0..n_vertices {
        let (ln, l) = lines.next().ok_or_else(|| err(ln, format!("file ends after {i} of {n_vertices} vertices")))?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(err(ln, format!("expected `x y`, found `{l}`")));
        }
        let x: f64 = parts[0].parse().map_err(|_| err(ln, format!("bad coordinate `{}`", parts[0])))?;
        let y: f64 = parts[1].parse().map_err(|_| err(ln, format!("bad coordinate `{}`", parts[1])))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(err(ln, "non-finite coordinate".into()));
        }
        vertices.push([x, y]);
    }

    let mut cells = Vec::with_capacity(n_cells);
    let mut regions = Vec::with_capacity(n_cells);
    for i in 0..n_cells {
        let (ln, l) = lines.next().ok_or_else(|| err(ln, format!("file ends after {i} of {n_cells} cells")))?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let k: usize = parts.first().and_then(|s| s.parse().ok()).ok_or_else(|| err(ln, format!("bad cell line `{l}`")))?;
        if parts.len() != k + 2 {
            return Err(err(ln, format!("cell declares {k} vertices but has {} fields", parts.len())));
        }
        let cell = parts[1..=k]
            .iter()
            .map(|s| s.parse::<usize>().map_err(|_| err(ln, format!("bad vertex index `{s}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let region = match parts[k + 1] {
            "G" => Region::Grey,
            "W" => Region::White,
            r => return Err(err(ln, format!("region must be G or W, found `{r}`"))),
        };
        cells.push(cell);
        regions.push(region);
    }
    if let Some((ln, l)) = lines.next() {
        return Err(err(ln, format!("unexpected trailing content `{l}`")));
    }
    Ok(PolygonalMesh::new(vertices, cells, regions)?)
}
