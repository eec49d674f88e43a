//! Polygonal meshes: construction, face topology, region labels and the
//! clipped-Voronoi generator with Lloyd relaxation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::MeshError;
use crate::geometry::{self, cross, dot, norm, sub, Point, Rect};
use crate::math::sqrt;

/// Tissue label of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Grey,
    White,
}

/// A straight face of the mesh.
///
/// `normal` points out of `owner`; `neighbor` is `None` on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub endpoints: [Point; 2],
    pub owner: usize,
    pub neighbor: Option<usize>,
    pub normal: Point,
    pub length: f64,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.neighbor.is_some()
    }

    pub fn midpoint(&self) -> Point {
        [
            0.5 * (self.endpoints[0][0] + self.endpoints[1][0]),
            0.5 * (self.endpoints[0][1] + self.endpoints[1][1]),
        ]
    }
}

/// A conforming-or-not polygonal tessellation of a planar domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    region: Vec<Region>,
    interior_faces: Vec<Face>,
    boundary_faces: Vec<Face>,
    diameters: Vec<f64>,
    areas: Vec<f64>,
    centroids: Vec<Point>,
    bboxes: Vec<Rect>,
    bounds: Rect,
}

impl PolygonalMesh {
    /// Builds a mesh from vertices, counter-clockwise cell loops and labels.
    ///
    /// Validates every cell and recomputes faces, diameters, areas and centroids.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>, region: Vec<Region>) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::InvalidInput("mesh has no cells"));
        }
        if region.len() != cells.len() {
            return Err(MeshError::Inconsistent(format!(
                "{} region labels for {} cells",
                region.len(),
                cells.len()
            )));
        }
        let n_vertices = vertices.len();
        let mut areas = Vec::with_capacity(cells.len());
        let mut centroids = Vec::with_capacity(cells.len());
        let mut diameters = Vec::with_capacity(cells.len());
        let mut bboxes = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::InvalidCell { cell: c, reason: "fewer than three vertices" });
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= n_vertices) {
                return Err(MeshError::VertexOutOfRange { cell: c, vertex: v, n_vertices });
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if poly.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
                return Err(MeshError::InvalidCell { cell: c, reason: "non-finite vertex coordinate" });
            }
            let area = geometry::signed_area(&poly);
            if !(area > 0.0) {
                return Err(MeshError::InvalidCell { cell: c, reason: "not counter-clockwise or zero area" });
            }
            if !geometry::is_simple(&poly) {
                return Err(MeshError::InvalidCell { cell: c, reason: "self-intersecting" });
            }
            areas.push(area);
            centroids.push(geometry::centroid(&poly));
            diameters.push(geometry::diameter(&poly));
            bboxes.push(Rect::bounding(poly.iter().copied()));
        }
        let bounds = bboxes.iter().skip(1).fold(bboxes[0], |acc, b| acc.union(b));
        let (interior_faces, boundary_faces) = build_faces(&vertices, &cells, bounds.diagonal());
        Ok(PolygonalMesh {
            vertices,
            cells,
            region,
            interior_faces,
            boundary_faces,
            diameters,
            areas,
            centroids,
            bboxes,
            bounds,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &[usize] {
        &self.cells[k]
    }

    /// Vertex coordinates of cell `k` in counter-clockwise order.
    pub fn cell_polygon(&self, k: usize) -> Vec<Point> {
        self.cells[k].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn regions(&self) -> &[Region] {
        &self.region
    }

    pub fn region(&self, k: usize) -> Region {
        self.region[k]
    }

    pub fn interior_faces(&self) -> &[Face] {
        &self.interior_faces
    }

    pub fn boundary_faces(&self) -> &[Face] {
        &self.boundary_faces
    }

    /// Per-cell diameters `h_K`.
    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    /// Global mesh size `h = max_K h_K`.
    pub fn h(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    pub fn bbox(&self, k: usize) -> Rect {
        self.bboxes[k]
    }

    /// Bounding box of the whole mesh.
    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    /// Labels each cell Grey iff its centroid satisfies `y >= split_y`.
    pub fn assign_regions(mut self, split_y: f64) -> Self {
        for (r, c) in self.region.iter_mut().zip(self.centroids.iter()) {
            *r = if c[1] >= split_y { Region::Grey } else { Region::White };
        }
        self
    }

    /// Cell-to-cell adjacency through interior faces, sorted and deduplicated.
    pub fn cell_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_cells()];
        for f in &self.interior_faces {
            let n = f.neighbor.expect("interior face");
            adj[f.owner].push(n);
            adj[n].push(f.owner);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

/// Detects shared (possibly partially overlapping) edges.
///
/// Edges matched by an opposite vertex pair become interior faces directly;
/// remaining edges are matched geometrically so meshes with hanging vertices
/// are supported. Whatever stays uncovered is boundary.
fn build_faces(vertices: &[Point], cells: &[Vec<usize>], scale: f64) -> (Vec<Face>, Vec<Face>) {
    let tol = 1e-10 * scale;
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (c, cell) in cells.iter().enumerate() {
        let n = cell.len();
        for i in 0..n {
            by_pair.insert((cell[i], cell[(i + 1) % n]), c);
        }
    }
    let mut interior = Vec::new();
    let mut unmatched: Vec<(usize, usize, usize)> = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        let n = cell.len();
        for i in 0..n {
            let (a, b) = (cell[i], cell[(i + 1) % n]);
            match by_pair.get(&(b, a)) {
                Some(&d) if d != c => {
                    if c < d {
                        interior.push(make_face(vertices[a], vertices[b], c, Some(d)));
                    }
                }
                _ => unmatched.push((c, a, b)),
            }
        }
    }

    // covered parameter intervals along each unmatched edge
    let mut covered: Vec<Vec<(f64, f64)>> = vec![Vec::new(); unmatched.len()];
    for i in 0..unmatched.len() {
        let (c, a, b) = unmatched[i];
        let (pa, pb) = (vertices[a], vertices[b]);
        let t = sub(pb, pa);
        let len = norm(t);
        if len <= tol {
            continue;
        }
        let dir = [t[0] / len, t[1] / len];
        for j in (i + 1)..unmatched.len() {
            let (d, qa_i, qb_i) = unmatched[j];
            if d == c {
                continue;
            }
            let (qa, qb) = (vertices[qa_i], vertices[qb_i]);
            if dot(sub(qb, qa), dir) >= 0.0 {
                continue;
            }
            if cross(dir, sub(qa, pa)).abs() > tol || cross(dir, sub(qb, pa)).abs() > tol {
                continue;
            }
            let s0 = dot(sub(qb, pa), dir).max(0.0);
            let s1 = dot(sub(qa, pa), dir).min(len);
            if s1 - s0 <= tol {
                continue;
            }
            let p0 = [pa[0] + s0 * dir[0], pa[1] + s0 * dir[1]];
            let p1 = [pa[0] + s1 * dir[0], pa[1] + s1 * dir[1]];
            let (owner, neighbor) = if c < d { (c, d) } else { (d, c) };
            if owner == c {
                interior.push(make_face(p0, p1, owner, Some(neighbor)));
            } else {
                interior.push(make_face(p1, p0, owner, Some(neighbor)));
            }
            covered[i].push((s0, s1));
            let qlen = norm(sub(qb, qa));
            let qdir = [(qb[0] - qa[0]) / qlen, (qb[1] - qa[1]) / qlen];
            let r0 = dot(sub(p1, qa), qdir);
            let r1 = dot(sub(p0, qa), qdir);
            covered[j].push((r0.max(0.0), r1.min(qlen)));
        }
    }

    let mut boundary = Vec::new();
    for (i, &(c, a, b)) in unmatched.iter().enumerate() {
        let (pa, pb) = (vertices[a], vertices[b]);
        let len = norm(sub(pb, pa));
        if len <= tol {
            continue;
        }
        let dir = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
        let iv = &mut covered[i];
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut s = 0.0;
        let emit = |s0: f64, s1: f64, out: &mut Vec<Face>| {
            if s1 - s0 > tol {
                let p0 = [pa[0] + s0 * dir[0], pa[1] + s0 * dir[1]];
                let p1 = if s1 >= len { pb } else { [pa[0] + s1 * dir[0], pa[1] + s1 * dir[1]] };
                let p0 = if s0 <= 0.0 { pa } else { p0 };
                out.push(make_face(p0, p1, c, None));
            }
        };
        for &(s0, s1) in iv.iter() {
            emit(s, s0, &mut boundary);
            s = s.max(s1);
        }
        emit(s, len, &mut boundary);
    }
    (interior, boundary)
}

fn make_face(p0: Point, p1: Point, owner: usize, neighbor: Option<usize>) -> Face {
    let t = sub(p1, p0);
    let length = norm(t);
    // counter-clockwise traversal: outward normal is the tangent rotated clockwise
    let normal = [t[1] / length, -t[0] / length];
    Face { endpoints: [p0, p1], owner, neighbor, normal, length }
}

/// Generates a clipped Voronoi mesh of `domain` from `n_cells` random seeds,
/// followed by `lloyd_iters` Lloyd sweeps. All cells are labelled Grey.
///
/// Degenerate tessellations are retried with perturbed seeds up to ten times.
pub fn generate_polygonal_mesh(n_cells: usize, domain: Rect, seed: u64, lloyd_iters: usize) -> Result<PolygonalMesh, MeshError> {
    if n_cells == 0 {
        return Err(MeshError::InvalidInput("n_cells must be positive"));
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(MeshError::InvalidInput("domain must have positive area"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds: Vec<Point> = (0..n_cells)
        .map(|_| {
            [
                domain.min[0] + rng.gen::<f64>() * domain.width(),
                domain.min[1] + rng.gen::<f64>() * domain.height(),
            ]
        })
        .collect();
    const ATTEMPTS: usize = 10;
    let spacing = sqrt(domain.area() / n_cells as f64);
    for _ in 0..ATTEMPTS {
        match voronoi_mesh(&seeds, domain, lloyd_iters) {
            Ok(mesh) => return Ok(mesh),
            Err(MeshError::Generation { .. }) => {
                for s in seeds.iter_mut() {
                    s[0] = (s[0] + 1e-3 * spacing * (rng.gen::<f64>() - 0.5)).clamp(domain.min[0], domain.max[0]);
                    s[1] = (s[1] + 1e-3 * spacing * (rng.gen::<f64>() - 0.5)).clamp(domain.min[1], domain.max[1]);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(MeshError::Generation { attempts: ATTEMPTS })
}

/// Clipped Voronoi mesh of `domain` from explicit seeds after `lloyd_iters`
/// Lloyd sweeps. Returns `MeshError::Generation` when a cell is degenerate.
pub fn voronoi_mesh(seeds: &[Point], domain: Rect, lloyd_iters: usize) -> Result<PolygonalMesh, MeshError> {
    if seeds.is_empty() {
        return Err(MeshError::InvalidInput("no seeds"));
    }
    if seeds.iter().any(|s| !domain.contains(*s)) {
        return Err(MeshError::InvalidInput("seed outside the domain"));
    }
    let mut sites = seeds.to_vec();
    let mut polys = voronoi_cells(&sites, domain);
    for _ in 0..lloyd_iters {
        for (s, p) in sites.iter_mut().zip(polys.iter()) {
            if p.len() >= 3 && geometry::signed_area(p) > 0.0 {
                *s = geometry::centroid(p);
            }
        }
        polys = voronoi_cells(&sites, domain);
    }
    let min_area = 1e-12 * domain.area();
    if polys.iter().any(|p| p.len() < 3 || geometry::signed_area(p) < min_area) {
        return Err(MeshError::Generation { attempts: 1 });
    }
    let (vertices, cells) = weld(&polys, 1e-10 * domain.diagonal());
    if cells.iter().any(|c| c.len() < 3) {
        return Err(MeshError::Generation { attempts: 1 });
    }
    let region = vec![Region::Grey; cells.len()];
    PolygonalMesh::new(vertices, cells, region).map_err(|e| match e {
        MeshError::InvalidCell { .. } => MeshError::Generation { attempts: 1 },
        other => other,
    })
}

/// Voronoi cell polygons by successive half-plane clipping, visiting
/// candidate neighbours ring by ring in a bucket grid until no further site
/// can cut the cell.
fn voronoi_cells(sites: &[Point], domain: Rect) -> Vec<Vec<Point>> {
    let n = sites.len();
    let nb = (sqrt(n as f64) as usize).max(1);
    let bw = domain.width() / nb as f64;
    let bh = domain.height() / nb as f64;
    let bucket_of = |p: Point| -> (usize, usize) {
        let i = (((p[0] - domain.min[0]) / bw) as usize).min(nb - 1);
        let j = (((p[1] - domain.min[1]) / bh) as usize).min(nb - 1);
        (i, j)
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb * nb];
    for (k, &s) in sites.iter().enumerate() {
        let (i, j) = bucket_of(s);
        buckets[j * nb + i].push(k);
    }
    let ring_width = bw.min(bh);
    let corners = domain.corners();
    let mut out = Vec::with_capacity(n);
    for (k, &s) in sites.iter().enumerate() {
        let mut poly: Vec<Point> = corners.to_vec();
        let (bi, bj) = bucket_of(s);
        let mut r = 0usize;
        loop {
            let ilo = bi.saturating_sub(r);
            let ihi = (bi + r).min(nb - 1);
            let jlo = bj.saturating_sub(r);
            let jhi = (bj + r).min(nb - 1);
            for j in jlo..=jhi {
                for i in ilo..=ihi {
                    let on_ring = i + r == bi || i == bi + r || j + r == bj || j == bj + r;
                    if !on_ring {
                        continue;
                    }
                    for &o in &buckets[j * nb + i] {
                        if o == k {
                            continue;
                        }
                        let t = sites[o];
                        let normal = sub(t, s);
                        if normal[0] == 0.0 && normal[1] == 0.0 {
                            continue;
                        }
                        let offset = 0.5 * (dot(t, t) - dot(s, s));
                        poly = geometry::clip_half_plane(&poly, normal, offset);
                    }
                }
            }
            let reach = poly.iter().map(|&p| geometry::distance(p, s)).fold(0.0, f64::max);
            let covered_all = ilo == 0 && jlo == 0 && ihi == nb - 1 && jhi == nb - 1;
            if covered_all || (r as f64) * ring_width >= 2.0 * reach {
                break;
            }
            r += 1;
        }
        out.push(poly);
    }
    out
}

/// Merges vertices closer than `tol` and drops repeated consecutive indices.
fn weld(polys: &[Vec<Point>], tol: f64) -> (Vec<Point>, Vec<Vec<usize>>) {
    let cell_size = 4.0 * tol;
    let key = |p: Point| -> (i64, i64) { ((p[0] / cell_size) as i64, (p[1] / cell_size) as i64) };
    let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let mut vertices: Vec<Point> = Vec::new();
    let mut cells = Vec::with_capacity(polys.len());
    for poly in polys {
        let mut cell: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if geometry::distance(vertices[v], p) <= tol {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = match found {
                Some(v) => v,
                None => {
                    vertices.push(p);
                    grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            if cell.last() != Some(&v) {
                cell.push(v);
            }
        }
        while cell.len() > 1 && cell.first() == cell.last() {
            cell.pop();
        }
        cells.push(cell);
    }
    (vertices, cells)
}
