//! Nested agglomeration of polygonal meshes into subdomain and coarse
//! partitions.
//!
//! Agglomerates are grown by greedy pairwise merging on the face-adjacency
//! graph: at every step the adjacent, same-region pair whose union has the
//! smallest diameter is merged (ties broken by the lower index pair). Merging
//! only ever joins adjacent agglomerates of equal region, so every agglomerate
//! stays face-connected and region-pure, and applying the procedure to a
//! partition yields a nested coarser level.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::MeshError;
use crate::geometry::{self, Point, Rect};
use crate::mesh::{PolygonalMesh, Region};

/// A non-overlapping partition of a fine mesh into agglomerates.
#[derive(Debug, Clone, PartialEq)]
pub struct AgglomeratedPartition {
    owner: Vec<usize>,
    members: Vec<Vec<usize>>,
    diameters: Vec<f64>,
    regions: Vec<Region>,
    bboxes: Vec<Rect>,
    target: usize,
    target_met: bool,
}

impl AgglomeratedPartition {
    /// The trivial partition `owner[i] = i` (one fine cell per agglomerate).
    pub fn identity(mesh: &PolygonalMesh) -> Self {
        let n = mesh.n_cells();
        AgglomeratedPartition {
            owner: (0..n).collect(),
            members: (0..n).map(|k| vec![k]).collect(),
            diameters: mesh.diameters().to_vec(),
            regions: mesh.regions().to_vec(),
            bboxes: (0..n).map(|k| mesh.bbox(k)).collect(),
            target: n,
            target_met: true,
        }
    }

    /// Builds a partition from an explicit owner map, validating coverage,
    /// connectivity and region purity.
    pub fn from_owner(mesh: &PolygonalMesh, owner: Vec<usize>) -> Result<Self, MeshError> {
        if owner.len() != mesh.n_cells() {
            return Err(MeshError::InvalidInput("owner map length differs from the cell count"));
        }
        let n_parts = owner.iter().copied().max().map_or(0, |m| m + 1);
        let mut members = vec![Vec::new(); n_parts];
        for (k, &o) in owner.iter().enumerate() {
            members[o].push(k);
        }
        if members.iter().any(|m| m.is_empty()) {
            return Err(MeshError::InvalidInput("owner map skips an agglomerate index"));
        }
        let part = Self::from_members(mesh, members, n_parts, true);
        part.validate(mesh)?;
        Ok(part)
    }

    fn from_members(mesh: &PolygonalMesh, members: Vec<Vec<usize>>, target: usize, target_met: bool) -> Self {
        let mut owner = vec![0; mesh.n_cells()];
        let mut diameters = Vec::with_capacity(members.len());
        let mut regions = Vec::with_capacity(members.len());
        let mut bboxes = Vec::with_capacity(members.len());
        for (a, m) in members.iter().enumerate() {
            let mut pts: Vec<Point> = Vec::new();
            for &k in m {
                owner[k] = a;
                pts.extend(mesh.cell(k).iter().map(|&v| mesh.vertices()[v]));
            }
            let hull = geometry::convex_hull(&pts);
            diameters.push(geometry::diameter(&hull));
            regions.push(mesh.region(m[0]));
            bboxes.push(Rect::bounding(pts.iter().copied()));
        }
        AgglomeratedPartition { owner, members, diameters, regions, bboxes, target, target_met }
    }

    /// Number of agglomerates `N`.
    pub fn n_parts(&self) -> usize {
        self.members.len()
    }

    /// Agglomerate index of every fine cell.
    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// Fine cells of agglomerate `a`, in increasing order.
    pub fn members(&self, a: usize) -> &[usize] {
        &self.members[a]
    }

    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    /// Coarse mesh size `H = max diameter`.
    pub fn h_max(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    pub fn region(&self, a: usize) -> Region {
        self.regions[a]
    }

    pub fn bbox(&self, a: usize) -> Rect {
        self.bboxes[a]
    }

    /// Requested agglomerate count.
    pub fn target(&self) -> usize {
        self.target
    }

    /// False when region purity prevented reaching the requested count.
    pub fn target_met(&self) -> bool {
        self.target_met
    }

    /// True when every agglomerate of `self` lies inside one agglomerate of `coarse`.
    pub fn is_refinement_of(&self, coarse: &AgglomeratedPartition) -> bool {
        self.owner.len() == coarse.owner.len()
            && self.members.iter().all(|m| {
                let c = coarse.owner[m[0]];
                m.iter().all(|&k| coarse.owner[k] == c)
            })
    }

    /// Checks cover, face-connectivity and region purity against `mesh`.
    pub fn validate(&self, mesh: &PolygonalMesh) -> Result<(), MeshError> {
        if self.owner.len() != mesh.n_cells() {
            return Err(MeshError::InvalidInput("partition does not match mesh"));
        }
        let adj = mesh.cell_adjacency();
        for (a, m) in self.members.iter().enumerate() {
            if m.iter().any(|&k| self.owner[k] != a) {
                return Err(MeshError::InvalidInput("member list disagrees with owner map"));
            }
            let region = mesh.region(m[0]);
            if m.iter().any(|&k| mesh.region(k) != region) {
                return Err(MeshError::InvalidInput("agglomerate mixes regions"));
            }
            let mut seen = BTreeSet::new();
            let mut stack = vec![m[0]];
            seen.insert(m[0]);
            while let Some(k) = stack.pop() {
                for &n in &adj[k] {
                    if self.owner[n] == a && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
            if seen.len() != m.len() {
                return Err(MeshError::InvalidInput("agglomerate is not face-connected"));
            }
        }
        Ok(())
    }
}

#[derive(PartialEq)]
struct Candidate {
    diameter: f64,
    a: usize,
    b: usize,
    stamp_a: u32,
    stamp_b: u32,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.diameter
            .total_cmp(&other.diameter)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

struct Unit {
    hull: Vec<Point>,
    members: Vec<usize>,
    region: Region,
    neighbors: BTreeSet<usize>,
    stamp: u32,
    alive: bool,
}

/// Agglomerates `mesh` (or the partition `base` of it) down to at most
/// `target` agglomerates.
///
/// The result has exactly `target` agglomerates unless region purity makes
/// that impossible; then the smallest achievable count is returned and
/// [`AgglomeratedPartition::target_met`] is false. Agglomerates are numbered
/// by their lowest fine-cell index.
pub fn agglomerate(mesh: &PolygonalMesh, base: Option<&AgglomeratedPartition>, target: usize) -> Result<AgglomeratedPartition, MeshError> {
    let identity;
    let base = match base {
        Some(b) => b,
        None => {
            identity = AgglomeratedPartition::identity(mesh);
            &identity
        }
    };
    if base.owner.len() != mesh.n_cells() {
        return Err(MeshError::InvalidInput("partition does not match mesh"));
    }
    if target == 0 {
        return Err(MeshError::InvalidInput("target agglomerate count must be positive"));
    }
    if target > base.n_parts() {
        return Err(MeshError::InvalidInput("target exceeds the current agglomerate count"));
    }

    let mut units: Vec<Unit> = base
        .members
        .iter()
        .enumerate()
        .map(|(a, m)| {
            let pts: Vec<Point> = m.iter().flat_map(|&k| mesh.cell(k).iter().map(|&v| mesh.vertices()[v])).collect();
            Unit {
                hull: geometry::convex_hull(&pts),
                members: m.clone(),
                region: base.regions[a],
                neighbors: BTreeSet::new(),
                stamp: 0,
                alive: true,
            }
        })
        .collect();
    for f in mesh.interior_faces() {
        let a = base.owner[f.owner];
        let b = base.owner[f.neighbor.expect("interior face")];
        if a != b {
            units[a].neighbors.insert(b);
            units[b].neighbors.insert(a);
        }
    }

    let union_diameter = |x: &Unit, y: &Unit| -> f64 {
        let mut pts = x.hull.clone();
        pts.extend_from_slice(&y.hull);
        geometry::diameter(&geometry::convex_hull(&pts))
    };

    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    for a in 0..units.len() {
        for &b in units[a].neighbors.iter().filter(|&&b| b > a) {
            if units[a].region == units[b].region {
                heap.push(Reverse(Candidate { diameter: union_diameter(&units[a], &units[b]), a, b, stamp_a: 0, stamp_b: 0 }));
            }
        }
    }

    let mut count = units.len();
    while count > target {
        let Some(Reverse(c)) = heap.pop() else { break };
        let (a, b) = (c.a, c.b);
        if !units[a].alive || !units[b].alive || units[a].stamp != c.stamp_a || units[b].stamp != c.stamp_b {
            continue;
        }
        // merge b into a
        let ub = core::mem::replace(
            &mut units[b],
            Unit { hull: Vec::new(), members: Vec::new(), region: Region::Grey, neighbors: BTreeSet::new(), stamp: 0, alive: false },
        );
        let mut pts = core::mem::take(&mut units[a].hull);
        pts.extend_from_slice(&ub.hull);
        units[a].hull = geometry::convex_hull(&pts);
        units[a].members.extend_from_slice(&ub.members);
        units[a].stamp += 1;
        for n in ub.neighbors {
            if n != a {
                units[n].neighbors.remove(&b);
                units[n].neighbors.insert(a);
                units[a].neighbors.insert(n);
            }
        }
        units[a].neighbors.remove(&b);
        count -= 1;
        let neighbors: Vec<usize> = units[a].neighbors.iter().copied().collect();
        for n in neighbors {
            if units[n].region != units[a].region {
                continue;
            }
            let d = union_diameter(&units[a], &units[n]);
            let (x, y) = if a < n { (a, n) } else { (n, a) };
            heap.push(Reverse(Candidate { diameter: d, a: x, b: y, stamp_a: units[x].stamp, stamp_b: units[y].stamp }));
        }
    }

    let mut members: Vec<Vec<usize>> = units
        .into_iter()
        .filter(|u| u.alive)
        .map(|mut u| {
            u.members.sort_unstable();
            u.members
        })
        .collect();
    members.sort_by_key(|m| m[0]);
    Ok(AgglomeratedPartition::from_members(mesh, members, target, count <= target))
}

/// Nested hierarchy `[T_h, level 1, ..., level n]`, each level targeting a
/// quarter of the previous agglomerate count (one halving of the linear
/// resolution per level).
pub fn coarsening_hierarchy(mesh: &PolygonalMesh, levels: usize) -> Result<Vec<AgglomeratedPartition>, MeshError> {
    let mut out = vec![AgglomeratedPartition::identity(mesh)];
    for _ in 0..levels {
        let prev = out.last().expect("non-empty");
        let target = prev.n_parts().div_ceil(4).max(1);
        let next = agglomerate(mesh, Some(prev), target)?;
        out.push(next);
    }
    Ok(out)
}

/// Number of coarsening levels for a coarse-to-fine ratio `H/h` (a power of two).
pub fn levels_for_ratio(ratio: usize) -> Option<usize> {
    if ratio >= 1 && ratio.is_power_of_two() {
        Some(ratio.trailing_zeros() as usize)
    } else {
        None
    }
}
