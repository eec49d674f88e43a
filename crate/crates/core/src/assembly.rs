//! Mass, SIPG stiffness and time-stepping matrices, conductivity tensors and
//! L2 projections.

use alloc::vec;
use alloc::vec::Vec;

use crate::dgspace::DgSpace;
use crate::error::{FactorizationError, SetupError};
use crate::geometry::{self, Point};
use crate::linalg::{BlockSparseMatrix, DenseCholesky};
use crate::math::sqrt;
use crate::mesh::Region;
use crate::quadrature;

/// Symmetric 2x2 tensor stored as `[xx, xy, yx, yy]`.
pub type Tensor2 = [f64; 4];

/// Conductivities of one tissue type (mS/cm) and its fiber direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissueConductivity {
    /// Conductivity along the fiber.
    pub sigma_l: f64,
    /// Conductivity normal to the fiber.
    pub sigma_n: f64,
    pub fiber: Point,
}

impl TissueConductivity {
    pub fn isotropic(sigma: f64) -> Self {
        TissueConductivity { sigma_l: sigma, sigma_n: sigma, fiber: [1.0, 0.0] }
    }

    /// `sigma_l I + (sigma_n - sigma_l) n n^T` with `n` the unit normal of the fiber.
    pub fn tensor(&self) -> Tensor2 {
        let len = geometry::norm(self.fiber);
        let n = [-self.fiber[1] / len, self.fiber[0] / len];
        let d = self.sigma_n - self.sigma_l;
        let xy = d * n[0] * n[1];
        [self.sigma_l + d * n[0] * n[0], xy, xy, self.sigma_l + d * n[1] * n[1]]
    }

    fn validate(&self, name: &str) -> Result<(), SetupError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.sigma_l) || !ok(self.sigma_n) {
            return Err(SetupError::Config(alloc::format!("{name} conductivities must be positive")));
        }
        let len = geometry::norm(self.fiber);
        if !(len.is_finite() && len > 0.0) {
            return Err(SetupError::Config(alloc::format!("{name} fiber direction must be a nonzero vector")));
        }
        Ok(())
    }
}

/// Piecewise-constant conductivity: one tensor per region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConductivityField {
    pub grey: TissueConductivity,
    pub white: TissueConductivity,
}

impl ConductivityField {
    pub fn new(grey: TissueConductivity, white: TissueConductivity) -> Result<Self, SetupError> {
        grey.validate("grey")?;
        white.validate("white")?;
        Ok(ConductivityField { grey, white })
    }

    /// Same isotropic conductivity everywhere.
    pub fn uniform(sigma: f64) -> Result<Self, SetupError> {
        Self::new(TissueConductivity::isotropic(sigma), TissueConductivity::isotropic(sigma))
    }

    /// Grey matter 6.3 mS/cm isotropic; white matter 6.9 / 25.71 mS/cm with vertical fibers.
    pub fn brain_default() -> Self {
        ConductivityField {
            grey: TissueConductivity::isotropic(6.3),
            white: TissueConductivity { sigma_l: 6.9, sigma_n: 25.71, fiber: [0.0, 1.0] },
        }
    }

    pub fn tissue(&self, region: Region) -> &TissueConductivity {
        match region {
            Region::Grey => &self.grey,
            Region::White => &self.white,
        }
    }

    pub fn tensor(&self, region: Region) -> Tensor2 {
        self.tissue(region).tensor()
    }

    /// Largest eigenvalue of the region's tensor.
    pub fn spectral_norm(&self, region: Region) -> f64 {
        let t = self.tissue(region);
        t.sigma_l.max(t.sigma_n)
    }
}

/// Interior-penalty coefficient `eta0 * avg(|Sigma|) * p^2 / harmonic(h_K, h_K')`.
pub fn penalty_coefficient(eta0: f64, p: usize, sigma: [f64; 2], h: [f64; 2]) -> f64 {
    let sigma_avg = 0.5 * (sigma[0] + sigma[1]);
    let h_harm = 2.0 * h[0] * h[1] / (h[0] + h[1]);
    eta0 * sigma_avg * (p * p) as f64 / h_harm
}

/// Block-diagonal mass matrix with blocks `int_K phi_i phi_j`.
pub fn assemble_mass(space: &DgSpace) -> BlockSparseMatrix {
    let n = space.n_loc();
    let mut m = BlockSparseMatrix::block_diagonal(space.n_elements(), n);
    for k in 0..space.n_elements() {
        let eq = space.element_quadrature(k);
        let blk = m.block_mut(k, k).unwrap();
        for (q, &w) in eq.rule.weights.iter().enumerate() {
            let phi = &eq.values[q * n..(q + 1) * n];
            for i in 0..n {
                let wi = w * phi[i];
                for j in i..n {
                    blk[i * n + j] += wi * phi[j];
                }
            }
        }
    }
    m.symmetrize_from_upper();
    m
}

/// SIPG stiffness matrix with homogeneous Neumann boundary (no boundary-face terms).
pub fn assemble_stiffness(space: &DgSpace, sigma: &ConductivityField, eta0: f64) -> Result<BlockSparseMatrix, SetupError> {
    if !(eta0.is_finite() && eta0 > 0.0) {
        return Err(SetupError::Config("penalty constant must be positive".into()));
    }
    let mesh = space.mesh();
    let n = space.n_loc();
    let p = space.degree();
    let mut a = BlockSparseMatrix::with_pattern(n, &mesh.cell_adjacency());

    let mut vals = Vec::new();
    let mut grads = Vec::new();
    for k in 0..space.n_elements() {
        let s = sigma.tensor(mesh.region(k));
        let rule = &space.element_quadrature(k).rule;
        eval_into(space, k, &rule.points, &mut vals, &mut grads);
        let blk = a.block_mut(k, k).unwrap();
        for (q, &w) in rule.weights.iter().enumerate() {
            let g = &grads[q * n..(q + 1) * n];
            for i in 0..n {
                let gi = g[i];
                for j in i..n {
                    let sg = apply(&s, g[j]);
                    blk[i * n + j] += w * (sg[0] * gi[0] + sg[1] * gi[1]);
                }
            }
        }
    }

    let mut local = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
    let (mut v_out, mut g_out) = (Vec::new(), Vec::new());
    for face in mesh.interior_faces() {
        let (ko, kn) = (face.owner, face.neighbor.expect("interior face"));
        let cells = [ko, kn];
        let regions = [mesh.region(ko), mesh.region(kn)];
        let eta = penalty_coefficient(
            eta0,
            p,
            [sigma.spectral_norm(regions[0]), sigma.spectral_norm(regions[1])],
            [mesh.diameters()[ko], mesh.diameters()[kn]],
        );
        let tensors = [sigma.tensor(regions[0]), sigma.tensor(regions[1])];
        let rule = quadrature::face_quadrature(face, space.face_order());
        eval_into(space, ko, &rule.points, &mut vals, &mut grads);
        eval_into(space, kn, &rule.points, &mut v_out, &mut g_out);
        let nrm = face.normal;
        for l in local.iter_mut() {
            l.iter_mut().for_each(|v| *v = 0.0);
        }
        let sign = [1.0, -1.0];
        // normal flux of each basis function on each side
        let mut flux = [vec![0.0; n], vec![0.0; n]];
        for (q, &w) in rule.weights.iter().enumerate() {
            let phi = [&vals[q * n..(q + 1) * n], &v_out[q * n..(q + 1) * n]];
            let grd = [&grads[q * n..(q + 1) * n], &g_out[q * n..(q + 1) * n]];
            for side in 0..2 {
                for i in 0..n {
                    let sg = apply(&tensors[side], grd[side][i]);
                    flux[side][i] = sg[0] * nrm[0] + sg[1] * nrm[1];
                }
            }
            for t in 0..2 {
                for s in 0..2 {
                    let blk = &mut local[2 * t + s];
                    let (st, ss) = (sign[t], sign[s]);
                    for i in 0..n {
                        for j in 0..n {
                            blk[i * n + j] += w
                                * (-0.5 * st * phi[t][i] * flux[s][j] - 0.5 * ss * phi[s][j] * flux[t][i]
                                    + eta * st * ss * phi[t][i] * phi[s][j]);
                        }
                    }
                }
            }
        }
        for t in 0..2 {
            for s in 0..2 {
                let (ct, cs) = (cells[t], cells[s]);
                if ct > cs {
                    continue;
                }
                let dst = a.block_mut(ct, cs).unwrap();
                for (d, v) in dst.iter_mut().zip(&local[2 * t + s]) {
                    *d += v;
                }
            }
        }
    }
    a.symmetrize_from_upper();
    Ok(a)
}

fn apply(t: &Tensor2, g: Point) -> Point {
    [t[0] * g[0] + t[1] * g[1], t[2] * g[0] + t[3] * g[1]]
}

fn eval_into(space: &DgSpace, k: usize, points: &[Point], vals: &mut Vec<f64>, grads: &mut Vec<Point>) {
    let n = space.n_loc();
    vals.clear();
    vals.resize(points.len() * n, 0.0);
    grads.clear();
    grads.resize(points.len() * n, [0.0; 2]);
    let bbox = space.bbox(k);
    for (q, &x) in points.iter().enumerate() {
        space.basis().eval(&bbox, x, &mut vals[q * n..(q + 1) * n], Some(&mut grads[q * n..(q + 1) * n]));
    }
}

/// `K_h = c_m chi_m M_h + dt/2 A_h`.
pub fn build_system_matrix(mass: &BlockSparseMatrix, stiffness: &BlockSparseMatrix, chi_m: f64, c_m: f64, dt: f64) -> Result<BlockSparseMatrix, SetupError> {
    for (name, v) in [("chi_m", chi_m), ("c_m", c_m), ("dt", dt)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(SetupError::Config(alloc::format!("{name} must be positive")));
        }
    }
    BlockSparseMatrix::linear_combination(c_m * chi_m, mass, 0.5 * dt, stiffness)
}

/// Load vector `b_i = int g phi_i`.
pub fn assemble_load(space: &DgSpace, g: impl Fn(Point) -> f64) -> Vec<f64> {
    let n = space.n_loc();
    let mut b = vec![0.0; space.dim()];
    for k in 0..space.n_elements() {
        let eq = space.element_quadrature(k);
        let dst = &mut b[space.dof_range(k)];
        for (q, (&x, &w)) in eq.rule.points.iter().zip(&eq.rule.weights).enumerate() {
            let gw = w * g(x);
            for (d, phi) in dst.iter_mut().zip(&eq.values[q * n..(q + 1) * n]) {
                *d += gw * phi;
            }
        }
    }
    b
}

/// Element-wise Cholesky factors of a block-diagonal matrix.
#[derive(Debug, Clone)]
pub struct BlockDiagonalSolver {
    block: usize,
    factors: Vec<DenseCholesky>,
}

impl BlockDiagonalSolver {
    /// Factorizes the diagonal blocks of `m` (off-diagonal blocks are ignored).
    pub fn new(m: &BlockSparseMatrix) -> Result<Self, (usize, FactorizationError)> {
        let b = m.block_size();
        let factors = (0..m.n_blocks())
            .map(|k| DenseCholesky::factor(m.block(k, k).unwrap(), b).map_err(|e| (k, e)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BlockDiagonalSolver { block: b, factors })
    }

    pub fn dim(&self) -> usize {
        self.block * self.factors.len()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        for (k, f) in self.factors.iter().enumerate() {
            f.solve_in_place(&mut x[k * self.block..(k + 1) * self.block]);
        }
    }
}

/// L2 projection of a pointwise field onto the space.
pub fn l2_project(space: &DgSpace, mass: &BlockDiagonalSolver, g: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut b = assemble_load(space, g);
    mass.solve_in_place(&mut b);
    b
}

/// Coefficients of `c` times the constant function (mode 0 only).
pub fn constant_vector(space: &DgSpace, c: f64) -> Vec<f64> {
    space.constant(c)
}

/// `(c^T M u) / |Omega|` with `c` the unit constant: the mean value of the field.
pub fn mean_value(space: &DgSpace, mass: &BlockSparseMatrix, u: &[f64]) -> f64 {
    let one = space.constant(1.0);
    let mut mu = vec![0.0; u.len()];
    mass.matvec(u, &mut mu);
    one.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>() / space.mesh().total_area()
}

/// L2 norm of the field `u` minus the pointwise function `g`, by volume quadrature.
pub fn l2_error(space: &DgSpace, u: &[f64], g: impl Fn(Point) -> f64) -> f64 {
    let mut vals = Vec::new();
    let mut acc = 0.0;
    for k in 0..space.n_elements() {
        space.values_at_quadrature(u, k, &mut vals);
        let eq = space.element_quadrature(k);
        for ((&x, &w), &v) in eq.rule.points.iter().zip(&eq.rule.weights).zip(&vals) {
            let e = v - g(x);
            acc += w * e * e;
        }
    }
    sqrt(acc)
}
