//! Two-level non-overlapping additive Schwarz preconditioner on agglomerated
//! subdomains with a coarse correction on an agglomerated DG space.

use alloc::vec;
use alloc::vec::Vec;

use crate::agglomerate::AgglomeratedPartition;
use crate::dgspace::{DgSpace, LocalBasis};
use crate::error::SetupError;
use crate::krylov::Preconditioner;
use crate::linalg::{BlockSparseMatrix, DenseCholesky, EnvelopeCholesky};
use crate::quadrature;

/// Fine-basis coefficients of the coarse degree-`q` basis functions.
///
/// Fine element `k` owned by agglomerate `a` stores a dense
/// `n_fine x n_coarse` block mapping the coarse coefficients of `a` to the
/// coefficients of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseEmbedding {
    n_fine: usize,
    n_coarse: usize,
    owner: Vec<usize>,
    n_parts: usize,
    blocks: Vec<f64>,
    basis: LocalBasis,
}

impl CoarseEmbedding {
    pub fn new(space: &DgSpace, partition: &AgglomeratedPartition, q: usize) -> Result<Self, SetupError> {
        let p = space.degree();
        if q == 0 || q > p {
            return Err(SetupError::Config(alloc::format!("coarse degree q = {q} must satisfy 1 <= q <= p = {p}")));
        }
        if partition.owner().len() != space.n_elements() {
            return Err(SetupError::DimensionMismatch { expected: space.n_elements(), found: partition.owner().len() });
        }
        let coarse = LocalBasis::new(q);
        let (nf, nc) = (space.n_loc(), coarse.len());
        let mut blocks = vec![0.0; space.n_elements() * nf * nc];
        let mut phi = vec![0.0; nf];
        let mut psi = vec![0.0; nc];
        for k in 0..space.n_elements() {
            let bbox_k = space.bbox(k);
            let bbox_a = partition.bbox(partition.owner()[k]);
            // both factors are polynomials on the fine box, whose basis is orthonormal there
            let rule = quadrature::rect_rule(&bbox_k, p + q);
            let blk = &mut blocks[k * nf * nc..(k + 1) * nf * nc];
            for (&x, &w) in rule.points.iter().zip(&rule.weights) {
                space.basis().eval(&bbox_k, x, &mut phi, None);
                coarse.eval(&bbox_a, x, &mut psi, None);
                for i in 0..nf {
                    for j in 0..nc {
                        blk[i * nc + j] += w * phi[i] * psi[j];
                    }
                }
            }
        }
        Ok(CoarseEmbedding { n_fine: nf, n_coarse: nc, owner: partition.owner().to_vec(), n_parts: partition.n_parts(), blocks, basis: coarse })
    }

    pub fn coarse_basis(&self) -> &LocalBasis {
        &self.basis
    }

    pub fn fine_dim(&self) -> usize {
        self.owner.len() * self.n_fine
    }

    pub fn coarse_dim(&self) -> usize {
        self.n_parts * self.n_coarse
    }

    pub fn coarse_block(&self) -> usize {
        self.n_coarse
    }

    /// Dense `n_fine x n_coarse` block of fine element `k`.
    pub fn block(&self, k: usize) -> &[f64] {
        let s = self.n_fine * self.n_coarse;
        &self.blocks[k * s..(k + 1) * s]
    }

    pub fn owner(&self) -> &[usize] {
        &self.owner
    }

    /// `x = E c`.
    pub fn prolongate(&self, c: &[f64], x: &mut [f64]) {
        let (nf, nc) = (self.n_fine, self.n_coarse);
        for (k, &a) in self.owner.iter().enumerate() {
            let blk = self.block(k);
            let ca = &c[a * nc..(a + 1) * nc];
            for i in 0..nf {
                x[k * nf + i] = blk[i * nc..(i + 1) * nc].iter().zip(ca).map(|(e, v)| e * v).sum();
            }
        }
    }

    /// `c = E^T x`.
    pub fn restrict(&self, x: &[f64], c: &mut [f64]) {
        let (nf, nc) = (self.n_fine, self.n_coarse);
        c.iter_mut().for_each(|v| *v = 0.0);
        for (k, &a) in self.owner.iter().enumerate() {
            let blk = self.block(k);
            let xk = &x[k * nf..(k + 1) * nf];
            let ca = &mut c[a * nc..(a + 1) * nc];
            for i in 0..nf {
                for j in 0..nc {
                    ca[j] += blk[i * nc + j] * xk[i];
                }
            }
        }
    }

    /// Galerkin product `E^T K E` in block-sparse form on the agglomerate graph.
    pub fn galerkin(&self, k: &BlockSparseMatrix) -> Result<BlockSparseMatrix, SetupError> {
        let (nf, nc) = (self.n_fine, self.n_coarse);
        if k.block_size() != nf || k.n_blocks() != self.owner.len() {
            return Err(SetupError::DimensionMismatch { expected: self.fine_dim(), found: k.dim() });
        }
        let mut pattern = vec![Vec::new(); self.n_parts];
        for i in 0..k.n_blocks() {
            for &j in k.row_cols(i) {
                let (a, b) = (self.owner[i], self.owner[j]);
                if a != b {
                    pattern[a].push(b);
                }
            }
        }
        for row in pattern.iter_mut() {
            row.sort_unstable();
            row.dedup();
        }
        let mut k0 = BlockSparseMatrix::with_pattern(nc, &pattern);
        let mut tmp = vec![0.0; nf * nc];
        for i in 0..k.n_blocks() {
            let a = self.owner[i];
            let ei = self.block(i);
            for &j in k.row_cols(i) {
                let b = self.owner[j];
                if a > b {
                    continue;
                }
                let kij = k.block(i, j).unwrap();
                let ej = self.block(j);
                // tmp = K_ij E_j
                for r in 0..nf {
                    for c in 0..nc {
                        let mut s = 0.0;
                        for l in 0..nf {
                            s += kij[r * nf + l] * ej[l * nc + c];
                        }
                        tmp[r * nc + c] = s;
                    }
                }
                let dst = k0.block_mut(a, b).unwrap();
                for r in 0..nc {
                    for c in 0..nc {
                        let mut s = 0.0;
                        for l in 0..nf {
                            s += ei[l * nc + r] * tmp[l * nc + c];
                        }
                        dst[r * nc + c] += s;
                    }
                }
            }
        }
        k0.symmetrize_from_upper();
        Ok(k0)
    }
}

#[derive(Debug, Clone)]
enum LocalSolver {
    Element { element: usize, factor: DenseCholesky },
    Subdomain { members: Vec<usize>, factor: EnvelopeCholesky },
}

/// `B^{-1} = sum_i R_i^T K_i^{-1} R_i + E K_0^{-1} E^T`.
#[derive(Debug, Clone)]
pub struct SchwarzPreconditioner {
    block: usize,
    dim: usize,
    locals: Vec<LocalSolver>,
    coarse: Option<(CoarseEmbedding, BlockSparseMatrix, EnvelopeCholesky)>,
}

impl SchwarzPreconditioner {
    /// Factorizes the subdomain blocks of `k` for the partition `subdomains`
    /// and, if given, the coarse operator `E^T K E`.
    pub fn new(k: &BlockSparseMatrix, subdomains: &AgglomeratedPartition, coarse: Option<CoarseEmbedding>) -> Result<Self, SetupError> {
        if subdomains.owner().len() != k.n_blocks() {
            return Err(SetupError::DimensionMismatch { expected: k.n_blocks(), found: subdomains.owner().len() });
        }
        let groups: Vec<&[usize]> = (0..subdomains.n_parts()).map(|s| subdomains.members(s)).collect();
        Self::build(k, &groups, coarse)
    }

    /// Block-Jacobi with element blocks plus an optional coarse correction.
    pub fn element_blocks(k: &BlockSparseMatrix, coarse: Option<CoarseEmbedding>) -> Result<Self, SetupError> {
        let singles: Vec<[usize; 1]> = (0..k.n_blocks()).map(|i| [i]).collect();
        let groups: Vec<&[usize]> = singles.iter().map(|s| &s[..]).collect();
        Self::build(k, &groups, coarse)
    }

    fn build(k: &BlockSparseMatrix, groups: &[&[usize]], coarse: Option<CoarseEmbedding>) -> Result<Self, SetupError> {
        let b = k.block_size();
        let mut locals = Vec::with_capacity(groups.len());
        for (s, &members) in groups.iter().enumerate() {
            let err = |source| SetupError::Subdomain { subdomain: Some(s), source };
            if members.len() == 1 {
                let element = members[0];
                let factor = DenseCholesky::factor(k.block(element, element).unwrap(), b).map_err(err)?;
                locals.push(LocalSolver::Element { element, factor });
            } else {
                let mut members = members.to_vec();
                members.sort_unstable();
                let factor = EnvelopeCholesky::factor(&k.principal_submatrix(&members)).map_err(err)?;
                locals.push(LocalSolver::Subdomain { members, factor });
            }
        }
        let coarse = match coarse {
            None => None,
            Some(e) => {
                let k0 = e.galerkin(k)?;
                let f = EnvelopeCholesky::factor(&k0).map_err(|source| SetupError::Subdomain { subdomain: None, source })?;
                Some((e, k0, f))
            }
        };
        Ok(SchwarzPreconditioner { block: b, dim: k.dim(), locals, coarse })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_subdomains(&self) -> usize {
        self.locals.len()
    }

    pub fn coarse_matrix(&self) -> Option<&BlockSparseMatrix> {
        self.coarse.as_ref().map(|c| &c.1)
    }

    pub fn embedding(&self) -> Option<&CoarseEmbedding> {
        self.coarse.as_ref().map(|c| &c.0)
    }
}

impl Preconditioner for SchwarzPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let b = self.block;
        let mut buf = Vec::new();
        let mut work = Vec::new();
        for local in &self.locals {
            match local {
                LocalSolver::Element { element, factor } => {
                    let range = element * b..(element + 1) * b;
                    z[range.clone()].copy_from_slice(&r[range]);
                    factor.solve_in_place(&mut z[element * b..(element + 1) * b]);
                }
                LocalSolver::Subdomain { members, factor } => {
                    buf.clear();
                    for &m in members {
                        buf.extend_from_slice(&r[m * b..(m + 1) * b]);
                    }
                    factor.solve_in_place(&mut buf, &mut work);
                    for (l, &m) in members.iter().enumerate() {
                        z[m * b..(m + 1) * b].copy_from_slice(&buf[l * b..(l + 1) * b]);
                    }
                }
            }
        }
        if let Some((e, _, f)) = &self.coarse {
            let mut c = vec![0.0; e.coarse_dim()];
            e.restrict(r, &mut c);
            f.solve_in_place(&mut c, &mut work);
            let mut x = vec![0.0; self.dim];
            e.prolongate(&c, &mut x);
            for (zi, xi) in z.iter_mut().zip(&x) {
                *zi += xi;
            }
        }
    }
}

