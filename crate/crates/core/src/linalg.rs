//! Dense and block-sparse symmetric linear algebra: block CSR storage,
//! Cholesky factorizations (dense and envelope) and symmetric eigenvalue
//! extremes via Householder tridiagonalization and Sturm bisection.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{FactorizationError, SetupError};
use crate::math::sqrt;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, o) in dst.iter_mut().zip(orow) {
                    *d += a * o;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense Cholesky factor `A = L L^T` of a small SPD matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCholesky {
    n: usize,
    /// Row-major lower triangle (full square storage).
    l: Vec<f64>,
}

impl DenseCholesky {
    /// Factorizes the row-major `n x n` matrix `a`, reading its lower triangle.
    pub fn factor(a: &[f64], n: usize) -> Result<Self, FactorizationError> {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(FactorizationError { row: i, pivot: s });
                    }
                    l[i * n + i] = sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let l = &self.l;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
    }

    /// Lower factor as a dense matrix.
    pub fn lower(&self) -> DenseMatrix {
        DenseMatrix { rows: self.n, cols: self.n, data: self.l.clone() }
    }
}

/// Symmetric block-sparse matrix with uniform square blocks in block CSR form.
///
/// Block rows follow the element-major DoF layout: block `(i, j)` couples the
/// DoFs of elements `i` and `j`. Symmetry is kept exact by storing block
/// `(j, i)` as the bitwise transpose of block `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix {
    n_blocks: usize,
    block: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    data: Vec<f64>,
}

impl BlockSparseMatrix {
    /// Zero matrix with the given symmetric block pattern (the diagonal is always included).
    pub fn with_pattern(block: usize, pattern: &[Vec<usize>]) -> Self {
        let n_blocks = pattern.len();
        let mut row_ptr = Vec::with_capacity(n_blocks + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, row) in pattern.iter().enumerate() {
            let mut r: Vec<usize> = row.clone();
            r.push(i);
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(&r);
            row_ptr.push(cols.len());
        }
        let data = vec![0.0; cols.len() * block * block];
        BlockSparseMatrix { n_blocks, block, row_ptr, cols, data }
    }

    /// Block-diagonal zero matrix.
    pub fn block_diagonal(n_blocks: usize, block: usize) -> Self {
        Self::with_pattern(block, &vec![Vec::new(); n_blocks])
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn dim(&self) -> usize {
        self.n_blocks * self.block
    }

    pub fn nnz_blocks(&self) -> usize {
        self.cols.len()
    }

    /// Column block indices of block row `i`.
    pub fn row_cols(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let row = self.row_cols(i);
        row.binary_search(&j).ok().map(|s| self.row_ptr[i] + s)
    }

    /// Row-major block `(i, j)`, if stored.
    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        let b2 = self.block * self.block;
        self.slot(i, j).map(|s| &self.data[s * b2..(s + 1) * b2])
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> Option<&mut [f64]> {
        let b2 = self.block * self.block;
        self.slot(i, j).map(move |s| &mut self.data[s * b2..(s + 1) * b2])
    }

    /// Entry `(r, c)` in scalar indexing (zero outside the pattern).
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let b = self.block;
        self.block(r / b, c / b).map_or(0.0, |blk| blk[(r % b) * b + c % b])
    }

    /// Overwrites block `(j, i)` with the transpose of block `(i, j)` for all `i < j`,
    /// and mirrors the upper triangle of diagonal blocks into the lower one.
    pub fn symmetrize_from_upper(&mut self) {
        let b = self.block;
        let b2 = b * b;
        for i in 0..self.n_blocks {
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[s];
                if j == i {
                    let blk = &mut self.data[s * b2..(s + 1) * b2];
                    for r in 0..b {
                        for c in 0..r {
                            blk[r * b + c] = blk[c * b + r];
                        }
                    }
                } else if j > i {
                    let t = self.slot(j, i).expect("pattern must be symmetric");
                    for r in 0..b {
                        for c in 0..b {
                            self.data[t * b2 + c * b + r] = self.data[s * b2 + r * b + c];
                        }
                    }
                }
            }
        }
    }

    /// True if the matrix equals its transpose bit for bit.
    pub fn is_symmetric_exact(&self) -> bool {
        let b = self.block;
        for i in 0..self.n_blocks {
            for &j in self.row_cols(i) {
                let Some(t) = self.block(j, i) else { return false };
                let s = self.block(i, j).expect("stored");
                for r in 0..b {
                    for c in 0..b {
                        if s[r * b + c].to_bits() != t[c * b + r].to_bits() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// True when no off-diagonal block is stored or all are exactly zero.
    pub fn is_block_diagonal(&self) -> bool {
        (0..self.n_blocks).all(|i| self.row_cols(i).iter().all(|&j| j == i || self.block(i, j).unwrap().iter().all(|&v| v == 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `y = self * x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let b = self.block;
        let b2 = b * b;
        for i in 0..self.n_blocks {
            let yi = &mut y[i * b..(i + 1) * b];
            yi.iter_mut().for_each(|v| *v = 0.0);
            for s in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[s];
                let xj = &x[j * b..(j + 1) * b];
                let blk = &self.data[s * b2..(s + 1) * b2];
                for r in 0..b {
                    let row = &blk[r * b..(r + 1) * b];
                    let mut acc = 0.0;
                    for c in 0..b {
                        acc += row[c] * xj[c];
                    }
                    yi[r] += acc;
                }
            }
        }
    }

    /// `alpha * self + beta * other` on the union of both patterns.
    pub fn linear_combination(alpha: f64, a: &BlockSparseMatrix, beta: f64, other: &BlockSparseMatrix) -> Result<BlockSparseMatrix, SetupError> {
        if a.block != other.block || a.n_blocks != other.n_blocks {
            return Err(SetupError::DimensionMismatch { expected: a.dim(), found: other.dim() });
        }
        let pattern: Vec<Vec<usize>> = (0..a.n_blocks)
            .map(|i| {
                let mut r: Vec<usize> = a.row_cols(i).to_vec();
                r.extend_from_slice(other.row_cols(i));
                r
            })
            .collect();
        let mut out = BlockSparseMatrix::with_pattern(a.block, &pattern);
        for i in 0..a.n_blocks {
            for &j in out.row_cols(i).to_vec().iter() {
                let x = a.block(i, j);
                let y = other.block(i, j);
                let dst = out.block_mut(i, j).unwrap();
                for (r, d) in dst.iter_mut().enumerate() {
                    let va = x.map_or(0.0, |b| b[r]);
                    let vb = y.map_or(0.0, |b| b[r]);
                    *d = alpha * va + beta * vb;
                }
            }
        }
        Ok(out)
    }

    /// Principal submatrix on the listed block rows/columns, in the given order.
    pub fn principal_submatrix(&self, blocks: &[usize]) -> BlockSparseMatrix {
        let mut local = alloc::collections::BTreeMap::new();
        for (l, &g) in blocks.iter().enumerate() {
            local.insert(g, l);
        }
        let pattern: Vec<Vec<usize>> = blocks
            .iter()
            .map(|&g| self.row_cols(g).iter().filter_map(|j| local.get(j).copied()).collect())
            .collect();
        let mut out = BlockSparseMatrix::with_pattern(self.block, &pattern);
        for (l, &g) in blocks.iter().enumerate() {
            for &j in self.row_cols(g) {
                if let Some(&lj) = local.get(&j) {
                    out.block_mut(l, lj).unwrap().copy_from_slice(self.block(g, j).unwrap());
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let b = self.block;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..self.n_blocks {
            for &j in self.row_cols(i) {
                let blk = self.block(i, j).unwrap();
                for r in 0..b {
                    for c in 0..b {
                        m[(i * b + r, j * b + c)] = blk[r * b + c];
                    }
                }
            }
        }
        m
    }
}

/// Reverse Cuthill–McKee ordering of an undirected graph given as adjacency lists.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize| -> (usize, usize) {
        // returns (farthest node, eccentricity)
        let mut dist = vec![usize::MAX; n];
        dist[start] = 0;
        let mut q = VecDeque::from([start]);
        let mut last = start;
        while let Some(u) = q.pop_front() {
            if dist[u] > dist[last] || (dist[u] == dist[last] && degree[u] < degree[last]) {
                last = u;
            }
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        (last, dist[last])
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pseudo-peripheral start node
        let mut start = seed;
        let (mut far, mut ecc) = bfs_levels(start);
        for _ in 0..4 {
            let (f2, e2) = bfs_levels(far);
            if e2 <= ecc {
                break;
            }
            start = far;
            far = f2;
            ecc = e2;
        }
        let _ = far;
        visited[start] = true;
        let mut q = VecDeque::from([start]);
        while let Some(u) = q.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
            nbrs.sort_by_key(|&v| (degree[v], v));
            for v in nbrs {
                visited[v] = true;
                q.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorization of a symmetric block-sparse
/// matrix, with the block graph reordered by reverse Cuthill–McKee.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCholesky {
    n: usize,
    /// perm[new] = old scalar index
    perm: Vec<usize>,
    /// first column of each row in the envelope
    first: Vec<usize>,
    /// offsets of each row's envelope segment in `values`
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &BlockSparseMatrix) -> Result<Self, FactorizationError> {
        let nb = a.n_blocks();
        let b = a.block_size();
        let adj: Vec<Vec<usize>> = (0..nb).map(|i| a.row_cols(i).iter().copied().filter(|&j| j != i).collect()).collect();
        let block_order = reverse_cuthill_mckee(&adj);
        let mut block_pos = vec![0; nb];
        for (new, &old) in block_order.iter().enumerate() {
            block_pos[old] = new;
        }
        let n = a.dim();
        let mut perm = Vec::with_capacity(n);
        for &old in &block_order {
            for r in 0..b {
                perm.push(old * b + r);
            }
        }
        // envelope: first nonzero column of each (new) row
        let mut first = vec![0; n];
        for (new_blk, &old_blk) in block_order.iter().enumerate() {
            let min_blk = a.row_cols(old_blk).iter().map(|&j| block_pos[j]).min().unwrap_or(new_blk).min(new_blk);
            for r in 0..b {
                first[new_blk * b + r] = min_blk * b;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i + 1 - first[i]));
        }
        let mut values = vec![0.0; offsets[n]];
        for (new_blk, &old_blk) in block_order.iter().enumerate() {
            for &old_j in a.row_cols(old_blk) {
                let new_j = block_pos[old_j];
                if new_j > new_blk {
                    continue;
                }
                let blk = a.block(old_blk, old_j).unwrap();
                for r in 0..b {
                    let i = new_blk * b + r;
                    for c in 0..b {
                        let j = new_j * b + c;
                        if j <= i {
                            values[offsets[i] + (j - first[i])] = blk[r * b + c];
                        }
                    }
                }
            }
        }
        // left-looking row Cholesky within the envelope
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = values[offsets[i] + (j - fi)];
                let ri = offsets[i] - fi;
                let rj = offsets[j] - fj;
                for k in k0..j {
                    s -= values[ri + k] * values[rj + k];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(FactorizationError { row: i, pivot: s });
                    }
                    values[offsets[i] + (i - fi)] = sqrt(s);
                } else {
                    values[offsets[i] + (j - fi)] = s / values[offsets[j] + (j - fj)];
                }
            }
        }
        Ok(EnvelopeCholesky { n, perm, first, offsets, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = b`, overwriting `b` with `x`; `work` is scratch of length `dim`.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut Vec<f64>) {
        let n = self.n;
        work.clear();
        work.extend(self.perm.iter().map(|&o| b[o]));
        let y = work;
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let mut s = y[i];
            for (k, l) in (fi..i).zip(row) {
                s -= l * y[k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix smaller than `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    assert!(k < n && off.len() + 1 >= n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
    lo -= 1e-14 * span;
    hi += 1e-14 * span;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest and largest eigenvalue of a symmetric tridiagonal matrix.
pub fn tridiagonal_extremes(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    (tridiagonal_eigenvalue(diag, off, 0), tridiagonal_eigenvalue(diag, off, n - 1))
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns the diagonal and the sub-diagonal.
pub fn householder_tridiagonalize(a: &DenseMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    assert_eq!(n, a.cols);
    let mut m = a.data.clone();
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let mut alpha = 0.0;
        for i in (k + 1)..n {
            alpha += m[i * n + k] * m[i * n + k];
        }
        let norm_x = sqrt(alpha);
        if norm_x == 0.0 {
            continue;
        }
        let x0 = m[(k + 1) * n + k];
        let alpha = if x0 > 0.0 { -norm_x } else { norm_x };
        for i in 0..n {
            v[i] = 0.0;
        }
        v[k + 1] = x0 - alpha;
        for i in (k + 2)..n {
            v[i] = m[i * n + k];
        }
        let vnorm2: f64 = v[(k + 1)..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // p = beta * A v ; w = p - (beta/2)(v.p) v ; A -= v w^T + w v^T
        for i in k..n {
            let mut s = 0.0;
            for j in (k + 1)..n {
                s += m[i * n + j] * v[j];
            }
            p[i] = beta * s;
        }
        let vp: f64 = ((k + 1)..n).map(|i| v[i] * p[i]).sum();
        let c = 0.5 * beta * vp;
        for i in k..n {
            p[i] -= c * v[i];
        }
        for i in k..n {
            for j in k..n {
                m[i * n + j] -= v[i] * p[j] + p[i] * v[j];
            }
        }
    }
    let diag = (0..n).map(|i| m[i * n + i]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| m[(i + 1) * n + i]).collect();
    (diag, off)
}

/// All eigenvalues of a dense symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let (d, e) = householder_tridiagonalize(a);
    (0..d.len()).map(|k| tridiagonal_eigenvalue(&d, &e, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let b = DenseMatrix::from_fn(n, n, |_, _| next());
        let mut a = b.transpose().matmul(&b);
        for i in 0..n {
            a[(i, i)] += 0.5;
        }
        a
    }

    #[test]
    fn dense_cholesky_solves() {
        let a = spd(7, 3);
        let ch = DenseCholesky::factor(&a.data, 7).unwrap();
        let x: Vec<f64> = (0..7).map(|i| i as f64 - 2.0).collect();
        let mut b = a.matvec(&x);
        ch.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = [1.0, 2.0, 2.0, 1.0];
        let e = DenseCholesky::factor(&a, 2).unwrap_err();
        assert_eq!(e.row, 1);
    }

    #[test]
    fn envelope_matches_dense() {
        // 1D chain of 2x2 blocks
        let nb = 9;
        let pattern: Vec<Vec<usize>> = (0..nb).map(|i| {
            let mut r = Vec::new();
            if i > 0 { r.push(i - 1); }
            if i + 1 < nb { r.push(i + 1); }
            r
        }).collect();
        let mut m = BlockSparseMatrix::with_pattern(2, &pattern);
        for i in 0..nb {
            m.block_mut(i, i).unwrap().copy_from_slice(&[4.0, 0.5, 0.5, 3.0]);
            if i + 1 < nb {
                m.block_mut(i, i + 1).unwrap().copy_from_slice(&[-1.0, 0.2, 0.1, -1.0]);
            }
        }
        m.symmetrize_from_upper();
        assert!(m.is_symmetric_exact());
        let f = EnvelopeCholesky::factor(&m).unwrap();
        let x: Vec<f64> = (0..18).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; 18];
        m.matvec(&x, &mut b);
        let mut w = Vec::new();
        f.solve_in_place(&mut b, &mut w);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // tridiag(-1, 2, -1): eigenvalues 2 - 2 cos(k pi / (n+1))
        let n = 10;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        for k in 0..n {
            let exact = 2.0 - 2.0 * (core::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((tridiagonal_eigenvalue(&d, &e, k) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn householder_preserves_spectrum() {
        let a = DenseMatrix::from_fn(4, 4, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let ev = symmetric_eigenvalues(&a);
        for (k, v) in ev.iter().enumerate() {
            assert!((v - (k + 1) as f64).abs() < 1e-13);
        }
    }
}
