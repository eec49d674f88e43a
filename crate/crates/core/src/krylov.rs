//! Preconditioned conjugate gradients with Lanczos condition estimates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{SetupError, SolveError};
use crate::linalg::{self, BlockSparseMatrix, DenseCholesky, DenseMatrix};
use crate::math::sqrt;

/// Largest dimension accepted by the dense spectrum oracle.
pub const DENSE_ORACLE_LIMIT: usize = 5000;

pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner {
    /// `z = B^{-1} r`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

impl LinearOperator for BlockSparseMatrix {
    fn dim(&self) -> usize {
        BlockSparseMatrix::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.data[i * self.cols..(i + 1) * self.cols].iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Dense matrix used as an explicit preconditioner `z = B^{-1} r`.
impl Preconditioner for DenseMatrix {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        LinearOperator::apply(self, r, z)
    }
}

/// `z = r`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    pub tol: f64,
    pub maxit: usize,
}

impl PcgOptions {
    /// `20 sqrt(n)` capped at `n`.
    pub fn default_maxit(n: usize) -> usize {
        ((20.0 * sqrt(n as f64)) as usize).clamp(1, n.max(1))
    }

    pub fn new(tol: f64, n: usize) -> Self {
        PcgOptions { tol, maxit: Self::default_maxit(n) }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PcgReport {
    pub iterations: usize,
    /// Relative residual after each iteration.
    pub residual_history: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub converged: bool,
}

impl PcgReport {
    /// Lanczos estimate of the preconditioned condition number, if at least two
    /// iterations were recorded.
    pub fn condition_estimate(&self) -> Option<f64> {
        condition_estimate(&self.alphas, &self.betas)
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `K x = b` starting from the contents of `x`.
///
/// Convergence: `|b - K x_k| / |b - K x_0| < tol`. A vanishing residual stops
/// the iteration as converged for any `tol`.
pub fn pcg_solve(k: &dyn LinearOperator, b: &[f64], precond: &dyn Preconditioner, opts: PcgOptions, x: &mut [f64]) -> Result<PcgReport, SolveError> {
    let n = k.dim();
    if b.len() != n || x.len() != n {
        return Err(SolveError::DimensionMismatch { expected: n, found: if b.len() != n { b.len() } else { x.len() } });
    }
    let mut report = PcgReport::default();
    let mut r = vec![0.0; n];
    k.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r0 = sqrt(dot(&r, &r));
    if r0 == 0.0 {
        report.converged = true;
        return Ok(report);
    }
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..opts.maxit {
        k.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap.is_finite() && pap > 0.0 && rz.is_finite()) {
            return Err(SolveError::Breakdown { iteration: it });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        report.alphas.push(alpha);
        report.iterations = it + 1;
        let rn = sqrt(dot(&r, &r));
        let rel = rn / r0;
        report.residual_history.push(rel);
        if rel < opts.tol || rn == 0.0 {
            report.converged = true;
            break;
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        if !beta.is_finite() {
            return Err(SolveError::Breakdown { iteration: it });
        }
        report.betas.push(beta);
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_new;
    }
    Ok(report)
}

/// Lanczos tridiagonal matrix (diagonal, off-diagonal) from PCG coefficients.
pub fn lanczos_tridiagonal(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = alphas.len();
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m.saturating_sub(1));
    for j in 0..m {
        let mut d = 1.0 / alphas[j];
        if j > 0 {
            d += betas[j - 1] / alphas[j - 1];
        }
        diag.push(d);
        if j + 1 < m {
            off.push(sqrt(betas[j]) / alphas[j]);
        }
    }
    (diag, off)
}

/// Extreme Ritz values from PCG coefficients.
pub fn lanczos_extremes(alphas: &[f64], betas: &[f64]) -> Option<(f64, f64)> {
    if alphas.len() < 2 || betas.len() + 1 < alphas.len() {
        return None;
    }
    let (d, e) = lanczos_tridiagonal(alphas, betas);
    Some(linalg::tridiagonal_extremes(&d, &e))
}

/// `lambda_max / lambda_min` of the Lanczos matrix; `None` with fewer than two iterations.
pub fn condition_estimate(alphas: &[f64], betas: &[f64]) -> Option<f64> {
    lanczos_extremes(alphas, betas).map(|(lo, hi)| hi / lo)
}

/// Dense matrix of a linear map given by its action.
pub fn materialize(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    m
}

/// Extreme eigenvalues of `B_inv K` (or of `K`), from the symmetric pencil
/// `L^T K L` with `B_inv = L L^T`.
pub fn dense_spectrum_oracle(k: &DenseMatrix, b_inv: Option<&DenseMatrix>) -> Result<(f64, f64), SetupError> {
    let n = k.rows;
    if n > DENSE_ORACLE_LIMIT {
        return Err(SetupError::TooLarge { dim: n, limit: DENSE_ORACLE_LIMIT });
    }
    if k.cols != n {
        return Err(SetupError::DimensionMismatch { expected: n, found: k.cols });
    }
    let mut s = match b_inv {
        None => k.clone(),
        Some(bi) => {
            if bi.rows != n || bi.cols != n {
                return Err(SetupError::DimensionMismatch { expected: n, found: bi.rows });
            }
            let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (bi[(i, j)] + bi[(j, i)]));
            let l = DenseCholesky::factor(&sym.data, n).map_err(SetupError::Factorization)?.lower();
            l.transpose().matmul(k).matmul(&l)
        }
    };
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let (d, e) = linalg::householder_tridiagonalize(&s);
    Ok(linalg::tridiagonal_extremes(&d, &e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let k = DenseMatrix::from_fn(2, 2, |i, j| if i == j { [1.0, 4.0][i] } else { 0.0 });
        let mut x = vec![0.0; 2];
        let r = pcg_solve(&k, &[1.0, 1.0], &IdentityPreconditioner, PcgOptions { tol: 1e-12, maxit: 10 }, &mut x).unwrap();
        assert!(r.converged && r.iterations <= 2);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn identity_system_one_iteration() {
        let k = DenseMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 0.0];
        let mut x = vec![0.0; 5];
        let r = pcg_solve(&k, &b, &IdentityPreconditioner, PcgOptions { tol: 1e-9, maxit: 5 }, &mut x).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(x, b);
        assert_eq!(r.condition_estimate(), None);
    }

    #[test]
    fn oracle_guard() {
        let big = DenseMatrix { rows: 5001, cols: 5001, data: Vec::new() };
        assert!(matches!(dense_spectrum_oracle(&big, None), Err(SetupError::TooLarge { .. })));
    }
}
