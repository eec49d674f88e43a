//! Discontinuous piecewise-polynomial spaces on polygonal meshes.
//!
//! Each element carries the tensor-product Legendre basis of total degree
//! `<= p`, scaled to the element's bounding box and orthonormal there.
//! Modes are ordered degree-lexicographically: for total degree `d = 0..=p`
//! the modes `x^(d-j) y^j` for `j = 0..=d`, i.e. `1, x, y, x^2, xy, y^2, ...`
//! (with `x^a` standing for the degree-`a` Legendre polynomial in `x`).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::SetupError;
use crate::geometry::{Point, Rect};
use crate::math::sqrt;
use crate::mesh::PolygonalMesh;
use crate::quadrature::{self, QuadratureRule};

/// Number of modes of total degree `<= p` in two variables.
pub const fn local_dim(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Orthonormal Legendre values and derivatives on `[-1, 1]` up to degree `n_max`.
fn legendre_orthonormal(n_max: usize, xi: f64, vals: &mut [f64], ders: &mut [f64]) {
    let mut p = [1.0, xi];
    let mut dp = [0.0, 1.0];
    for n in 0..=n_max {
        let (pn, dpn) = match n {
            0 => (1.0, 0.0),
            1 => (xi, 1.0),
            _ => {
                let nf = n as f64;
                let pn = ((2.0 * nf - 1.0) * xi * p[1] - (nf - 1.0) * p[0]) / nf;
                let dpn = dp[0] + (2.0 * nf - 1.0) * p[1];
                p = [p[1], pn];
                dp = [dp[1], dpn];
                (pn, dpn)
            }
        };
        let s = sqrt((2.0 * n as f64 + 1.0) / 2.0);
        vals[n] = s * pn;
        ders[n] = s * dpn;
    }
}

/// Bounding-box-orthonormal Legendre basis of total degree `<= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    degree: usize,
    modes: Vec<(usize, usize)>,
}

impl LocalBasis {
    pub fn new(degree: usize) -> Self {
        let mut modes = Vec::with_capacity(local_dim(degree));
        for d in 0..=degree {
            for j in 0..=d {
                modes.push((d - j, j));
            }
        }
        LocalBasis { degree, modes }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `(i, j)` Legendre degrees of each mode.
    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    /// Evaluates all modes on `bbox` at `x`; gradients are optional.
    pub fn eval(&self, bbox: &Rect, x: Point, vals: &mut [f64], grads: Option<&mut [Point]>) {
        const MAXD: usize = 16;
        let p = self.degree;
        assert!(p < MAXD, "degree too high");
        let (w, h) = (bbox.width(), bbox.height());
        let c = bbox.center();
        let xi = 2.0 * (x[0] - c[0]) / w;
        let eta = 2.0 * (x[1] - c[1]) / h;
        let mut lx = [0.0; MAXD];
        let mut dlx = [0.0; MAXD];
        let mut ly = [0.0; MAXD];
        let mut dly = [0.0; MAXD];
        legendre_orthonormal(p, xi, &mut lx, &mut dlx);
        legendre_orthonormal(p, eta, &mut ly, &mut dly);
        let sx = sqrt(2.0 / w);
        let sy = sqrt(2.0 / h);
        for (m, &(i, j)) in self.modes.iter().enumerate() {
            vals[m] = sx * lx[i] * sy * ly[j];
        }
        if let Some(g) = grads {
            for (m, &(i, j)) in self.modes.iter().enumerate() {
                g[m] = [sx * dlx[i] * (2.0 / w) * sy * ly[j], sx * lx[i] * sy * dly[j] * (2.0 / h)];
            }
        }
    }
}

/// Volume quadrature of one element with cached basis values.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementQuadrature {
    pub rule: QuadratureRule,
    /// Row-major `n_points x n_loc` basis values.
    pub values: Vec<f64>,
}

/// The space `P^p(T_h)` with element-major contiguous DoF blocks.
#[derive(Debug, Clone)]
pub struct DgSpace {
    mesh: Arc<PolygonalMesh>,
    basis: LocalBasis,
    volume_order: usize,
    volume: Vec<ElementQuadrature>,
}

impl DgSpace {
    /// Builds the space with volume quadrature of order `2p + 2`.
    pub fn new(mesh: Arc<PolygonalMesh>, degree: usize) -> Result<Self, SetupError> {
        Self::with_volume_order(mesh, degree, 2 * degree + 2)
    }

    pub fn with_volume_order(mesh: Arc<PolygonalMesh>, degree: usize, volume_order: usize) -> Result<Self, SetupError> {
        if degree == 0 {
            return Err(SetupError::Config("polynomial degree must be at least 1".into()));
        }
        let basis = LocalBasis::new(degree);
        let n_loc = basis.len();
        let volume = (0..mesh.n_cells())
            .map(|k| {
                let rule = quadrature::polygon_quadrature(&mesh.cell_polygon(k), volume_order);
                let bbox = mesh.bbox(k);
                let mut values = vec![0.0; rule.len() * n_loc];
                for (q, &x) in rule.points.iter().enumerate() {
                    basis.eval(&bbox, x, &mut values[q * n_loc..(q + 1) * n_loc], None);
                }
                ElementQuadrature { rule, values }
            })
            .collect();
        Ok(DgSpace { mesh, basis, volume_order, volume })
    }

    pub fn mesh(&self) -> &PolygonalMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<PolygonalMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &LocalBasis {
        &self.basis
    }

    /// Local dimension `(p+1)(p+2)/2`.
    pub fn n_loc(&self) -> usize {
        self.basis.len()
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn dim(&self) -> usize {
        self.n_elements() * self.n_loc()
    }

    pub fn dof_range(&self, k: usize) -> Range<usize> {
        let n = self.n_loc();
        k * n..(k + 1) * n
    }

    pub fn volume_order(&self) -> usize {
        self.volume_order
    }

    /// Face quadrature order (`2p + 2`).
    pub fn face_order(&self) -> usize {
        2 * self.degree() + 2
    }

    pub fn bbox(&self, k: usize) -> Rect {
        self.mesh.bbox(k)
    }

    pub fn element_quadrature(&self, k: usize) -> &ElementQuadrature {
        &self.volume[k]
    }

    /// Basis values (`n_pts x n_loc`) and gradients (`n_pts x n_loc`) of element `k`.
    pub fn eval_basis(&self, k: usize, points: &[Point]) -> Result<(Vec<f64>, Vec<Point>), SetupError> {
        if k >= self.n_elements() {
            return Err(SetupError::IndexOutOfRange { index: k, len: self.n_elements() });
        }
        let n = self.n_loc();
        let mut vals = vec![0.0; points.len() * n];
        let mut grads = vec![[0.0; 2]; points.len() * n];
        let bbox = self.bbox(k);
        for (q, &x) in points.iter().enumerate() {
            self.basis.eval(&bbox, x, &mut vals[q * n..(q + 1) * n], Some(&mut grads[q * n..(q + 1) * n]));
        }
        Ok((vals, grads))
    }

    /// Value of the field with coefficients `coeffs` at `x`, using element `k`'s polynomial.
    pub fn evaluate(&self, coeffs: &[f64], k: usize, x: Point) -> f64 {
        let n = self.n_loc();
        let mut vals = [0.0; local_dim(15)];
        self.basis.eval(&self.bbox(k), x, &mut vals[..n], None);
        coeffs[self.dof_range(k)].iter().zip(&vals[..n]).map(|(c, v)| c * v).sum()
    }

    /// Field values at the cached volume quadrature points of element `k`.
    pub fn values_at_quadrature(&self, coeffs: &[f64], k: usize, out: &mut Vec<f64>) {
        let n = self.n_loc();
        let eq = &self.volume[k];
        let c = &coeffs[self.dof_range(k)];
        out.clear();
        out.extend(eq.values.chunks_exact(n).map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum::<f64>()));
    }

    /// Mean value of the field over cell `k`.
    pub fn cell_mean(&self, coeffs: &[f64], k: usize) -> f64 {
        let mut vals = Vec::new();
        self.values_at_quadrature(coeffs, k, &mut vals);
        let eq = &self.volume[k];
        let integral: f64 = vals.iter().zip(&eq.rule.weights).map(|(v, w)| v * w).sum();
        integral / self.mesh.areas()[k]
    }

    /// Coefficients of the constant function `c` (exact, since the space contains constants).
    pub fn constant(&self, c: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for k in 0..self.n_elements() {
            // the constant mode equals 1/sqrt(|bbox|)
            out[self.dof_range(k).start] = c * sqrt(self.bbox(k).area());
        }
        out
    }
}
