//! Gauss rules on segments, triangles and polygons.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{self, Point};
use crate::math::cos;
use crate::mesh::Face;

/// Points and positive weights; the weights sum to the measure of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// `n`-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess then Newton on P_n
        let mut z = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Number of Gauss points exact for polynomials of degree `order` in 1D.
pub fn points_for_order(order: usize) -> usize {
    (order + 2) / 2
}

/// Gauss rule on the segment `p0 -> p1`, exact for polynomials of degree `order`
/// along the segment. Returns the rule and the segment parameters in `[0, 1]`.
pub fn segment_rule(p0: Point, p1: Point, order: usize) -> (QuadratureRule, Vec<f64>) {
    let (x, w) = gauss_legendre(points_for_order(order));
    let len = geometry::distance(p0, p1);
    let mut rule = QuadratureRule { points: Vec::with_capacity(x.len()), weights: Vec::with_capacity(x.len()) };
    let mut params = Vec::with_capacity(x.len());
    for (xi, wi) in x.iter().zip(&w) {
        let s = 0.5 * (xi + 1.0);
        rule.points.push([p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])]);
        rule.weights.push(0.5 * wi * len);
        params.push(s);
    }
    (rule, params)
}

pub fn face_quadrature(face: &Face, order: usize) -> QuadratureRule {
    segment_rule(face.endpoints[0], face.endpoints[1], order).0
}

/// Collapsed (Duffy) Gauss rule on a triangle, exact to total degree `order`.
pub fn triangle_rule(tri: &[Point; 3], order: usize, out: &mut QuadratureRule) {
    // the collapsing Jacobian raises the degree in the first direction by one
    let (x, w) = gauss_legendre(points_for_order(order + 1));
    let [a, b, c] = *tri;
    let e1 = geometry::sub(b, a);
    let e2 = geometry::sub(c, a);
    let jac = geometry::cross(e1, e2).abs();
    for (xi, wi) in x.iter().zip(&w) {
        let s = 0.5 * (xi + 1.0);
        for (xj, wj) in x.iter().zip(&w) {
            let t = 0.5 * (xj + 1.0);
            let u = s;
            let v = t * (1.0 - s);
            out.points.push([a[0] + u * e1[0] + v * e2[0], a[1] + u * e1[1] + v * e2[1]]);
            out.weights.push(0.25 * wi * wj * (1.0 - s) * jac);
        }
    }
}

/// Rule on a simple counter-clockwise polygon exact to total degree `order`,
/// built on a centroid fan (ear clipping when the fan would invert).
pub fn polygon_quadrature(poly: &[Point], order: usize) -> QuadratureRule {
    let tris = geometry::triangulate(poly);
    let per = points_for_order(order + 1).pow(2);
    let mut rule = QuadratureRule { points: Vec::with_capacity(per * tris.len()), weights: Vec::with_capacity(per * tris.len()) };
    for t in &tris {
        triangle_rule(t, order, &mut rule);
    }
    rule
}

/// Tensor Gauss rule on an axis-aligned rectangle.
pub fn rect_rule(r: &crate::geometry::Rect, order: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(points_for_order(order));
    let (hx, hy) = (0.5 * r.width(), 0.5 * r.height());
    let c = r.center();
    let mut rule = QuadratureRule { points: Vec::new(), weights: Vec::new() };
    for (xi, wi) in x.iter().zip(&w) {
        for (yj, wj) in x.iter().zip(&w) {
            rule.points.push([c[0] + hx * xi, c[1] + hy * yj]);
            rule.weights.push(wi * wj * hx * hy);
        }
    }
    rule
}
