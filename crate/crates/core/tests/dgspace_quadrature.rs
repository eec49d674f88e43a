use std::sync::Arc;

use polydg_core::dgspace::{local_dim, DgSpace, LocalBasis};
use polydg_core::geometry::{self, Point, Rect};
use polydg_core::mesh::{generate_polygonal_mesh, PolygonalMesh, Region};
use polydg_core::quadrature::{face_quadrature, gauss_legendre, polygon_quadrature, rect_rule};
use proptest::prelude::*;

/// Exact polygon moment of x^a y^b by the divergence theorem, integrating
/// x^(a+1) y^b / (a+1) n_x along each edge with a high-order 1D Gauss rule.
fn polygon_moment(poly: &[Point], a: i32, b: i32) -> f64 {
    let (x, w) = gauss_legendre(20);
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let dy = q[1] - p[1];
        for (xi, wi) in x.iter().zip(&w) {
            let s = 0.5 * (xi + 1.0);
            let px = p[0] + s * (q[0] - p[0]);
            let py = p[1] + s * (q[1] - p[1]);
            total += 0.5 * wi * px.powi(a + 1) * py.powi(b) / (a + 1) as f64 * dy;
        }
    }
    total
}

#[test]
fn quadrature_reproduces_moments_on_mesh_cells() {
    let m = generate_polygonal_mesh(64, Rect::unit(), 3, 5).unwrap();
    for k in (0..m.n_cells()).step_by(7) {
        let poly = m.cell_polygon(k);
        let c = m.centroids()[k];
        // shift to the centroid to keep moments well scaled
        let shifted: Vec<Point> = poly.iter().map(|p| geometry::sub(*p, c)).collect();
        for order in [1usize, 2, 4, 6, 10] {
            let rule = polygon_quadrature(&shifted, order);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            let area = geometry::signed_area(&shifted);
            assert!((rule.weights.iter().sum::<f64>() - area).abs() <= 1e-12 * area);
            for deg in 0..=order as i32 {
                for b in 0..=deg {
                    let a = deg - b;
                    let q = rule.integrate(|p| p[0].powi(a) * p[1].powi(b));
                    let exact = polygon_moment(&shifted, a, b);
                    let scale = rule.integrate(|p| (p[0].abs() + p[1].abs()).powi(deg));
                    assert!((q - exact).abs() <= 1e-12 * scale.max(1e-300), "order {order} x^{a} y^{b}: {q} vs {exact}");
                }
            }
        }
    }
}

#[test]
fn face_rule_weights_sum_to_length() {
    let m = generate_polygonal_mesh(30, Rect::unit(), 8, 2).unwrap();
    for f in m.interior_faces().iter().chain(m.boundary_faces()) {
        let r = face_quadrature(f, 5);
        assert_eq!(r.len(), 3);
        assert!((r.weights.iter().sum::<f64>() - f.length).abs() <= 1e-14 * f.length.max(1.0));
    }
}

#[test]
fn bbox_gram_is_identity() {
    let boxes = [Rect::unit(), Rect::new([-0.3, 0.2], [0.05, 0.21]), Rect::new([3.0, -7.0], [5.5, -1.0])];
    for p in 1..=4 {
        let basis = LocalBasis::new(p);
        let n = basis.len();
        for r in &boxes {
            let rule = rect_rule(r, 2 * p);
            let mut g = vec![0.0; n * n];
            let mut v = vec![0.0; n];
            for (&x, &w) in rule.points.iter().zip(&rule.weights) {
                basis.eval(r, x, &mut v, None);
                for i in 0..n {
                    for j in 0..n {
                        g[i * n + j] += w * v[i] * v[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g[i * n + j] - e).abs() < 1e-12, "p={p} ({i},{j}) = {}", g[i * n + j]);
                }
            }
        }
    }
}

#[test]
fn unit_square_p2_mass_is_identity() {
    let mesh = PolygonalMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![vec![0, 1, 2, 3]], vec![Region::Grey]).unwrap();
    let space = DgSpace::new(Arc::new(mesh), 2).unwrap();
    let m = polydg_core::assembly::assemble_mass(&space);
    let blk = m.block(0, 0).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((blk[i * 6 + j] - e).abs() < 1e-13);
        }
    }
}

#[test]
fn polygon_gram_is_orthonormal_only_on_the_box() {
    // over the polygon the Gram matrix differs from the identity
    let m = Arc::new(generate_polygonal_mesh(512, Rect::unit(), 42, 20).unwrap());
    let space = DgSpace::new(m.clone(), 4).unwrap();
    let mass = polydg_core::assembly::assemble_mass(&space);
    let blk = mass.block(10, 10).unwrap();
    let ratio = m.areas()[10] / space.bbox(10).area();
    assert!((blk[0] - ratio).abs() < 1e-12);
    assert!(ratio < 1.0);
}

#[test]
fn dimensions() {
    let m = Arc::new(generate_polygonal_mesh(512, Rect::unit(), 42, 20).unwrap());
    assert_eq!(DgSpace::new(m.clone(), 1).unwrap().dim(), 1536);
    assert_eq!(DgSpace::new(m, 4).unwrap().dim(), 7680);
    assert_eq!(local_dim(2), 6);
}

#[test]
fn constant_mode_value() {
    let b = LocalBasis::new(3);
    let r = Rect::new([0.1, 0.2], [0.4, 0.3]);
    let mut v = vec![0.0; b.len()];
    let mut g = vec![[0.0; 2]; b.len()];
    b.eval(&r, [0.33, 0.21], &mut v, Some(&mut g));
    assert!((v[0] - 1.0 / r.area().sqrt()).abs() < 1e-13);
    assert_eq!(g[0], [0.0, 0.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradients_match_central_differences(
        p in 1usize..=4,
        x0 in -1.0f64..1.0, y0 in -1.0f64..1.0,
        w in 0.05f64..2.0, h in 0.05f64..2.0,
        sx in 0.0f64..1.0, sy in 0.0f64..1.0,
    ) {
        let r = Rect::new([x0, y0], [x0 + w, y0 + h]);
        let x = [x0 + sx * w, y0 + sy * h];
        let b = LocalBasis::new(p);
        let n = b.len();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        b.eval(&r, x, &mut v, Some(&mut g));
        let d = 1e-6;
        let (mut vp, mut vm) = (vec![0.0; n], vec![0.0; n]);
        for dir in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[dir] += d;
            xm[dir] -= d;
            b.eval(&r, xp, &mut vp, None);
            b.eval(&r, xm, &mut vm, None);
            for i in 0..n {
                let fd = (vp[i] - vm[i]) / (2.0 * d);
                let scale = g[i][dir].abs().max(v.iter().fold(0.0f64, |a, b| a.max(b.abs())) / w.min(h));
                prop_assert!((fd - g[i][dir]).abs() <= 1e-6 * scale, "mode {} dir {}: fd {} vs {}", i, dir, fd, g[i][dir]);
            }
        }
    }

    #[test]
    fn monomials_integrate_exactly_on_random_convex_polygons(
        angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 3..9),
        order in 0usize..9,
    ) {
        let mut a = angles.clone();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        a.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        prop_assume!(a.len() >= 3);
        let poly: Vec<Point> = a.iter().map(|t| [0.3 * t.cos(), 0.2 * t.sin()]).collect();
        prop_assume!(geometry::signed_area(&poly) > 1e-4);
        let rule = polygon_quadrature(&poly, order);
        for deg in 0..=order as i32 {
            for b in 0..=deg {
                let q = rule.integrate(|p| p[0].powi(deg - b) * p[1].powi(b));
                let exact = polygon_moment(&poly, deg - b, b);
                let scale = rule.integrate(|p| (p[0].abs() + p[1].abs()).powi(deg));
                prop_assert!((q - exact).abs() <= 1e-12 * scale);
            }
        }
    }
}
