use polydg_core::agglomerate::{agglomerate, coarsening_hierarchy, AgglomeratedPartition};
use polydg_core::geometry::{self, Rect};
use polydg_core::mesh::{generate_polygonal_mesh, PolygonalMesh, Region};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn check_invariants(m: &PolygonalMesh, domain: Rect) {
    let area: f64 = m.areas().iter().sum();
    assert!((area - domain.area()).abs() <= 1e-10 * domain.area(), "area {area}");
    let perim: f64 = (0..m.n_cells()).map(|k| geometry::perimeter(&m.cell_polygon(k))).sum();
    let faces: f64 = 2.0 * m.interior_faces().iter().map(|f| f.length).sum::<f64>()
        + m.boundary_faces().iter().map(|f| f.length).sum::<f64>();
    assert!((perim - faces).abs() <= 1e-10 * perim, "perimeter {perim} vs faces {faces}");
    for f in m.interior_faces().iter().chain(m.boundary_faces()) {
        assert!((geometry::norm(f.normal) - 1.0).abs() <= 1e-14);
        if let Some(n) = f.neighbor {
            assert_ne!(n, f.owner);
            // the normal points from the owner towards the neighbour
            let d = geometry::sub(m.centroids()[n], m.centroids()[f.owner]);
            assert!(geometry::dot(d, f.normal) > 0.0);
        }
    }
    let blen: f64 = m.boundary_faces().iter().map(|f| f.length).sum();
    assert!((blen - 2.0 * (domain.width() + domain.height())).abs() < 1e-10);
    for k in 0..m.n_cells() {
        let poly = m.cell_polygon(k);
        assert!((m.diameters()[k] - geometry::diameter(&poly)).abs() == 0.0);
        assert!(geometry::is_simple(&poly));
    }
    assert!(m.h() < 1.0 || m.n_cells() == 1);
}

#[test]
fn paper_scale_mesh_size() {
    let m = generate_polygonal_mesh(512, Rect::unit(), 42, 20).unwrap();
    assert_eq!(m.n_cells(), 512);
    let h = m.h();
    assert!((h - 0.087).abs() <= 0.3 * 0.087, "h = {h}");
    check_invariants(&m, Rect::unit());
}

#[test]
fn generation_is_deterministic() {
    let a = generate_polygonal_mesh(200, Rect::unit(), 9, 10).unwrap();
    let b = generate_polygonal_mesh(200, Rect::unit(), 9, 10).unwrap();
    assert_eq!(a, b);
    let pa = agglomerate(&a, None, 50).unwrap();
    let pb = agglomerate(&b, None, 50).unwrap();
    assert_eq!(pa, pb);
}

#[test]
fn rectangular_domain() {
    let dom = Rect::new([-1.0, 2.0], [0.5, 2.5]);
    let m = generate_polygonal_mesh(60, dom, 1, 3).unwrap();
    check_invariants(&m, dom);
}

#[test]
fn grey_area_close_to_half() {
    let m = generate_polygonal_mesh(512, Rect::unit(), 42, 20).unwrap().assign_regions(0.5);
    // Monte-Carlo estimate of the area labelled grey
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let polys: Vec<_> = (0..m.n_cells()).map(|k| m.cell_polygon(k)).collect();
    let samples = 20_000;
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = [rng.gen::<f64>(), rng.gen::<f64>()];
        let k = (0..m.n_cells()).find(|&k| point_in_polygon(p, &polys[k])).unwrap();
        if m.region(k) == Region::Grey {
            hits += 1;
        }
    }
    let mc = hits as f64 / samples as f64;
    let exact: f64 = (0..m.n_cells()).filter(|&k| m.region(k) == Region::Grey).map(|k| m.areas()[k]).sum();
    assert!((mc - exact).abs() < 0.02, "mc {mc} vs {exact}");
    assert!((exact - 0.5).abs() <= 2.0 * m.h(), "grey area {exact}");
    // idempotent
    let again = m.clone().assign_regions(0.5);
    assert_eq!(again, m);
}

fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

#[test]
fn coarse_level_of_512_mesh() {
    let m = generate_polygonal_mesh(512, Rect::unit(), 42, 20).unwrap().assign_regions(0.5);
    let p = agglomerate(&m, None, 128).unwrap();
    assert_eq!(p.n_parts(), 128);
    assert!(p.target_met());
    p.validate(&m).unwrap();
    let ratio = p.h_max() / m.h();
    assert!(ratio > 1.4 && ratio < 3.0, "H/h = {ratio}");
}

#[test]
fn hierarchy_is_nested_and_covers() {
    let m = generate_polygonal_mesh(512, Rect::unit(), 42, 20).unwrap().assign_regions(0.5);
    let levels = coarsening_hierarchy(&m, 3).unwrap();
    assert_eq!(levels.len(), 4);
    for w in levels.windows(2) {
        assert!(w[0].is_refinement_of(&w[1]));
        assert!(w[1].n_parts() <= w[0].n_parts());
        w[1].validate(&m).unwrap();
    }
    // transitivity: the finest level refines the coarsest one
    assert!(levels[0].is_refinement_of(&levels[3]));
    for p in &levels {
        let total: f64 = (0..p.n_parts()).map(|a| p.members(a).iter().map(|&k| m.areas()[k]).sum::<f64>()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
    let h = m.h();
    let hs: Vec<f64> = levels.iter().map(|p| p.h_max() / h).collect();
    for w in hs.windows(2) {
        assert!(w[1] > w[0], "{hs:?}");
    }
}

#[test]
fn explicit_owner_map_validation() {
    let m = generate_polygonal_mesh(16, Rect::unit(), 2, 5).unwrap();
    let all_one = AgglomeratedPartition::from_owner(&m, vec![0; 16]).unwrap();
    assert_eq!(all_one.n_parts(), 1);
    assert!(AgglomeratedPartition::from_owner(&m, vec![0; 15]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_meshes_satisfy_invariants(n in 2usize..120, seed in 0u64..1000, iters in 0usize..6) {
        let m = generate_polygonal_mesh(n, Rect::unit(), seed, iters).unwrap();
        prop_assert_eq!(m.n_cells(), n);
        check_invariants(&m, Rect::unit());
        let p = agglomerate(&m, None, n.div_ceil(4)).unwrap();
        p.validate(&m).unwrap();
        prop_assert_eq!(p.n_parts(), n.div_ceil(4));
    }
}
