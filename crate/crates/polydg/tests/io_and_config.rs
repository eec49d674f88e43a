use std::path::Path;
use std::sync::Arc;

use polydg::config::{parse_config, MeshSource, SnapshotFormat};
use polydg::core::dgspace::DgSpace;
use polydg::core::mesh::{generate_polygonal_mesh, PolygonalMesh, Region};
use polydg::core::timestepper::PreconditionerKind;
use polydg::core::Rect;
use polydg::mesh_io::{format_mesh, parse_mesh, read_mesh, write_mesh};
use polydg::snapshot::{export_snapshot, read_csv_cellmeans, read_vtk};
use polydg::CliError;
use proptest::prelude::*;

fn cfg(text: &str) -> Result<polydg::config::Config, CliError> {
    parse_config(text, Path::new("test.cfg"))
}

#[test]
fn mesh_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate_polygonal_mesh(512, Rect::unit(), 9, 20).unwrap().assign_regions(0.5);
    let path = dir.path().join("m.txt");
    write_mesh(&m, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), format!("polymesh 2 512 {}", m.n_vertices()));
    let back = read_mesh(&path).unwrap();
    assert_eq!(back.vertices(), m.vertices());
    assert_eq!(back.cells(), m.cells());
    assert_eq!(back.regions(), m.regions());
    assert_eq!(back.diameters(), m.diameters());
}

#[test]
fn single_square_round_trip_and_comments() {
    let text = "# a unit square\npolymesh 2 1 4\n0 0\n1 0\n# comment between sections\n1 1\n0 1\n4 0 1 2 3 W\n";
    let m = parse_mesh(text, Path::new("sq")).unwrap();
    assert_eq!(m.region(0), Region::White);
    let again = parse_mesh(&format_mesh(&m), Path::new("sq")).unwrap();
    assert_eq!(again.vertices(), m.vertices());
    assert_eq!(again.cells(), m.cells());
}

#[test]
fn malformed_mesh_files_report_lines() {
    let bad_coord = "polymesh 2 1 4\n0 0\n1 x\n1 1\n0 1\n4 0 1 2 3 G\n";
    match parse_mesh(bad_coord, Path::new("f")) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let bad_region = "polymesh 2 1 4\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3 X\n";
    assert!(matches!(parse_mesh(bad_region, Path::new("f")), Err(CliError::Parse { line: 6, .. })));
    let truncated = "polymesh 2 2 4\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3 G\n";
    assert!(matches!(parse_mesh(truncated, Path::new("f")), Err(CliError::Parse { .. })));
    let out_of_range = "polymesh 2 1 4\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 7 G\n";
    assert!(matches!(parse_mesh(out_of_range, Path::new("f")), Err(CliError::Mesh(_))));
    assert!(matches!(parse_mesh("polymesh 3 1 4\n", Path::new("f")), Err(CliError::Parse { line: 1, .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generated_meshes_round_trip(n in 4usize..80, seed in 0u64..10_000) {
        let m = generate_polygonal_mesh(n, Rect::unit(), seed, 3).unwrap().assign_regions(0.5);
        let back = parse_mesh(&format_mesh(&m), Path::new("p")).unwrap();
        prop_assert_eq!(back.vertices(), m.vertices());
        prop_assert_eq!(back.cells(), m.cells());
        prop_assert_eq!(back.regions(), m.regions());
    }
}

#[test]
fn minimal_config_uses_defaults() {
    let c = cfg("mesh.cells = 512\ndg.p = 1\n").unwrap();
    let s = &c.simulation;
    assert_eq!(s.discretization.eta0, 10.0);
    assert_eq!(s.discretization.dt, 2.5e-3);
    assert_eq!(s.t_end, 10.0);
    assert_eq!(s.discretization.membrane.chi_m, 1000.0);
    assert_eq!(s.discretization.membrane.c_m, 1.0);
    assert_eq!(s.mesh, Some(MeshSource::Generate { cells: 512, seed: 0, lloyd: 20 }));
    assert_eq!(s.solver.tol, 1e-9);
    assert_eq!(s.solver.precond.kind, PreconditionerKind::TwoLevel);
    assert_eq!(s.output.every, 100);
    assert_eq!(c.study.t_end, 0.25);
    assert_eq!(c.study.cells, vec![512]);
}

#[test]
fn units_are_converted() {
    let c = cfg("mesh.cells = 16\ndg.p = 2\nsigma.white.l = 0.69 S/m\nsigma.white.n = 2.571 S/m\ntime.dt = 2.5 us\ntime.T = 0.002 s\nmembrane.chi_m = 0.1 1/mm\ninit.u_stim = -0.05 V\nionic.params.c1 = 260 1/s\n").unwrap();
    let s = &c.simulation;
    assert!((s.sigma.white.sigma_l - 6.9).abs() < 1e-12);
    assert!((s.sigma.white.sigma_n - 25.71).abs() < 1e-12);
    assert!((s.discretization.dt - 2.5e-3).abs() < 1e-18);
    assert!((s.t_end - 2.0).abs() < 1e-12);
    assert!((s.discretization.membrane.chi_m - 1.0).abs() < 1e-12);
    assert!((s.initial.u_stim + 50.0).abs() < 1e-12);
    match s.ionic {
        polydg::core::ionics::IonicModelChoice::FitzHughNagumo(m) => assert!((m.c1 - 0.26).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn precond_keys_are_parsed() {
    let c = cfg("mesh.cells = 16\ndg.p = 2\nprecond.kind = \"two-level\"\nprecond.H_ratio = 2\nprecond.q = 2\nsolver.warm_start = false # cold start\n").unwrap();
    let p = c.simulation.solver.precond;
    assert_eq!(p.kind, PreconditionerKind::TwoLevel);
    assert_eq!(p.coarse_ratio, 2);
    assert_eq!(p.q, 2);
    assert!(!c.simulation.solver.warm_start);
}

#[test]
fn config_errors_name_the_key() {
    let cases = [
        ("mesh.cells = 16\n", "dg.p"),
        ("mesh.cells = 16\ndg.p = 1\nprecond.q = 2\n", "precond.q"),
        ("mesh.cells = 16\ndg.p = 1\ndg.pp = 1\n", "dg.pp"),
        ("mesh.cells = 16\ndg.p = 1\ntime.dt = 2.5\n", "time.dt"),
        ("mesh.cells = 16\ndg.p = 1\ntime.dt = 2.5 mV\n", "time.dt"),
        ("mesh.cells = 16\ndg.p = 1\nsigma.grey.l = -1 S/m\n", "grey"),
        ("mesh.cells = 16\ndg.p = 1\nprecond.H_ratio = 3\n", "precond.H_ratio"),
        ("mesh.cells = 16\ndg.p = 1\ndg.p = 2\n", "dg.p"),
        ("mesh.cells = 16\ndg.p = 1\nstudy.degrees = 1:2\n", "study.degrees"),
        ("mesh.cells = 16\ndg.p = 1\nionic.model = \"hh\"\n", "ionic.model"),
        ("mesh.cells = 16\ndg.p = 1\nsolver.tol = 2\n", "solver.tol"),
    ];
    for (text, key) in cases {
        let e = cfg(text).unwrap_err();
        assert_eq!(e.exit_code(), 2, "{text}");
        assert!(e.to_string().contains(key), "{text}: {e}");
    }
    let c = cfg("dg.p = 1\n").unwrap();
    assert!(c.simulation.mesh_source().unwrap_err().to_string().contains("mesh.cells"));
}

#[test]
fn mesh_file_is_relative_to_the_config() {
    let c = parse_config("mesh.file = \"meshes/a.txt\"\ndg.p = 1\n", Path::new("/data/run.cfg")).unwrap();
    assert_eq!(c.simulation.mesh, Some(MeshSource::File("/data/meshes/a.txt".into())));
}

fn brain_space(n: usize, p: usize) -> DgSpace {
    let m: Arc<PolygonalMesh> = Arc::new(generate_polygonal_mesh(n, Rect::unit(), 4, 10).unwrap().assign_regions(0.5));
    DgSpace::new(m, p).unwrap()
}

#[test]
fn constant_field_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let space = brain_space(64, 2);
    let u = space.constant(-71.5);
    let csv = dir.path().join("u.csv");
    let vtk = dir.path().join("u.vtk");
    export_snapshot(&space, &u, 0.5, &csv, SnapshotFormat::CsvCellMeans).unwrap();
    export_snapshot(&space, &u, 0.5, &vtk, SnapshotFormat::VtkLegacy).unwrap();
    let rows = read_csv_cellmeans(&csv).unwrap();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| (r.u_mean + 71.5).abs() < 1e-12));
    for (r, c) in rows.iter().zip(space.mesh().centroids()) {
        assert_eq!(r.centroid, *c);
    }
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert_eq!(text.lines().next().unwrap(), "# vtk DataFile Version 3.0");
    let v = read_vtk(&vtk).unwrap();
    assert_eq!(v.n_cells, 64);
    assert_eq!(v.t, Some(0.5));
    assert!(v.u_mean.iter().all(|m| (m + 71.5).abs() < 1e-12));
}

#[test]
fn initial_data_snapshot_means() {
    let dir = tempfile::tempdir().unwrap();
    let space = brain_space(512, 2);
    let m = polydg::core::assembly::assemble_mass(&space);
    let solver = polydg::core::assembly::BlockDiagonalSolver::new(&m).unwrap();
    let init = polydg::config::InitialData::default();
    let u = polydg::core::assembly::l2_project(&space, &solver, |x| init.value(x));
    let path = dir.path().join("u0.csv");
    export_snapshot(&space, &u, 0.0, &path, SnapshotFormat::CsvCellMeans).unwrap();
    let rows = read_csv_cellmeans(&path).unwrap();
    let mut inside = 0;
    for (k, r) in rows.iter().enumerate() {
        let hits = space.mesh().cell_polygon(k).iter().any(|v| (v[0] - 0.5).powi(2) + (v[1] - 1.0).powi(2) < 0.016)
            || (r.centroid[0] - 0.5).powi(2) + (r.centroid[1] - 1.0).powi(2) < 0.016;
        if hits {
            inside += 1;
            assert!(r.u_mean > -67.0 - 1e-9 && r.u_mean <= -50.0 + 1e-9, "cell {k}: {}", r.u_mean);
        } else if (r.u_mean + 67.0).abs() > 1e-9 {
            // cells grazing the disk without a vertex inside it
            assert!(r.u_mean > -67.0 && r.u_mean < -50.0);
        }
    }
    assert!(inside > 0);
}
