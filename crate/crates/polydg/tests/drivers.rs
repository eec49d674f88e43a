use std::path::Path;
use std::process::Command;

use polydg::config::{parse_config, SnapshotFormat};
use polydg::core::timestepper::PreconditionerKind;
use polydg::simulate::run_simulation;
use polydg::snapshot::read_vtk;
use polydg::study::{format_table, run_scaling_study, write_csv, CSV_HEADER};

const SMALL: &str = "mesh.cells = 64\nmesh.seed = 2\ndg.p = 1\nmembrane.chi_m = 0.1 1/cm\ntime.T = 0.025 ms\n";

#[test]
fn run_writes_snapshots_on_cadence() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}output.every = 4\noutput.dir = \"{}\"\n", dir.path().display());
    let cfg = parse_config(&text, Path::new("t.cfg")).unwrap().simulation;
    let mut seen = Vec::new();
    let res = run_simulation(&cfg, cfg.t_end, |_, s| seen.push(s.k)).unwrap();
    assert_eq!(res.stats.len(), 10);
    assert_eq!(seen, (0..=10).collect::<Vec<_>>());
    // steps 0, 4, 8 and the final step 10, in both formats
    assert_eq!(res.snapshots.len(), 8);
    for k in [0, 4, 8, 10] {
        for f in [SnapshotFormat::VtkLegacy, SnapshotFormat::CsvCellMeans] {
            assert!(polydg::snapshot::snapshot_path(dir.path(), k, f).exists());
        }
    }
    let v = read_vtk(&polydg::snapshot::snapshot_path(dir.path(), 10, SnapshotFormat::VtkLegacy)).unwrap();
    assert_eq!(v.n_cells, 64);
    assert!((v.t.unwrap() - 0.025).abs() < 1e-15);
}

#[test]
fn equilibrium_run_is_stationary() {
    let text = format!("{SMALL}init.u_rest = -85 mV\ninit.u_stim = -85 mV\noutput.snapshots = false\n");
    let cfg = parse_config(&text, Path::new("t.cfg")).unwrap().simulation;
    let res = run_simulation(&cfg, cfg.t_end, |_, _| {}).unwrap();
    assert_eq!(res.stats.len(), 10);
    assert!(res.final_state.u.iter().zip(&polydg::core::dgspace::DgSpace::new(
        std::sync::Arc::new(polydg::core::mesh::generate_polygonal_mesh(64, polydg::core::Rect::unit(), 2, 20).unwrap()), 1).unwrap().constant(-85.0))
        .all(|(a, b)| (a - b).abs() < 1e-8));
}

#[test]
fn study_rows_csv_and_table() {
    let text = "mesh.seed = 1\ndg.p = 1\nmembrane.chi_m = 0.1 1/cm\nstudy.cells = 64\nstudy.ratios = 2, 4\nstudy.kinds = two-level, none\nstudy.T = 0.01 ms\n";
    let cfg = parse_config(text, Path::new("s.cfg")).unwrap();
    let rows = run_scaling_study(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.converged));
    let two: Vec<_> = rows.iter().filter(|r| r.precond == PreconditionerKind::TwoLevel).collect();
    let cg: Vec<_> = rows.iter().filter(|r| r.precond == PreconditionerKind::None).collect();
    assert!(two.iter().all(|r| r.avg_iters < cg[0].avg_iters));
    assert!(two[0].n_coarse > two[1].n_coarse);
    assert_eq!(cg[0].avg_iters, cg[1].avg_iters);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("study.csv");
    write_csv(&rows, &path).unwrap();
    let mut r = csv::Reader::from_path(&path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    for (rec, row) in r.records().zip(&rows) {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<usize>().unwrap(), row.n_h);
        assert_eq!(rec[1].parse::<f64>().unwrap(), row.h);
        assert_eq!(rec[7].parse::<f64>().unwrap(), row.avg_iters);
        assert_eq!(rec[8].parse::<f64>().unwrap(), row.cond_est);
        assert_eq!(rec[9].parse::<f64>().unwrap(), row.wall_s);
    }
    let table = format_table(&rows);
    assert!(table.contains("H = 2h") && table.contains("H = 4h") && table.contains("CG"));

    // everything but wall-clock time repeats exactly
    let again = run_scaling_study(&cfg).unwrap();
    for (a, b) in rows.iter().zip(&again) {
        assert_eq!((a.avg_iters, a.cond_est, a.n_coarse), (b.avg_iters, b.cond_est, b.n_coarse));
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_polydg");
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let mesh = dir.path().join("m.txt");
    let st = Command::new(bin).args(["mesh", "--cells", "32", "--seed", "5", "--out"]).arg(&mesh).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(std::fs::read_to_string(&mesh).unwrap().starts_with("polymesh 2 32 "));

    let ok = write("ok.cfg", &format!("mesh.file = \"{}\"\ndg.p = 1\ntime.T = 0.005 ms\noutput.snapshots = false\n", mesh.display()));
    assert_eq!(Command::new(bin).args(["run", "--config"]).arg(&ok).output().unwrap().status.code(), Some(0));
    let out = Command::new(bin).args(["inspect", "--matrix", "system", "--config"]).arg(&ok).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("condition number"));

    let bad = write("bad.cfg", "mesh.cells = 16\ndg.p = 1\nprecond.q = 2\n");
    assert_eq!(Command::new(bin).args(["run", "--config"]).arg(&bad).output().unwrap().status.code(), Some(2));
    let bc = write("bc.cfg", "mesh.cells = 16\ndg.p = 1\nionic.model = \"barreto-cressman\"\n");
    assert_eq!(Command::new(bin).args(["run", "--config"]).arg(&bc).output().unwrap().status.code(), Some(2));
    let stuck = write("stuck.cfg", "mesh.cells = 64\ndg.p = 1\nsolver.tol = 1e-12\nsolver.maxit = 1\nprecond.kind = none\ntime.T = 0.005 ms\noutput.snapshots = false\n");
    assert_eq!(Command::new(bin).args(["run", "--config"]).arg(&stuck).output().unwrap().status.code(), Some(3));

    let study_dir = dir.path().join("study");
    let sc = write("study.cfg", "dg.p = 1\nstudy.cells = 32\nstudy.ratios = 2\nstudy.T = 0.005 ms\n");
    let st = Command::new(bin).args(["study", "--config"]).arg(&sc).arg("--out").arg(&study_dir).env("POLYDG_THREADS", "1").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let csv = std::fs::read_to_string(study_dir.join("study.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "N_h,h,ratio,N_H,p,q,precond,avg_iters,cond_est,wall_s,converged");
    assert_eq!(csv.lines().count(), 3);
}
