//! Table-1-style scaling studies over mesh sizes, coarse ratios, degrees and
//! preconditioners.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use polydg_core::agglomerate::{coarsening_hierarchy, levels_for_ratio};
use polydg_core::mesh::PolygonalMesh;
use polydg_core::timestepper::PreconditionerKind;
use rayon::prelude::*;

use crate::config::{kind_name, Config, MeshSource};
use crate::error::CliError;
use crate::simulate;

pub const CSV_HEADER: [&str; 11] = ["N_h", "h", "ratio", "N_H", "p", "q", "precond", "avg_iters", "cond_est", "wall_s", "converged"];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n_h: usize,
    pub h: f64,
    pub ratio: usize,
    /// Coarse agglomerate count; 0 without a coarse level.
    pub n_coarse: usize,
    pub p: usize,
    pub q: usize,
    pub precond: PreconditionerKind,
    pub avg_iters: f64,
    /// Lanczos estimate at the step with the most iterations.
    pub cond_est: f64,
    pub cond_mean: f64,
    pub max_iters: usize,
    pub wall_s: f64,
    pub converged: bool,
}

/// Worker count from `POLYDG_THREADS`, or rayon's default.
pub fn thread_count() -> Option<usize> {
    std::env::var("POLYDG_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|n| *n > 0)
}

pub fn thread_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        b = b.num_threads(n);
    }
    b.build().expect("failed to start the worker pool")
}

#[derive(Debug, Clone, Copy)]
struct Job {
    mesh: usize,
    p: usize,
    q: usize,
    kind: PreconditionerKind,
    ratio: usize,
}

pub fn run_scaling_study(config: &Config) -> Result<Vec<StudyRow>, CliError> {
    let base = &config.simulation;
    let spec = &config.study;
    let meshes: Vec<Arc<PolygonalMesh>> = match base.mesh.as_ref() {
        Some(MeshSource::File(_)) => vec![simulate::build_mesh(base.mesh_source()?, base.split_y)?],
        Some(MeshSource::Generate { seed, lloyd, .. }) => spec
            .cells
            .iter()
            .map(|&cells| simulate::build_mesh(&MeshSource::Generate { cells, seed: *seed, lloyd: *lloyd }, base.split_y))
            .collect::<Result<_, _>>()?,
        None if !spec.cells.is_empty() => spec
            .cells
            .iter()
            .map(|&cells| simulate::build_mesh(&MeshSource::Generate { cells, seed: 0, lloyd: 20 }, base.split_y))
            .collect::<Result<_, _>>()?,
        None => return Err(CliError::Config("missing mandatory key study.cells, mesh.cells or mesh.file".into())),
    };

    let mut jobs = Vec::new();
    for mesh in 0..meshes.len() {
        for &(p, q) in &spec.degrees {
            for &kind in &spec.kinds {
                for &ratio in &spec.ratios {
                    jobs.push(Job { mesh, p, q, kind, ratio });
                }
            }
        }
    }
    // runs without a coarse level do not depend on the ratio
    let unique: Vec<usize> = (0..jobs.len())
        .filter(|&i| jobs[i].kind == PreconditionerKind::TwoLevel || i == 0 || !same_run(&jobs[i - 1], &jobs[i]))
        .collect();
    let results: Vec<StudyRow> = thread_pool().install(|| unique.par_iter().map(|&i| run_job(config, &meshes, jobs[i])).collect());

    let mut rows = Vec::with_capacity(jobs.len());
    let mut last = None;
    for (i, job) in jobs.iter().enumerate() {
        if let Some(pos) = unique.iter().position(|&u| u == i) {
            last = Some(&results[pos]);
        }
        let mut row = last.expect("first job is always unique").clone();
        row.ratio = job.ratio;
        rows.push(row);
    }
    Ok(rows)
}

fn same_run(a: &Job, b: &Job) -> bool {
    a.mesh == b.mesh && a.p == b.p && a.q == b.q && a.kind == b.kind && b.kind != PreconditionerKind::TwoLevel
}

fn run_job(config: &Config, meshes: &[Arc<PolygonalMesh>], job: Job) -> StudyRow {
    let mesh = meshes[job.mesh].clone();
    let mut cfg = config.simulation.clone();
    cfg.discretization.degree = job.p;
    cfg.solver.precond.q = job.q;
    cfg.solver.precond.kind = job.kind;
    cfg.solver.precond.coarse_ratio = job.ratio;
    cfg.output.snapshots = false;
    let mut row = StudyRow {
        n_h: mesh.n_cells(),
        h: mesh.h(),
        ratio: job.ratio,
        n_coarse: 0,
        p: job.p,
        q: job.q,
        precond: job.kind,
        avg_iters: f64::NAN,
        cond_est: f64::NAN,
        cond_mean: f64::NAN,
        max_iters: 0,
        wall_s: 0.0,
        converged: false,
    };
    if job.kind == PreconditionerKind::TwoLevel {
        if let Some(levels) = levels_for_ratio(job.ratio) {
            if let Ok(h) = coarsening_hierarchy(&mesh, levels) {
                row.n_coarse = h[levels].n_parts();
            }
        }
    }
    let start = std::time::Instant::now();
    match simulate::run_on_mesh(&cfg, mesh, config.study.t_end, |_, _| {}) {
        Ok(res) => {
            row.avg_iters = res.summary.avg_iterations;
            row.cond_est = res.summary.cond_at_max.unwrap_or(f64::NAN);
            row.cond_mean = res.summary.cond_mean.unwrap_or(f64::NAN);
            row.max_iters = res.summary.max_iterations;
            row.converged = true;
        }
        Err(e) => eprintln!("study: N_h = {}, p = {}, {} H/h = {}: {e}", row.n_h, row.p, kind_name(job.kind), job.ratio),
    }
    row.wall_s = start.elapsed().as_secs_f64();
    row
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_csv(rows: &[StudyRow], path: &Path) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n_h.to_string(),
            num(r.h),
            r.ratio.to_string(),
            r.n_coarse.to_string(),
            r.p.to_string(),
            r.q.to_string(),
            kind_name(r.precond).to_string(),
            num(r.avg_iters),
            num(r.cond_est),
            num(r.wall_s),
            r.converged.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Mean-over-steps condition estimates and peak iteration counts.
pub fn write_extra_csv(rows: &[StudyRow], path: &Path) -> Result<(), CliError> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["N_h", "ratio", "p", "q", "precond", "cond_mean", "max_iters"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.n_h.to_string(), r.ratio.to_string(), r.p.to_string(), r.q.to_string(), kind_name(r.precond).to_string(), num(r.cond_mean), r.max_iters.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Text table of iteration counts: one block per `(p, q)`, rows per
/// coarse ratio followed by the one-level rows, columns per mesh size.
/// Entries read `cond (avg iters)`.
pub fn format_table(rows: &[StudyRow]) -> String {
    let mut out = String::new();
    let mut degrees: Vec<(usize, usize)> = rows.iter().map(|r| (r.p, r.q)).collect();
    degrees.dedup();
    degrees.sort_unstable();
    degrees.dedup();
    for (p, q) in degrees {
        let block: Vec<&StudyRow> = rows.iter().filter(|r| r.p == p && r.q == q).collect();
        let mut sizes: Vec<(usize, f64)> = block.iter().map(|r| (r.n_h, r.h)).collect();
        sizes.sort_by_key(|s| s.0);
        sizes.dedup_by_key(|s| s.0);
        let _ = writeln!(out, "p = {p}, q = {q}");
        let _ = write!(out, "{:<14}", "");
        for (n, h) in &sizes {
            let _ = write!(out, "{:>22}", format!("h={h:.3} ({n})"));
        }
        out.push('\n');
        let mut labels: Vec<(PreconditionerKind, Option<usize>)> = Vec::new();
        for r in &block {
            let key = (r.precond, (r.precond == PreconditionerKind::TwoLevel).then_some(r.ratio));
            if !labels.contains(&key) {
                labels.push(key);
            }
        }
        labels.sort_by_key(|(k, r)| (*k != PreconditionerKind::TwoLevel, *k == PreconditionerKind::None, r.unwrap_or(0)));
        for (kind, ratio) in labels {
            let name = match (kind, ratio) {
                (PreconditionerKind::TwoLevel, Some(r)) => format!("H = {r}h"),
                (PreconditionerKind::None, _) => "CG".to_string(),
                (k, _) => kind_name(k).to_string(),
            };
            let _ = write!(out, "{name:<14}");
            for (n, _) in &sizes {
                let cell = block
                    .iter()
                    .find(|r| r.n_h == *n && r.precond == kind && ratio.map_or(true, |x| r.ratio == x))
                    .map(|r| if r.converged { format!("{:.2e} ({:.2})", r.cond_est, r.avg_iters) } else { "failed".to_string() })
                    .unwrap_or_default();
                let _ = write!(out, "{cell:>22}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
