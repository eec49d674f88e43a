use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use polydg_core::dgspace::DgSpace;
use polydg_core::mesh::{generate_polygonal_mesh, PolygonalMesh};
use polydg_core::timestepper::{self, DiscreteProblem, RunSummary, StepStats, Stepper, TimeStepState};
use polydg_core::Rect;

use crate::config::{MeshSource, SimulationConfig};
use crate::error::CliError;
use crate::{mesh_io, snapshot};

pub fn build_mesh(source: &MeshSource, split_y: f64) -> Result<Arc<PolygonalMesh>, CliError> {
    let mesh = match source {
        MeshSource::Generate { cells, seed, lloyd } => {
            if *cells == 0 {
                return Err(CliError::Config("mesh.cells must be positive".into()));
            }
            generate_polygonal_mesh(*cells, Rect::unit(), *seed, *lloyd)?.assign_regions(split_y)
        }
        MeshSource::File(path) => mesh_io::read_mesh(path)?,
    };
    Ok(Arc::new(mesh))
}

pub fn build_problem(cfg: &SimulationConfig, mesh: Arc<PolygonalMesh>) -> Result<DiscreteProblem, CliError> {
    Ok(DiscreteProblem::new(mesh, &cfg.sigma, cfg.discretization, cfg.solver)?)
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub stats: Vec<StepStats>,
    pub summary: RunSummary,
    pub snapshots: Vec<PathBuf>,
    pub setup_s: f64,
    pub solve_s: f64,
    pub final_state: TimeStepState,
}

/// Runs the configured simulation for `t_end` ms, writing snapshots when
/// enabled. `observe` sees the initial state and every later state.
pub fn run_simulation(cfg: &SimulationConfig, t_end: f64, observe: impl FnMut(&DgSpace, &TimeStepState)) -> Result<SimulationResult, CliError> {
    let mesh = build_mesh(cfg.mesh_source()?, cfg.split_y)?;
    run_on_mesh(cfg, mesh, t_end, observe)
}

/// Same as [`run_simulation`] on an already built mesh.
pub fn run_on_mesh(cfg: &SimulationConfig, mesh: Arc<PolygonalMesh>, t_end: f64, mut observe: impl FnMut(&DgSpace, &TimeStepState)) -> Result<SimulationResult, CliError> {
    let start = Instant::now();
    let model = cfg.ionic.instantiate()?;
    let problem = build_problem(cfg, mesh)?;
    let setup_s = start.elapsed().as_secs_f64();

    let n_steps = timestepper::step_count(t_end, cfg.discretization.dt);
    let out = &cfg.output;
    let write = out.snapshots && !out.formats.is_empty();
    if write {
        std::fs::create_dir_all(&out.dir).map_err(CliError::io(&out.dir))?;
    }
    let mut snapshots = Vec::new();
    let mut save = |state: &TimeStepState| -> Result<(), CliError> {
        if write && (state.k % out.every == 0 || state.k == n_steps) {
            for &f in &out.formats {
                let path = snapshot::snapshot_path(&out.dir, state.k, f);
                snapshot::export_snapshot(problem.space(), &state.u, state.t, &path, f)?;
                snapshots.push(path);
            }
        }
        Ok(())
    };

    let mut state = problem.initial_state(|x| cfg.initial.value(x), model.as_ref());
    observe(problem.space(), &state);
    save(&state)?;
    let stepper = Stepper::new(&problem, model.as_ref(), None);
    let t0 = Instant::now();
    let mut stats = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let (s, _) = stepper.advance(&mut state)?;
        observe(problem.space(), &state);
        save(&state)?;
        stats.push(s);
    }
    let solve_s = t0.elapsed().as_secs_f64();
    Ok(SimulationResult { summary: timestepper::summarize(&stats), stats, snapshots, setup_s, solve_s, final_state: state })
}
