//! Crank–Nicolson time stepping of the monodomain equation with an
//! extrapolated ionic current and explicit updates of the ionic states.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::agglomerate::{self, AgglomeratedPartition};
use crate::assembly::{self, BlockDiagonalSolver, ConductivityField};
use crate::dgspace::DgSpace;
use crate::error::{SetupError, StepError};
use crate::geometry::Point;
use crate::ionics::{self, IonicModel};
use crate::krylov::{self, IdentityPreconditioner, PcgOptions, PcgReport, Preconditioner};
use crate::linalg::BlockSparseMatrix;
use crate::mesh::PolygonalMesh;
use crate::schwarz::{CoarseEmbedding, SchwarzPreconditioner};

/// External current density `I_ext(x, t)`.
pub type SourceFn = dyn Fn(Point, f64) -> f64 + Send + Sync;

/// Membrane parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembraneParams {
    /// Surface-to-volume ratio (1/cm).
    pub chi_m: f64,
    /// Membrane capacitance (uF/cm^2).
    pub c_m: f64,
}

impl Default for MembraneParams {
    fn default() -> Self {
        MembraneParams { chi_m: 1000.0, c_m: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    None,
    BlockJacobi,
    TwoLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreconditionerSpec {
    pub kind: PreconditionerKind,
    /// Coarse mesh size ratio `H/h` (a power of two).
    pub coarse_ratio: usize,
    /// Coarse polynomial degree.
    pub q: usize,
    /// Subdomain size ratio; 1 means one element per subdomain.
    pub subdomain_ratio: usize,
}

impl Default for PreconditionerSpec {
    fn default() -> Self {
        PreconditionerSpec { kind: PreconditionerKind::TwoLevel, coarse_ratio: 2, q: 1, subdomain_ratio: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub tol: f64,
    /// Defaults to `20 sqrt(n)` capped at `n`.
    pub maxit: Option<usize>,
    /// Start each solve from the previous step's solution.
    pub warm_start: bool,
    pub precond: PreconditionerSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec { tol: 1e-9, maxit: None, warm_start: true, precond: PreconditionerSpec::default() }
    }
}

/// Summary of the coarse partition used by a preconditioner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseInfo {
    pub n_parts: usize,
    pub h_max: f64,
    pub target_met: bool,
}

/// Discretization parameters shared by every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationSpec {
    pub degree: usize,
    pub eta0: f64,
    pub dt: f64,
    pub membrane: MembraneParams,
}

/// Space, matrices and preconditioner of one problem; immutable after build.
pub struct DiscreteProblem {
    space: DgSpace,
    mass: BlockSparseMatrix,
    stiffness: BlockSparseMatrix,
    system: BlockSparseMatrix,
    mass_solver: BlockDiagonalSolver,
    precond: Box<dyn Preconditioner + Send + Sync>,
    coarse: Option<CoarseInfo>,
    spec: DiscretizationSpec,
    solver: SolverSpec,
}

impl core::fmt::Debug for DiscreteProblem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiscreteProblem").field("dim", &self.space.dim()).field("spec", &self.spec).field("solver", &self.solver).finish()
    }
}

impl DiscreteProblem {
    pub fn new(mesh: Arc<PolygonalMesh>, sigma: &ConductivityField, spec: DiscretizationSpec, solver: SolverSpec) -> Result<Self, SetupError> {
        if !(solver.tol > 0.0 && solver.tol < 1.0) {
            return Err(SetupError::Config("solver tolerance must lie in (0, 1)".into()));
        }
        let space = DgSpace::new(mesh, spec.degree)?;
        let mass = assembly::assemble_mass(&space);
        let stiffness = assembly::assemble_stiffness(&space, sigma, spec.eta0)?;
        let system = assembly::build_system_matrix(&mass, &stiffness, spec.membrane.chi_m, spec.membrane.c_m, spec.dt)?;
        let mass_solver = BlockDiagonalSolver::new(&mass).map_err(|(k, source)| SetupError::Subdomain { subdomain: Some(k), source })?;
        let (precond, coarse) = build_preconditioner(&space, &system, &solver.precond)?;
        Ok(DiscreteProblem { space, mass, stiffness, system, mass_solver, precond, coarse, spec, solver })
    }

    pub fn space(&self) -> &DgSpace {
        &self.space
    }

    pub fn mass(&self) -> &BlockSparseMatrix {
        &self.mass
    }

    pub fn stiffness(&self) -> &BlockSparseMatrix {
        &self.stiffness
    }

    pub fn system(&self) -> &BlockSparseMatrix {
        &self.system
    }

    pub fn mass_solver(&self) -> &BlockDiagonalSolver {
        &self.mass_solver
    }

    pub fn preconditioner(&self) -> &(dyn Preconditioner + Send + Sync) {
        self.precond.as_ref()
    }

    pub fn coarse_info(&self) -> Option<CoarseInfo> {
        self.coarse
    }

    pub fn spec(&self) -> &DiscretizationSpec {
        &self.spec
    }

    pub fn solver(&self) -> &SolverSpec {
        &self.solver
    }

    pub fn pcg_options(&self) -> PcgOptions {
        let n = self.space.dim();
        PcgOptions { tol: self.solver.tol, maxit: self.solver.maxit.unwrap_or_else(|| PcgOptions::default_maxit(n)) }
    }

    /// L2 projection of a pointwise field.
    pub fn project(&self, g: impl Fn(Point) -> f64) -> Vec<f64> {
        assembly::l2_project(&self.space, &self.mass_solver, g)
    }

    /// Initial state from a potential field and the model's resting states.
    pub fn initial_state(&self, u0: impl Fn(Point) -> f64, model: &dyn IonicModel) -> TimeStepState {
        let (_, y_rest) = model.resting_state();
        let y = y_rest.iter().map(|&v| self.project(|_| v)).collect();
        TimeStepState { k: 0, t: 0.0, u: self.project(u0), u_prev: None, y, y_prev: None }
    }
}

fn build_preconditioner(space: &DgSpace, k: &BlockSparseMatrix, spec: &PreconditionerSpec) -> Result<(Box<dyn Preconditioner + Send + Sync>, Option<CoarseInfo>), SetupError> {
    let mesh = space.mesh();
    let level_of = |ratio: usize, key: &str| {
        agglomerate::levels_for_ratio(ratio).ok_or_else(|| SetupError::Config(alloc::format!("{key} must be a power of two, got {ratio}")))
    };
    match spec.kind {
        PreconditionerKind::None => Ok((Box::new(IdentityPreconditioner), None)),
        PreconditionerKind::BlockJacobi | PreconditionerKind::TwoLevel => {
            let s_levels = level_of(spec.subdomain_ratio, "precond.subdomain_ratio")?;
            let c_levels = if spec.kind == PreconditionerKind::TwoLevel { level_of(spec.coarse_ratio, "precond.H_ratio")? } else { 0 };
            let hierarchy = agglomerate::coarsening_hierarchy(mesh, s_levels.max(c_levels)).map_err(|e| SetupError::Config(alloc::format!("agglomeration failed: {e}")))?;
            let (embedding, info) = if spec.kind == PreconditionerKind::TwoLevel {
                let part = &hierarchy[c_levels];
                let info = CoarseInfo { n_parts: part.n_parts(), h_max: part.h_max(), target_met: part.target_met() };
                (Some(CoarseEmbedding::new(space, part, spec.q)?), Some(info))
            } else {
                (None, None)
            };
            let p = if s_levels == 0 {
                SchwarzPreconditioner::element_blocks(k, embedding)?
            } else {
                let part: &AgglomeratedPartition = &hierarchy[s_levels];
                SchwarzPreconditioner::new(k, part, embedding)?
            };
            Ok((Box::new(p), info))
        }
    }
}

/// State after `k` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeStepState {
    pub k: usize,
    pub t: f64,
    pub u: Vec<f64>,
    pub u_prev: Option<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub y_prev: Option<Vec<Vec<f64>>>,
}

/// Two-point extrapolation `2 x - x_prev`; `x` itself without a previous value.
pub fn extrapolate(curr: &[f64], prev: Option<&[f64]>) -> Vec<f64> {
    match prev {
        None => curr.to_vec(),
        Some(p) => curr.iter().zip(p).map(|(c, p)| 2.0 * c - p).collect(),
    }
}

/// Solver statistics of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub condition_estimate: Option<f64>,
    /// Quadrature points with far out-of-range ionic states.
    pub ionic_warnings: usize,
}

/// Advances states of one problem with one ionic model.
pub struct Stepper<'a> {
    problem: &'a DiscreteProblem,
    model: &'a dyn IonicModel,
    source: Option<&'a SourceFn>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a DiscreteProblem, model: &'a dyn IonicModel, source: Option<&'a SourceFn>) -> Self {
        Stepper { problem, model, source }
    }

    /// Load vector of the source at time `t`.
    fn source_load(&self, t: f64) -> Option<Vec<f64>> {
        self.source.map(|f| assembly::assemble_load(&self.problem.space, |x| f(x, t)))
    }

    /// One Crank–Nicolson step; the solver report is returned along with the statistics.
    pub fn advance(&self, state: &mut TimeStepState) -> Result<(StepStats, PcgReport), StepError> {
        let pr = self.problem;
        let step = state.k;
        let dt = pr.spec.dt;
        let MembraneParams { chi_m, c_m } = pr.spec.membrane;
        let n = pr.space.dim();
        let ionic_err = |reason| StepError::Ionic { step, reason };

        let u_star = extrapolate(&state.u, state.u_prev.as_deref());
        let y_star: Vec<Vec<f64>> = state
            .y
            .iter()
            .enumerate()
            .map(|(l, y)| extrapolate(y, state.y_prev.as_ref().map(|p| p[l].as_slice())))
            .collect();
        let at_star = ionics::assemble_ionic_terms(&pr.space, &u_star, &y_star, self.model).map_err(ionic_err)?;
        let at_curr = if state.u_prev.is_none() {
            at_star.clone()
        } else {
            ionics::assemble_ionic_terms(&pr.space, &state.u, &state.y, self.model).map_err(ionic_err)?
        };

        let mut mu = vec![0.0; n];
        let mut au = vec![0.0; n];
        pr.mass.matvec(&state.u, &mut mu);
        pr.stiffness.matvec(&state.u, &mut au);
        let mut rhs: Vec<f64> = (0..n).map(|i| chi_m * c_m * mu[i] - 0.5 * dt * au[i] - chi_m * dt * at_star.current[i]).collect();
        let t_next = (step + 1) as f64 * dt;
        if let (Some(f0), Some(f1)) = (self.source_load(state.t), self.source_load(t_next)) {
            for i in 0..n {
                rhs[i] += dt * 0.5 * (f0[i] + f1[i]);
            }
        }

        let mut x = if pr.solver.warm_start { state.u.clone() } else { vec![0.0; n] };
        let report = krylov::pcg_solve(&pr.system, &rhs, pr.precond.as_ref(), pr.pcg_options(), &mut x)
            .map_err(|source| StepError::Solver { step, source })?;
        if !report.converged {
            return Err(StepError::NotConverged { step, residual_history: report.residual_history });
        }

        let mut y_next = state.y.clone();
        for (yl, mut g) in y_next.iter_mut().zip(at_curr.rates) {
            pr.mass_solver.solve_in_place(&mut g);
            for (a, b) in yl.iter_mut().zip(&g) {
                *a -= dt * b;
            }
        }

        state.u_prev = Some(core::mem::replace(&mut state.u, x));
        state.y_prev = Some(core::mem::replace(&mut state.y, y_next));
        state.k += 1;
        state.t = state.k as f64 * dt;
        let stats = StepStats {
            iterations: report.iterations,
            final_residual: report.final_residual(),
            condition_estimate: report.condition_estimate(),
            ionic_warnings: at_star.far_out_of_box,
        };
        Ok((stats, report))
    }

    /// Runs `n_steps` steps, calling `observe` after each one.
    pub fn run(&self, state: &mut TimeStepState, n_steps: usize, mut observe: impl FnMut(&TimeStepState, &StepStats)) -> Result<Vec<StepStats>, StepError> {
        let mut stats = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            let (s, _) = self.advance(state)?;
            observe(state, &s);
            stats.push(s);
        }
        Ok(stats)
    }
}

/// Number of steps covering `[0, t_end]` with step `dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    crate::math::round(t_end / dt) as usize
}

/// Aggregates of per-step statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub avg_iterations: f64,
    pub max_iterations: usize,
    /// Condition estimate of the step with the most iterations (first such step).
    pub cond_at_max: Option<f64>,
    /// Mean of the available per-step condition estimates.
    pub cond_mean: Option<f64>,
}

pub fn summarize(stats: &[StepStats]) -> RunSummary {
    let steps = stats.len();
    let total: usize = stats.iter().map(|s| s.iterations).sum();
    let mut max_i = 0;
    let mut cond_at_max = None;
    for s in stats {
        if s.iterations > max_i {
            max_i = s.iterations;
            cond_at_max = s.condition_estimate;
        }
    }
    let conds: Vec<f64> = stats.iter().filter_map(|s| s.condition_estimate).collect();
    RunSummary {
        steps,
        avg_iterations: if steps == 0 { 0.0 } else { total as f64 / steps as f64 },
        max_iterations: max_i,
        cond_at_max,
        cond_mean: if conds.is_empty() { None } else { Some(conds.iter().sum::<f64>() / conds.len() as f64) },
    }
}

/// Initial potential of the brain-slice experiment: -50 mV inside the disk
/// `(x - 0.5)^2 + (y - 1)^2 < 0.016`, -67 mV elsewhere.
pub fn pathological_region_potential(x: Point) -> f64 {
    let (dx, dy) = (x[0] - 0.5, x[1] - 1.0);
    if dx * dx + dy * dy < 0.016 {
        -50.0
    } else {
        -67.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation() {
        assert_eq!(extrapolate(&[2.0], Some(&[1.0])), vec![3.0]);
        assert_eq!(extrapolate(&[5.0, 5.0], Some(&[5.0, 5.0])), vec![5.0, 5.0]);
        assert_eq!(extrapolate(&[4.0], None), vec![4.0]);
    }

    #[test]
    fn summary_uses_first_max_step() {
        let s = |i, c| StepStats { iterations: i, final_residual: 0.0, condition_estimate: Some(c), ionic_warnings: 0 };
        let r = summarize(&[s(3, 1.0), s(5, 2.0), s(5, 3.0), s(4, 4.0)]);
        assert_eq!(r.max_iterations, 5);
        assert_eq!(r.cond_at_max, Some(2.0));
        assert!((r.avg_iterations - 4.25).abs() < 1e-15);
        assert!((r.cond_mean.unwrap() - 2.5).abs() < 1e-15);
    }
}
