use polydg_core::krylov::DENSE_ORACLE_LIMIT;
use polydg_core::linalg::{symmetric_eigenvalues, BlockSparseMatrix};

use crate::config::SimulationConfig;
use crate::error::CliError;
use crate::simulate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MatrixKind {
    Mass,
    Stiffness,
    System,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    pub dim: usize,
    pub nnz_blocks: usize,
    pub symmetric: bool,
    pub min: f64,
    /// Second-smallest eigenvalue; the smallest of the stiffness matrix is zero.
    pub second: f64,
    pub max: f64,
}

impl SpectralSummary {
    pub fn condition(&self) -> f64 {
        self.max / self.min
    }
}

pub fn spectral_summary(m: &BlockSparseMatrix) -> Result<SpectralSummary, CliError> {
    if m.dim() > DENSE_ORACLE_LIMIT {
        return Err(CliError::Config(format!("matrix dimension {} exceeds the dense limit {DENSE_ORACLE_LIMIT}; use a smaller mesh", m.dim())));
    }
    let ev = symmetric_eigenvalues(&m.to_dense());
    Ok(SpectralSummary {
        dim: m.dim(),
        nnz_blocks: m.nnz_blocks(),
        symmetric: m.is_symmetric_exact(),
        min: ev[0],
        second: ev.get(1).copied().unwrap_or(ev[0]),
        max: *ev.last().unwrap(),
    })
}

pub fn inspect(cfg: &SimulationConfig, which: MatrixKind) -> Result<SpectralSummary, CliError> {
    let mesh = simulate::build_mesh(cfg.mesh_source()?, cfg.split_y)?;
    let problem = simulate::build_problem(cfg, mesh)?;
    let m = match which {
        MatrixKind::Mass => problem.mass(),
        MatrixKind::Stiffness => problem.stiffness(),
        MatrixKind::System => problem.system(),
    };
    spectral_summary(m)
}
