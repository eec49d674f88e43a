use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polydg::config::{kind_name, load_config, MeshSource};
use polydg::inspect::{inspect, MatrixKind};
use polydg::{mesh_io, simulate, study, CliError};

#[derive(Parser)]
#[command(name = "polydg", version, about = "Polytopal DG monodomain solver with two-level Schwarz preconditioning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a clipped Voronoi mesh of the unit square.
    Mesh {
        #[arg(long)]
        cells: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        lloyd: usize,
        /// Cells with centroid y below this are white matter.
        #[arg(long, default_value_t = 0.5)]
        split_y: f64,
    },
    /// Run one simulation.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a scaling study and write study.csv and table.txt.
    Study {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dense spectral summary of an assembled matrix.
    Inspect {
        #[arg(long, value_enum)]
        matrix: MatrixKind,
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Mesh { cells, seed, out, lloyd, split_y } => {
            let mesh = simulate::build_mesh(&MeshSource::Generate { cells, seed, lloyd }, split_y)?;
            mesh_io::write_mesh(&mesh, &out)?;
            println!("wrote {} cells, {} vertices, h = {:.4} to {}", mesh.n_cells(), mesh.n_vertices(), mesh.h(), out.display());
        }
        Command::Run { config } => {
            let cfg = load_config(&config)?.simulation;
            let res = simulate::run_simulation(&cfg, cfg.t_end, |_, _| {})?;
            let s = &res.summary;
            println!("steps              {}", s.steps);
            println!("precond            {}", kind_name(cfg.solver.precond.kind));
            println!("avg PCG iterations {:.2}", s.avg_iterations);
            println!("max PCG iterations {}", s.max_iterations);
            if let Some(c) = s.cond_at_max {
                println!("cond estimate      {c:.3e}");
            }
            let warnings: usize = res.stats.iter().map(|st| st.ionic_warnings).sum();
            if warnings > 0 {
                eprintln!("warning: {warnings} quadrature-point evaluations far outside the ionic model's admissible box");
            }
            println!("setup {:.2} s, time loop {:.2} s", res.setup_s, res.solve_s);
            if !res.snapshots.is_empty() {
                println!("{} snapshot files in {}", res.snapshots.len(), cfg.output.dir.display());
            }
        }
        Command::Study { config, out } => {
            let cfg = load_config(&config)?;
            std::fs::create_dir_all(&out).map_err(|source| CliError::Io { path: out.clone(), source })?;
            let rows = study::run_scaling_study(&cfg)?;
            study::write_csv(&rows, &out.join("study.csv"))?;
            study::write_extra_csv(&rows, &out.join("study_cond_mean.csv"))?;
            let table = study::format_table(&rows);
            std::fs::write(out.join("table.txt"), &table).map_err(|source| CliError::Io { path: out.join("table.txt"), source })?;
            print!("{table}");
            let failed = rows.iter().filter(|r| !r.converged).count();
            if failed > 0 {
                eprintln!("{failed} of {} combinations failed", rows.len());
            }
        }
        Command::Inspect { matrix, config } => {
            let cfg = load_config(&config)?.simulation;
            let s = inspect(&cfg, matrix)?;
            println!("dimension          {}", s.dim);
            println!("nonzero blocks     {}", s.nnz_blocks);
            println!("exactly symmetric  {}", s.symmetric);
            println!("lambda_min         {:.6e}", s.min);
            println!("lambda_2           {:.6e}", s.second);
            println!("lambda_max         {:.6e}", s.max);
            if matrix != MatrixKind::Stiffness {
                println!("condition number   {:.6e}", s.condition());
            } else {
                println!("lambda_max/lambda_2 {:.6e}", s.max / s.second);
            }
        }
    }
    Ok(())
}
