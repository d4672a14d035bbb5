//! `solver` command line: `run`, `census`, `verify`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::discretization::LevelOperator;
use crate::error::Result;
use crate::io::{census, write_summary, write_vtk};
use crate::krylov::{solve_driver, Method, SolveStatus};
use crate::multigrid::build_hierarchy;
use crate::verify::{run_suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "solver", about = "Multigrid-preconditioned SQMR Stokes solver on a MAC grid")]
pub struct Cli {
    /// Worker threads for colored Vanka, additive blocks and materialization (1 = bit-reproducible).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the configured problem and write history, summary and fields.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` and the SOLVER_OUTPUT_DIR environment variable.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print total unknowns, boundary-band unknowns and their percentage.
    Census { config: PathBuf },
    /// Run the symmetry and structure checks.
    Verify {
        /// Largest cavity resolution included.
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        /// Skip the reverse DGS sweep (deliberately breaks symmetry).
        #[arg(long)]
        skip_reverse_dgs: bool,
    },
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Run { config, output_dir } => cmd_run(&config, output_dir.as_deref(), &mut out),
        Command::Census { config } => cmd_census(&config, &mut out),
        Command::Verify { max_n, skip_reverse_dgs } => cmd_verify(max_n, skip_reverse_dgs, &mut out),
    }
}

fn report_error(e: &crate::error::StokesError) -> i32 {
    eprintln!("error: {e}");
    EXIT_USAGE
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub status: SolveStatus,
    pub iterations: usize,
    pub final_residual: f64,
    pub divergence_inf: f64,
    pub output_dir: PathBuf,
}

/// Builds and solves the configured problem, writing the requested files.
pub fn execute(cfg: &RunConfig, output_dir: Option<&Path>) -> Result<RunReport> {
    let start = Instant::now();
    let problem = cfg.problem()?;
    let dir = cfg.resolve_output_dir(output_dir);
    std::fs::create_dir_all(&dir)?;

    let l = LevelOperator::new(problem.grid.clone(), problem.map.clone(), cfg.eta, 0.0);
    let b = problem.rhs(cfg.eta)?;
    let (hierarchy, levels) = if cfg.method == Method::Sqmr {
        (None, 0)
    } else {
        let cc = cfg.cycle_config(&problem.grid)?;
        (Some(build_hierarchy(&problem.grid, cfg.eta, cfg.gamma, &cc)?), cc.levels)
    };
    let outcome = solve_driver(cfg.method, &l, hierarchy.as_ref(), &b, cfg.tol, cfg.max_iterations)?;
    let divergence = l.divergence_defect(&b, &outcome.x);

    if cfg.emit.csv {
        let mut hist = outcome.history.clone();
        if !cfg.emit.timings {
            let mut h = crate::krylov::History::default();
            for r in hist.records() {
                h.push(r.iteration, r.rel_residual, 0.0);
            }
            hist = h;
        }
        let f = File::create(dir.join(format!("history_{}.csv", cfg.method.name())))?;
        hist.write_csv(BufWriter::new(f))?;
    }
    if cfg.emit.vtk {
        let f = File::create(dir.join("fields.vtk"))?;
        write_vtk(BufWriter::new(f), &problem.grid, &problem.map, &problem.bc, &outcome.x)?;
    }
    if cfg.emit.matrix {
        let a = l.assemble_dense()?;
        a.write_matrix_market(BufWriter::new(File::create(dir.join("operator.mtx"))?))?;
    }
    let c = census(&problem.grid, &problem.map, cfg.band_width);
    let name = problem.spec.as_ref().map_or("domain_file", |s| s.name.name());
    let entries = [
        ("scenario", name.to_string()),
        ("method", cfg.method.name().to_string()),
        ("status", outcome.status.to_string()),
        ("iterations", outcome.history.iterations().to_string()),
        ("final_residual", format!("{:.6e}", outcome.history.final_residual())),
        ("divergence_inf", format!("{divergence:.6e}")),
        ("rhs_norm", format!("{:.6e}", crate::linalg::norm2(&b))),
        ("dofs", c.total.to_string()),
        ("boundary_dofs", c.boundary.to_string()),
        ("levels", levels.to_string()),
        ("wall_seconds", format!("{:.3}", start.elapsed().as_secs_f64())),
    ];
    write_summary(BufWriter::new(File::create(dir.join("summary.txt"))?), &entries)?;
    Ok(RunReport {
        status: outcome.status,
        iterations: outcome.history.iterations(),
        final_residual: outcome.history.final_residual(),
        divergence_inf: divergence,
        output_dir: dir,
    })
}

pub fn cmd_run(config: &Path, output_dir: Option<&Path>, out: &mut dyn Write) -> i32 {
    let cfg = match RunConfig::from_path(config) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    match execute(&cfg, output_dir) {
        Ok(r) => {
            let _ = writeln!(
                out,
                "{} after {} iterations, relative residual {:.3e}, |Bu - b_p|_inf {:.3e}, output in {}",
                r.status,
                r.iterations,
                r.final_residual,
                r.divergence_inf,
                r.output_dir.display()
            );
            if r.status == SolveStatus::Converged {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            }
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_census(config: &Path, out: &mut dyn Write) -> i32 {
    let run = || -> Result<String> {
        let cfg = RunConfig::from_path(config)?;
        let p = cfg.problem()?;
        Ok(census(&p.grid, &p.map, cfg.band_width).to_string())
    };
    match run() {
        Ok(line) => {
            let _ = writeln!(out, "{line}");
            EXIT_OK
        }
        Err(e) => report_error(&e),
    }
}

pub fn cmd_verify(max_n: usize, skip_reverse_dgs: bool, out: &mut dyn Write) -> i32 {
    let opts = VerifyOptions { max_n, skip_reverse_dgs, ..Default::default() };
    match run_suite(&opts) {
        Ok(results) => {
            let mut failed = 0;
            for r in &results {
                let _ = writeln!(out, "{r}");
                failed += usize::from(!r.passed());
            }
            let _ = writeln!(out, "{} checks, {} failed", results.len(), failed);
            if failed == 0 && !results.is_empty() {
                EXIT_OK
            } else {
                EXIT_USAGE
            }
        }
        Err(e) => report_error(&e),
    }
}
