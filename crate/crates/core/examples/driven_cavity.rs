//! Lid-driven cavity solved with MG-preconditioned SQMR.
//!
//! cargo run --release --example driven_cavity -- 256

use stokes_mg::config::{auto_levels, RunConfig};
use stokes_mg::discretization::LevelOperator;
use stokes_mg::krylov::{solve_driver, Method};
use stokes_mg::multigrid::build_hierarchy;
use stokes_mg::scenarios::ScenarioSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(128), |s| s.parse())?;
    let cfg = RunConfig::for_scenario(ScenarioSpec::cavity2d(n));
    let s = cfg.problem()?;
    let l = LevelOperator::new(s.grid.clone(), s.map.clone(), cfg.eta, 0.0);
    let b = s.rhs(cfg.eta)?;
    let levels = auto_levels(&s.grid)?;
    let h = build_hierarchy(&s.grid, cfg.eta, cfg.gamma, &cfg.cycle_config(&s.grid)?)?;
    println!("{n}x{n} cavity: {} unknowns, {levels} levels", l.len());

    for method in [Method::MgSqmr, Method::Mg] {
        let out = solve_driver(method, &l, Some(&h), &b, cfg.tol, cfg.max_iterations)?;
        println!(
            "{:>8}: {} after {} iterations, residual {:.2e}, max |div u| {:.2e}",
            method.name(),
            out.status,
            out.history.iterations(),
            out.history.final_residual(),
            l.divergence_defect(&b, &out.x)
        );
    }
    Ok(())
}
