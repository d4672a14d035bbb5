//! Channel around a hollow square: plain multigrid stalls, the Krylov
//! wrapper does not.

use stokes_mg::config::RunConfig;
use stokes_mg::discretization::LevelOperator;
use stokes_mg::krylov::{solve_driver, Method};
use stokes_mg::multigrid::build_hierarchy;
use stokes_mg::scenarios::{ScenarioKind, ScenarioSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(256), |s| s.parse())?;
    let cfg = RunConfig::for_scenario(ScenarioSpec::new(ScenarioKind::HollowSquare2d, &[n, n]));
    let s = cfg.problem()?;
    let l = LevelOperator::new(s.grid.clone(), s.map.clone(), cfg.eta, 0.0);
    let b = s.rhs(cfg.eta)?;
    let h = build_hierarchy(&s.grid, cfg.eta, cfg.gamma, &cfg.cycle_config(&s.grid)?)?;

    for (method, maxit) in [(Method::Mg, 50), (Method::MgSqmr, 100)] {
        let out = solve_driver(method, &l, Some(&h), &b, cfg.tol, maxit)?;
        let best = out.history.records().iter().map(|r| r.rel_residual).fold(f64::INFINITY, f64::min);
        println!(
            "{:>8}: {} after {} iterations, best residual {:.2e}",
            method.name(),
            out.status,
            out.history.iterations(),
            best
        );
    }
    Ok(())
}
