//! 3D cavity: iteration counts for V- and W-cycles and each boundary smoother.

use stokes_mg::config::RunConfig;
use stokes_mg::discretization::LevelOperator;
use stokes_mg::krylov::sqmr_solve;
use stokes_mg::multigrid::{build_hierarchy, CycleKind};
use stokes_mg::scenarios::ScenarioSpec;
use stokes_mg::smoothers::BoundarySmoother;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(32), |s| s.parse())?;
    let mut cfg = RunConfig::for_scenario(ScenarioSpec::cavity3d(n));
    cfg.levels = Some(3);
    let s = cfg.problem()?;
    let l = LevelOperator::new(s.grid.clone(), s.map.clone(), cfg.eta, 0.0);
    let b = s.rhs(cfg.eta)?;
    println!("{n}^3 cavity, {} unknowns", l.len());
    for kind in [BoundarySmoother::Multiplicative, BoundarySmoother::Additive] {
        for cycle in [CycleKind::V, CycleKind::W] {
            cfg.boundary_smoother = kind;
            cfg.cycle = cycle;
            if kind == BoundarySmoother::Additive {
                cfg.omega = 0.7;
            }
            let t = std::time::Instant::now();
            let h = build_hierarchy(&s.grid, cfg.eta, cfg.gamma, &cfg.cycle_config(&s.grid)?)?;
            let out = sqmr_solve(&l, &h, &b, cfg.tol, cfg.max_iterations)?;
            println!(
                "{kind:?} {cycle:?}: {} after {} iterations ({:.1} s)",
                out.status,
                out.history.iterations(),
                t.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
