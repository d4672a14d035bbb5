//! Solves the 220x41 cylinder channel and writes history, summary and a
//! legacy VTK file to the given directory (default `cylinder_out`).

use std::path::PathBuf;

use stokes_mg::cli::execute;
use stokes_mg::config::RunConfig;
use stokes_mg::scenarios::ScenarioSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "cylinder_out".into()));
    let mut cfg = RunConfig::for_scenario(ScenarioSpec::cylinder2d(220, 41));
    cfg.emit.vtk = true;
    let r = execute(&cfg, Some(&dir))?;
    println!("{} in {} iterations; files in {}", r.status, r.iterations, r.output_dir.display());
    for e in std::fs::read_dir(&dir)? {
        println!("  {}", e?.file_name().to_string_lossy());
    }
    Ok(())
}
