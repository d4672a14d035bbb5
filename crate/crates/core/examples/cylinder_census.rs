//! Boundary-band census for the cylinder channel at several resolutions.

use stokes_mg::io::census;
use stokes_mg::scenarios::{build, ScenarioSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>10} {:>10} {:>8} {:>7}", "grid", "total", "band", "share");
    for k in [1usize, 2, 4, 10] {
        let s = build(&ScenarioSpec::cylinder2d(220 * k, 41 * k))?;
        let c = census(&s.grid, &s.map, 1);
        println!("{:>10} {:>10} {:>8} {:>6.2}%", format!("{}x{}", 220 * k, 41 * k), c.total, c.boundary, c.percentage());
    }
    Ok(())
}
