//! Materializes smoothers and cycles on small cavities and prints their
//! symmetry defects. Pass `--broken` to drop the reverse DGS sweep.

use stokes_mg::verify::{run_suite, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let broken = std::env::args().any(|a| a == "--broken");
    let opts = VerifyOptions { max_n: 12, skip_reverse_dgs: broken, ..Default::default() };
    let results = run_suite(&opts)?;
    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("{failed} of {} checks failed", results.len());
    Ok(())
}
