//! Prints the prolongation stencil of a single coarse unknown of each kind
//! on a small all-fluid patch, plus the restriction scale.

use stokes_mg::domain::{classify_dofs, partition_band, CellGrid, CellLabel};
use stokes_mg::transfer::TransferPair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fine = CellGrid::filled(2, &[8, 8], 1.0 / 8.0, CellLabel::Interior)?;
    let coarse = fine.coarsen()?;
    let fm = partition_band(&fine, &classify_dofs(&fine), 1);
    let cm = partition_band(&coarse, &classify_dofs(&coarse), 1);
    let t = TransferPair::new(&fm, &cm);

    let probes = [("u", cm.velocity_range(0).start + 5), ("v", cm.velocity_range(1).start + 5), ("p", cm.pressure_range().start + 5)];
    for (name, j) in probes {
        let mut e = vec![0.0; cm.len()];
        e[j] = 1.0;
        let col = t.prolong(&e)?;
        let nz: Vec<String> = col
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| format!("{:?}:{v}", fm.location(i).pos))
            .collect();
        println!("{name} at {:?} -> {}", cm.location(j).pos, nz.join(" "));
    }
    println!("scale c = {}", t.scale());
    Ok(())
}
