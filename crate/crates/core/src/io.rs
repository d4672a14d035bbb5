//! Field output (legacy VTK), run summaries, and the DOF census.

use std::io::Write;

use crate::discretization::BoundaryData;
use crate::domain::{partition_band, CellGrid, DofMap, DofStatus};

/// Total unknowns and boundary-band unknowns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Census {
    pub total: usize,
    pub boundary: usize,
}

impl Census {
    pub fn percentage(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.boundary as f64 / self.total as f64
        }
    }
}

impl std::fmt::Display for Census {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {:.2}%", self.total, self.boundary, self.percentage())
    }
}

pub fn census(grid: &CellGrid, map: &DofMap, band_width: usize) -> Census {
    let banded = partition_band(grid, map, band_width);
    Census { total: banded.len(), boundary: banded.band_len() }
}

/// Face value for output: the unknown, the prescribed value, or zero.
fn face_value(map: &DofMap, bc: &BoundaryData, x: &[f64], axis: usize, f: [usize; 3]) -> f64 {
    match map.face_status(axis, f) {
        DofStatus::Active(k) => x[k],
        DofStatus::Dirichlet => bc.face_value(map, axis, f),
        DofStatus::Inactive => 0.0,
    }
}

/// Pressure and face-averaged velocity per cell; zero outside the fluid.
pub fn cell_fields(map: &DofMap, bc: &BoundaryData, x: &[f64]) -> (Vec<f64>, Vec<[f64; 3]>) {
    let ext = map.extents();
    let n = ext[0] * ext[1] * ext[2];
    let mut p = vec![0.0; n];
    let mut u = vec![[0.0; 3]; n];
    for k in 0..ext[2] {
        for j in 0..ext[1] {
            for i in 0..ext[0] {
                let c = [i, j, k];
                let idx = map.cell_index(c);
                let DofStatus::Active(pj) = map.cell_status(c) else { continue };
                p[idx] = x[pj];
                for a in 0..map.dim() {
                    let mut hi = c;
                    hi[a] += 1;
                    u[idx][a] = 0.5 * (face_value(map, bc, x, a, c) + face_value(map, bc, x, a, hi));
                }
            }
        }
    }
    (p, u)
}

/// Legacy ASCII VTK, STRUCTURED_POINTS with pressure and velocity as cell data.
pub fn write_vtk<W: Write>(
    mut w: W,
    grid: &CellGrid,
    map: &DofMap,
    bc: &BoundaryData,
    x: &[f64],
) -> std::io::Result<()> {
    let ext = grid.extents();
    let org = grid.origin();
    let h = grid.h();
    let dim = grid.dim();
    let (p, u) = cell_fields(map, bc, x);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "stokes fields")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    let pts: Vec<usize> = (0..3).map(|a| if a < dim { ext[a] + 1 } else { 1 }).collect();
    writeln!(w, "DIMENSIONS {} {} {}", pts[0], pts[1], pts[2])?;
    let o: Vec<f64> = (0..3).map(|a| if a < dim { org[a] as f64 * h } else { 0.0 }).collect();
    writeln!(w, "ORIGIN {} {} {}", o[0], o[1], o[2])?;
    writeln!(w, "SPACING {h} {h} {h}")?;
    writeln!(w, "CELL_DATA {}", p.len())?;
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in &p {
        writeln!(w, "{v:.9e}")?;
    }
    writeln!(w, "VECTORS velocity double")?;
    for v in &u {
        writeln!(w, "{:.9e} {:.9e} {:.9e}", v[0], v[1], v[2])?;
    }
    Ok(())
}

/// `key=value` lines in the given order.
pub fn write_summary<W: Write>(mut w: W, entries: &[(&str, String)]) -> std::io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{classify_dofs, CellLabel};

    #[test]
    fn empty_census_prints_zero() {
        let g = CellGrid::filled(2, &[4, 4], 1.0, CellLabel::Exterior).unwrap();
        let m = classify_dofs(&g);
        assert_eq!(census(&g, &m, 1).to_string(), "0 0 0.00%");
    }

    #[test]
    fn vtk_header_and_counts() {
        let g = CellGrid::filled(2, &[3, 2], 0.5, CellLabel::Interior).unwrap();
        let m = classify_dofs(&g);
        let bc = BoundaryData::zeros(&m);
        let x = vec![1.0; m.len()];
        let mut out = Vec::new();
        write_vtk(&mut out, &g, &m, &bc, &x).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(s.contains("DIMENSIONS 4 3 1"));
        assert!(s.contains("CELL_DATA 6"));
        let vectors = s.lines().skip_while(|l| !l.starts_with("VECTORS")).skip(1);
        assert_eq!(vectors.count(), 6);
    }
}
