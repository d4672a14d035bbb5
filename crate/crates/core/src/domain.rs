//! Cell-labelled computational domains and degree-of-freedom classification.
//!
//! Cells live on a global integer lattice: local cell `i` along an axis sits at
//! global index `origin + i` and covers `[g h, (g + 1) h]`. Coarsening pairs
//! global cells `2G` and `2G + 1`, which keeps a one-cell boundary halo at
//! global index `-1` aligned across every level of a hierarchy.

use std::fmt::Write as _;

use crate::error::{Result, StokesError};

/// Label of a single grid cell.
///
/// The derived ordering `Exterior < Interior < Dirichlet` is the precedence
/// used by coarsening.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellLabel {
    Exterior,
    Interior,
    Dirichlet,
}

impl CellLabel {
    pub fn to_char(self) -> char {
        match self {
            CellLabel::Dirichlet => 'D',
            CellLabel::Interior => 'I',
            CellLabel::Exterior => 'E',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'D' => Some(CellLabel::Dirichlet),
            'I' => Some(CellLabel::Interior),
            'E' => Some(CellLabel::Exterior),
            _ => None,
        }
    }
}

/// Label of a coarse cell given the labels of its children.
pub fn coarse_label<I: IntoIterator<Item = CellLabel>>(children: I) -> CellLabel {
    children.into_iter().max().unwrap_or(CellLabel::Exterior)
}

/// Uniform 2D or 3D grid of labelled cells. Unused trailing axes have extent 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    dim: usize,
    extents: [usize; 3],
    origin: [i64; 3],
    h: f64,
    labels: Vec<CellLabel>,
}

impl CellGrid {
    pub fn new(dim: usize, extents: &[usize], h: f64, labels: Vec<CellLabel>) -> Result<Self> {
        Self::with_origin(dim, extents, &[0; 3][..dim], h, labels)
    }

    pub fn with_origin(
        dim: usize,
        extents: &[usize],
        origin: &[i64],
        h: f64,
        labels: Vec<CellLabel>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(StokesError::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if extents.len() != dim || origin.len() != dim {
            return Err(StokesError::InvalidGrid("extent/origin arity must equal dimension".into()));
        }
        if extents.iter().any(|&n| n == 0) {
            return Err(StokesError::InvalidGrid("extents must be positive".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(StokesError::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        let mut ext = [1usize; 3];
        let mut org = [0i64; 3];
        ext[..dim].copy_from_slice(extents);
        org[..dim].copy_from_slice(origin);
        let n: usize = ext.iter().product();
        if labels.len() != n {
            return Err(StokesError::InvalidGrid(format!(
                "expected {n} labels, got {}",
                labels.len()
            )));
        }
        Ok(Self { dim, extents: ext, origin: org, h, labels })
    }

    pub fn filled(dim: usize, extents: &[usize], h: f64, label: CellLabel) -> Result<Self> {
        let n = extents.iter().product();
        Self::new(dim, extents, h, vec![label; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis; entries past `dim` are 1.
    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn origin(&self) -> [i64; 3] {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn num_cells(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.extents[0] * (c[1] + self.extents[1] * c[2])
    }

    #[inline]
    pub fn cell_coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.extents[0];
        let ny = self.extents[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn label(&self, c: [usize; 3]) -> CellLabel {
        self.labels[self.cell_index(c)]
    }

    /// Label at signed local coordinates; cells off the grid read as `None`.
    #[inline]
    pub fn label_at(&self, c: [i64; 3]) -> Option<CellLabel> {
        for a in 0..3 {
            if c[a] < 0 || c[a] >= self.extents[a] as i64 {
                return None;
            }
        }
        Some(self.labels[self.cell_index([c[0] as usize, c[1] as usize, c[2] as usize])])
    }

    pub fn set_label(&mut self, c: [usize; 3], label: CellLabel) {
        let i = self.cell_index(c);
        self.labels[i] = label;
    }

    /// Physical centre of a local cell.
    pub fn cell_center(&self, c: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (self.origin[a] + c[a] as i64) as f64 * self.h + 0.5 * self.h;
        }
        x
    }

    /// Halve the resolution. Children that fall outside the grid read as
    /// `Exterior`, which is equivalent to padding with exterior cells.
    pub fn coarsen(&self) -> Result<CellGrid> {
        for a in 0..self.dim {
            if self.extents[a] < 2 {
                return Err(StokesError::InvalidGrid(format!(
                    "cannot coarsen extent {} along axis {a}",
                    self.extents[a]
                )));
            }
        }
        let mut corg = [0i64; 3];
        let mut cext = [1usize; 3];
        for a in 0..self.dim {
            let lo = self.origin[a].div_euclid(2);
            let hi = (self.origin[a] + self.extents[a] as i64 - 1).div_euclid(2);
            corg[a] = lo;
            cext[a] = (hi - lo + 1) as usize;
        }
        let mut labels = Vec::with_capacity(cext.iter().product());
        let zr = if self.dim == 3 { 0..2 } else { 0..1 };
        for k in 0..cext[2] {
            for j in 0..cext[1] {
                for i in 0..cext[0] {
                    let coarse = [i, j, k];
                    let mut lab = CellLabel::Exterior;
                    for dz in zr.clone() {
                        for dy in 0..2 {
                            for dx in 0..2 {
                                let d = [dx, dy, dz];
                                let mut fine = [0i64; 3];
                                for a in 0..3 {
                                    fine[a] = if a < self.dim {
                                        2 * (corg[a] + coarse[a] as i64) + d[a] - self.origin[a]
                                    } else {
                                        0
                                    };
                                }
                                if let Some(l) = self.label_at(fine) {
                                    lab = lab.max(l);
                                }
                            }
                        }
                    }
                    labels.push(lab);
                }
            }
        }
        CellGrid::with_origin(
            self.dim,
            &cext[..self.dim],
            &corg[..self.dim],
            2.0 * self.h,
            labels,
        )
    }

    /// Plain-text domain format: a header `dim nx ny [nz] h`, then one
    /// `D`/`I`/`E` character per cell, x fastest, one line per row.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        write!(s, "{}", self.dim).unwrap();
        for a in 0..self.dim {
            write!(s, " {}", self.extents[a]).unwrap();
        }
        writeln!(s, " {:e}", self.h).unwrap();
        for row in self.labels.chunks(self.extents[0]) {
            s.extend(row.iter().map(|l| l.to_char()));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CellGrid> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| StokesError::Parse("empty domain file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let dim: usize = fields
            .first()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| StokesError::Parse("bad dimension in header".into()))?;
        if (dim != 2 && dim != 3) || fields.len() != dim + 2 {
            return Err(StokesError::Parse(format!("malformed header `{header}`")));
        }
        let extents: Vec<usize> = fields[1..=dim]
            .iter()
            .map(|f| f.parse().map_err(|_| StokesError::Parse(format!("bad extent `{f}`"))))
            .collect::<Result<_>>()?;
        let h: f64 = fields[dim + 1]
            .parse()
            .map_err(|_| StokesError::Parse(format!("bad spacing `{}`", fields[dim + 1])))?;
        let mut labels = Vec::with_capacity(extents.iter().product());
        for line in lines {
            for c in line.chars().filter(|c| !c.is_whitespace()) {
                labels.push(
                    CellLabel::from_char(c)
                        .ok_or_else(|| StokesError::Parse(format!("unknown cell label `{c}`")))?,
                );
            }
        }
        CellGrid::new(dim, &extents, h, labels)
    }
}

/// Status of a single velocity face or pressure cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofStatus {
    Active(usize),
    Dirichlet,
    Inactive,
}

impl DofStatus {
    #[inline]
    pub fn active(self) -> Option<usize> {
        match self {
            DofStatus::Active(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DofKind {
    /// Face-normal velocity component along the given axis.
    Velocity(usize),
    Pressure,
}

/// Where an active unknown lives: face index (velocity) or cell index (pressure)
/// in local lattice coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DofLocation {
    pub kind: DofKind,
    pub pos: [usize; 3],
}

/// Classification and numbering of all velocity faces and pressure cells.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    dim: usize,
    extents: [usize; 3],
    origin: [i64; 3],
    face_dims: [[usize; 3]; 3],
    face_status: [Vec<DofStatus>; 3],
    cell_status: Vec<DofStatus>,
    locations: Vec<DofLocation>,
    velocity_counts: [usize; 3],
    pressure_count: usize,
    band_cells: Vec<bool>,
    band: Vec<bool>,
}

#[inline]
fn face_is_active(lo: Option<CellLabel>, hi: Option<CellLabel>) -> DofStatus {
    use CellLabel::*;
    let lo = lo.unwrap_or(Exterior);
    let hi = hi.unwrap_or(Exterior);
    match (lo, hi) {
        (Dirichlet, _) | (_, Dirichlet) => DofStatus::Dirichlet,
        (Interior, Interior) | (Interior, Exterior) | (Exterior, Interior) => DofStatus::Active(0),
        _ => DofStatus::Inactive,
    }
}

/// Classify every face and cell of `grid` and number the active unknowns:
/// velocity faces per component in lexicographic order, components in axis
/// order, then pressures.
///
/// A face between an interior and an exterior cell carries an active velocity
/// with a traction-free (natural) condition; the exterior pressure is zero.
pub fn classify_dofs(grid: &CellGrid) -> DofMap {
    let dim = grid.dim;
    let ext = grid.extents;
    let mut face_dims = [[0usize; 3]; 3];
    let mut face_status: [Vec<DofStatus>; 3] = Default::default();
    let mut locations = Vec::new();
    let mut velocity_counts = [0usize; 3];
    let mut next = 0usize;

    for a in 0..dim {
        let mut fd = ext;
        fd[a] += 1;
        face_dims[a] = fd;
        let mut status = Vec::with_capacity(fd.iter().product());
        for k in 0..fd[2] {
            for j in 0..fd[1] {
                for i in 0..fd[0] {
                    let hi = [i as i64, j as i64, k as i64];
                    let mut lo = hi;
                    lo[a] -= 1;
                    let s = match face_is_active(grid.label_at(lo), grid.label_at(hi)) {
                        DofStatus::Active(_) => {
                            locations.push(DofLocation { kind: DofKind::Velocity(a), pos: [i, j, k] });
                            next += 1;
                            velocity_counts[a] += 1;
                            DofStatus::Active(next - 1)
                        }
                        other => other,
                    };
                    status.push(s);
                }
            }
        }
        face_status[a] = status;
    }

    let mut cell_status = Vec::with_capacity(grid.num_cells());
    let mut pressure_count = 0;
    for (idx, &l) in grid.labels.iter().enumerate() {
        if l == CellLabel::Interior {
            locations.push(DofLocation { kind: DofKind::Pressure, pos: grid.cell_coords(idx) });
            cell_status.push(DofStatus::Active(next));
            next += 1;
            pressure_count += 1;
        } else {
            cell_status.push(DofStatus::Inactive);
        }
    }

    DofMap {
        dim,
        extents: ext,
        origin: grid.origin,
        face_dims,
        face_status,
        cell_status,
        band_cells: vec![false; grid.num_cells()],
        band: vec![false; locations.len()],
        locations,
        velocity_counts,
        pressure_count,
    }
}

/// Split the active unknowns into a boundary band `V1` and interior set `V2`.
///
/// An interior cell is a band cell when any cell within Chebyshev distance
/// `width` is Dirichlet or exterior, or any exterior cell
/// lies within `width + 1`. The extra layer next to exterior cells reflects
/// that the interior/exterior faces are themselves unknowns with non-standard
/// rows. Every active unknown on a band cell (its pressure and faces) is in
/// `V1`.
pub fn partition_band(grid: &CellGrid, map: &DofMap, width: usize) -> DofMap {
    let mut out = map.clone();
    out.band_cells = band_cells(grid, width);
    out.band = vec![false; out.len()];
    for (idx, &is_band) in out.band_cells.iter().enumerate() {
        if !is_band {
            continue;
        }
        let c = grid.cell_coords(idx);
        if let Some(p) = out.cell_status[idx].active() {
            out.band[p] = true;
        }
        for a in 0..out.dim {
            for s in 0..2 {
                let mut f = c;
                f[a] += s;
                if let Some(v) = out.face_status(a, f).active() {
                    out.band[v] = true;
                }
            }
        }
    }
    out
}

fn band_cells(grid: &CellGrid, width: usize) -> Vec<bool> {
    let dim = grid.dim;
    let w = width as i64;
    let we = w + 1;
    let rz = if dim == 3 { -we..=we } else { 0..=0 };
    let mut out = vec![false; grid.num_cells()];
    for (idx, o) in out.iter_mut().enumerate() {
        if grid.labels[idx] != CellLabel::Interior {
            continue;
        }
        let c = grid.cell_coords(idx);
        let c = [c[0] as i64, c[1] as i64, c[2] as i64];
        'search: for dz in rz.clone() {
            for dy in -we..=we {
                for dx in -we..=we {
                    let cheb = dx.abs().max(dy.abs()).max(dz.abs());
                    let n = [c[0] + dx, c[1] + dy, c[2] + dz];
                    match grid.label_at(n) {
                        Some(CellLabel::Interior) | None => {}
                        Some(CellLabel::Exterior) => {
                            *o = true;
                            break 'search;
                        }
                        Some(CellLabel::Dirichlet) => {
                            if cheb <= w {
                                *o = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

impl DofMap {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn origin(&self) -> [i64; 3] {
        self.origin
    }

    /// Total number of active unknowns.
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn velocity_count(&self, axis: usize) -> usize {
        self.velocity_counts[axis]
    }

    pub fn pressure_count(&self) -> usize {
        self.pressure_count
    }

    pub fn velocity_len(&self) -> usize {
        self.velocity_counts.iter().sum()
    }

    pub fn velocity_range(&self, axis: usize) -> std::ops::Range<usize> {
        let start: usize = self.velocity_counts[..axis].iter().sum();
        start..start + self.velocity_counts[axis]
    }

    pub fn pressure_range(&self) -> std::ops::Range<usize> {
        let v = self.velocity_len();
        v..v + self.pressure_count
    }

    pub fn location(&self, dof: usize) -> DofLocation {
        self.locations[dof]
    }

    pub fn face_dims(&self, axis: usize) -> [usize; 3] {
        self.face_dims[axis]
    }

    #[inline]
    pub fn face_index(&self, axis: usize, f: [usize; 3]) -> usize {
        let d = self.face_dims[axis];
        f[0] + d[0] * (f[1] + d[1] * f[2])
    }

    pub fn face_coords(&self, axis: usize, idx: usize) -> [usize; 3] {
        let d = self.face_dims[axis];
        [idx % d[0], (idx / d[0]) % d[1], idx / (d[0] * d[1])]
    }

    #[inline]
    pub fn face_status(&self, axis: usize, f: [usize; 3]) -> DofStatus {
        self.face_status[axis][self.face_index(axis, f)]
    }

    /// Face status at signed local coordinates; faces off the lattice are inactive.
    #[inline]
    pub fn face_status_at(&self, axis: usize, f: [i64; 3]) -> DofStatus {
        let d = self.face_dims[axis];
        for a in 0..3 {
            if f[a] < 0 || f[a] >= d[a] as i64 {
                return DofStatus::Inactive;
            }
        }
        self.face_status(axis, [f[0] as usize, f[1] as usize, f[2] as usize])
    }

    pub fn face_statuses(&self, axis: usize) -> &[DofStatus] {
        &self.face_status[axis]
    }

    #[inline]
    pub fn cell_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.extents[0] * (c[1] + self.extents[1] * c[2])
    }

    #[inline]
    pub fn cell_status(&self, c: [usize; 3]) -> DofStatus {
        self.cell_status[self.cell_index(c)]
    }

    #[inline]
    pub fn cell_status_at(&self, c: [i64; 3]) -> DofStatus {
        for a in 0..3 {
            if c[a] < 0 || c[a] >= self.extents[a] as i64 {
                return DofStatus::Inactive;
            }
        }
        self.cell_status([c[0] as usize, c[1] as usize, c[2] as usize])
    }

    pub fn cell_statuses(&self) -> &[DofStatus] {
        &self.cell_status
    }

    /// `true` for unknowns in the boundary band `V1`.
    pub fn band_mask(&self) -> &[bool] {
        &self.band
    }

    pub fn band_cells(&self) -> &[bool] {
        &self.band_cells
    }

    /// Ascending indices of `V1`.
    pub fn band_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.band[i]).collect()
    }

    /// Ascending indices of `V2`.
    pub fn interior_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.band[i]).collect()
    }

    pub fn band_len(&self) -> usize {
        self.band.iter().filter(|&&b| b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CellLabel::*;

    fn ringed(n: usize) -> CellGrid {
        let e = n + 2;
        let mut labels = vec![Interior; e * e];
        for j in 0..e {
            for i in 0..e {
                if i == 0 || j == 0 || i == e - 1 || j == e - 1 {
                    labels[i + e * j] = Dirichlet;
                }
            }
        }
        CellGrid::with_origin(2, &[e, e], &[-1, -1], 1.0 / n as f64, labels).unwrap()
    }

    #[test]
    fn three_by_three_cavity_counts() {
        let map = classify_dofs(&ringed(3));
        assert_eq!(map.pressure_count(), 9);
        assert_eq!(map.velocity_count(0), 6);
        assert_eq!(map.velocity_count(1), 6);
        assert_eq!(map.len(), 21);
    }

    #[test]
    fn all_exterior_has_no_unknowns() {
        let g = CellGrid::filled(2, &[5, 4], 0.1, Exterior).unwrap();
        let map = classify_dofs(&g);
        assert!(map.is_empty());
        assert_eq!(partition_band(&g, &map, 1).band_len(), 0);
    }

    #[test]
    fn coarse_label_precedence() {
        assert_eq!(coarse_label([Exterior; 4]), Exterior);
        assert_eq!(coarse_label([Interior, Interior, Interior, Dirichlet]), Dirichlet);
        assert_eq!(coarse_label([Interior, Exterior, Exterior, Exterior]), Interior);
    }

    #[test]
    fn coarsen_plain_two_by_two() {
        let g = CellGrid::new(2, &[2, 2], 0.5, vec![Interior, Interior, Interior, Dirichlet]).unwrap();
        let c = g.coarsen().unwrap();
        assert_eq!(c.extents(), [1, 1, 1]);
        assert_eq!(c.labels(), &[Dirichlet]);
        assert_eq!(c.h(), 1.0);
    }

    #[test]
    fn coarsen_rejects_unit_extent() {
        let g = CellGrid::filled(2, &[1, 4], 1.0, Interior).unwrap();
        assert!(g.coarsen().is_err());
    }

    #[test]
    fn coarsen_keeps_halo_aligned() {
        let g = ringed(8).coarsen().unwrap();
        assert_eq!(g.extents(), [6, 6, 1]);
        assert_eq!(g.origin(), [-1, -1, 0]);
        let map = classify_dofs(&g);
        assert_eq!(map.pressure_count(), 16);
    }

    #[test]
    fn interior_exterior_face_is_active() {
        let g = CellGrid::new(2, &[2, 1], 1.0, vec![Interior, Exterior]).unwrap();
        let map = classify_dofs(&g);
        assert!(matches!(map.face_status(0, [1, 0, 0]), DofStatus::Active(_)));
        assert_eq!(map.face_status(0, [2, 0, 0]), DofStatus::Inactive);
    }

    #[test]
    fn fully_interior_grid_has_empty_band() {
        let g = CellGrid::filled(2, &[5, 5], 1.0, Interior).unwrap();
        let map = partition_band(&g, &classify_dofs(&g), 1);
        assert_eq!(map.band_len(), 0);
        assert_eq!(map.interior_set().len(), map.len());
    }

    #[test]
    fn cavity_band_is_outer_ring() {
        let g = ringed(6);
        let map = partition_band(&g, &classify_dofs(&g), 1);
        // 20 ring pressures plus 2 * (2 * 5 + 4 * 2) faces
        assert_eq!(map.band_len(), 20 + 2 * (10 + 8));
    }

    #[test]
    fn text_round_trip() {
        let g = CellGrid::new(2, &[3, 2], 0.25, vec![Dirichlet, Interior, Exterior, Interior, Interior, Dirichlet])
            .unwrap();
        let back = CellGrid::from_text(&g.to_text()).unwrap();
        assert_eq!(back.labels(), g.labels());
        assert_eq!(back.h(), g.h());
        assert!(CellGrid::from_text("2 2 2 1.0\nDX\nII\n").is_err());
    }
}
