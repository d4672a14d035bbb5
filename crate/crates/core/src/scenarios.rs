//! Benchmark domains: driven cavities, channels with obstacles, branchers and
//! a porous slab, in 2D and 3D.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discretization::{assemble_rhs, BoundaryData};
use crate::domain::{classify_dofs, CellGrid, CellLabel, DofMap, DofStatus};
use crate::error::{Result, StokesError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Cavity2d,
    Cavity3d,
    Cylinder2d,
    Cylinder3d,
    HollowSquare2d,
    Brancher2d,
    Brancher3d,
    Porous3d,
}

impl ScenarioKind {
    pub fn dim(self) -> usize {
        match self {
            ScenarioKind::Cavity2d | ScenarioKind::Cylinder2d | ScenarioKind::HollowSquare2d | ScenarioKind::Brancher2d => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Cavity2d => "cavity2d",
            ScenarioKind::Cavity3d => "cavity3d",
            ScenarioKind::Cylinder2d => "cylinder2d",
            ScenarioKind::Cylinder3d => "cylinder3d",
            ScenarioKind::HollowSquare2d => "hollow_square2d",
            ScenarioKind::Brancher2d => "brancher2d",
            ScenarioKind::Brancher3d => "brancher3d",
            ScenarioKind::Porous3d => "porous3d",
        }
    }

    fn is_cavity(self) -> bool {
        matches!(self, ScenarioKind::Cavity2d | ScenarioKind::Cavity3d)
    }

    fn default_size(self) -> [f64; 3] {
        match self {
            ScenarioKind::Cylinder2d => [2.2, 0.41, 1.0],
            ScenarioKind::Cylinder3d => [1.275, 0.41, 0.41],
            _ => [1.0, 1.0, 1.0],
        }
    }

    fn default_velocity(self) -> f64 {
        match self {
            ScenarioKind::Cylinder2d => 0.3,
            ScenarioKind::Cylinder3d => 0.45,
            _ => 1.0,
        }
    }
}

/// Scenario description. Unset optional fields take the defaults of the kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioKind,
    /// Cells per axis. Cavities accept a single value.
    pub resolution: Vec<usize>,
    /// Physical extent per axis (m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<Vec<f64>>,
    /// Lid speed for cavities, mean inflow speed ū for channels (m/s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    /// Cylinder axis position (m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Hollow square: outer side, wall thickness and inlet gap (fractions of the channel height).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstacle_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_thickness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    /// Brancher: outlets per transverse axis, slot width as a fraction of the
    /// slot pitch, barrier position and thickness as fractions of the length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_thickness: Option<f64>,
    /// Porous slab: open fraction, grain edge in cells, slab extent along x
    /// as fractions of the length, and the random seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub porosity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grain: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slab: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioSpec {
    pub fn new(name: ScenarioKind, resolution: &[usize]) -> Self {
        Self {
            name,
            resolution: resolution.to_vec(),
            size: None,
            velocity: None,
            center: None,
            radius: None,
            obstacle_size: None,
            wall_thickness: None,
            gap: None,
            slots: None,
            slot_width: None,
            barrier_x: None,
            barrier_thickness: None,
            porosity: None,
            grain: None,
            slab: None,
            seed: None,
        }
    }

    pub fn cavity2d(n: usize) -> Self {
        Self::new(ScenarioKind::Cavity2d, &[n])
    }

    pub fn cavity3d(n: usize) -> Self {
        Self::new(ScenarioKind::Cavity3d, &[n])
    }

    pub fn cylinder2d(nx: usize, ny: usize) -> Self {
        Self::new(ScenarioKind::Cylinder2d, &[nx, ny])
    }

    /// Cells per axis after expanding a single cavity resolution.
    pub fn cells(&self) -> Result<[usize; 3]> {
        let dim = self.name.dim();
        let r = &self.resolution;
        let mut out = [1usize; 3];
        if self.name.is_cavity() && r.len() == 1 {
            out[..dim].fill(r[0]);
        } else if r.len() == dim {
            out[..dim].copy_from_slice(r);
        } else {
            return Err(StokesError::InvalidScenario(format!(
                "{} needs {dim} resolution values, got {}",
                self.name.name(),
                r.len()
            )));
        }
        if self.name.is_cavity() && out[..dim].iter().any(|&n| n != out[0]) {
            return Err(StokesError::InvalidScenario("cavity resolution must be equal on all axes".into()));
        }
        let min = if self.name.is_cavity() { 2 } else { 4 };
        if out[..dim].iter().any(|&n| n < min) {
            return Err(StokesError::InvalidScenario(format!("resolution must be at least {min} per axis")));
        }
        Ok(out)
    }

    pub fn physical_size(&self) -> Result<[f64; 3]> {
        let dim = self.name.dim();
        let mut s = self.name.default_size();
        if let Some(v) = &self.size {
            if v.len() != dim || v.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(StokesError::InvalidScenario("size needs one positive value per axis".into()));
            }
            s[..dim].copy_from_slice(v);
        }
        Ok(s)
    }

    pub fn velocity(&self) -> f64 {
        self.velocity.unwrap_or(self.name.default_velocity())
    }

    /// Cell size, taken from the first axis; other axes must agree to 1e-9 relative.
    pub fn spacing(&self) -> Result<f64> {
        let n = self.cells()?;
        let s = self.physical_size()?;
        let h = s[0] / n[0] as f64;
        for a in 1..self.name.dim() {
            let ha = s[a] / n[a] as f64;
            if ((ha - h) / h).abs() > 1e-9 {
                return Err(StokesError::InvalidScenario(format!(
                    "non-uniform spacing: axis 0 gives {h}, axis {a} gives {ha}"
                )));
            }
        }
        Ok(h)
    }
}

/// A built scenario: labelled grid, DOF numbering and boundary data.
#[derive(Clone, Debug)]
pub struct Scenario {
    /// Absent for grids read from a domain file.
    pub spec: Option<ScenarioSpec>,
    pub grid: CellGrid,
    pub map: DofMap,
    pub bc: BoundaryData,
}

impl Scenario {
    pub fn rhs(&self, eta: f64) -> Result<Vec<f64>> {
        assemble_rhs(&self.grid, &self.map, &self.bc, eta)
    }
}

/// Inflow velocity of the channel scenarios at transverse position `y`
/// (and `z` in 3D), measured from the lower wall.
pub fn inflow_profile(spec: &ScenarioSpec, y: f64, z: Option<f64>) -> Result<f64> {
    let s = spec.physical_size()?;
    let u = spec.velocity();
    let check = |v: f64, hh: f64| {
        if (0.0..=hh).contains(&v) {
            Ok(())
        } else {
            Err(StokesError::InvalidScenario(format!("coordinate {v} outside [0, {hh}]")))
        }
    };
    match (spec.name.dim(), z) {
        (2, None) => {
            let h = s[1];
            check(y, h)?;
            Ok(4.0 * u * y * (h - y) / (h * h))
        }
        (3, Some(z)) => {
            let (hy, hz) = (s[1], s[2]);
            check(y, hy)?;
            check(z, hz)?;
            Ok(16.0 * u * y * z * (hy - y) * (hz - z) / (hy * hy * hz * hz))
        }
        _ => Err(StokesError::InvalidScenario("profile needs one coordinate per transverse axis".into())),
    }
}

/// Deterministic builder for every scenario kind.
pub fn build(spec: &ScenarioSpec) -> Result<Scenario> {
    let (grid, lid) = match spec.name {
        ScenarioKind::Cavity2d | ScenarioKind::Cavity3d => (cavity_grid(spec)?, true),
        _ => (channel_grid(spec)?, false),
    };
    let map = classify_dofs(&grid);
    let mut bc = BoundaryData::zeros(&map);
    if lid {
        cavity_lid(spec, &grid, &map, &mut bc)?;
    } else {
        channel_inflow(spec, &grid, &map, &mut bc)?;
    }
    Ok(Scenario { spec: Some(spec.clone()), grid, map, bc })
}

fn cavity_grid(spec: &ScenarioSpec) -> Result<CellGrid> {
    let dim = spec.name.dim();
    let n = spec.cells()?[0];
    let h = spec.physical_size()?[0] / n as f64;
    let e = n + 2;
    let ext = vec![e; dim];
    let origin = vec![-1i64; dim];
    let mut g = CellGrid::with_origin(dim, &ext, &origin, h, vec![CellLabel::Interior; e.pow(dim as u32)])?;
    for idx in 0..g.num_cells() {
        let c = g.cell_coords(idx);
        if (0..dim).any(|a| c[a] == 0 || c[a] == e - 1) {
            g.set_label(c, CellLabel::Dirichlet);
        }
    }
    Ok(g)
}

/// Lid faces: tangential `u` faces in the top Dirichlet layer whose normal
/// coordinate lies strictly inside the cavity.
fn cavity_lid(spec: &ScenarioSpec, grid: &CellGrid, map: &DofMap, bc: &mut BoundaryData) -> Result<()> {
    let dim = grid.dim();
    let n = spec.cells()?[0];
    let top = dim - 1;
    let u = spec.velocity();
    let fd = map.face_dims(0);
    for k in 0..fd[2] {
        for j in 0..fd[1] {
            for i in 0..fd[0] {
                let f = [i, j, k];
                if f[top] != n + 1 || map.face_status(0, f) != DofStatus::Dirichlet {
                    continue;
                }
                // Local face i sits at global x = i - 1.
                let inside_x = i >= 2 && i <= n;
                let inside_t = (1..top).all(|a| f[a] >= 1 && f[a] <= n);
                if inside_x && inside_t {
                    bc.set_face_value(map, 0, f, u);
                }
            }
        }
    }
    Ok(())
}

/// Channel along x: Dirichlet inflow layer at x = -1, exterior outflow layer
/// at x = nx, Dirichlet walls on the transverse sides, obstacles rasterized by
/// cell centers.
fn channel_grid(spec: &ScenarioSpec) -> Result<CellGrid> {
    let dim = spec.name.dim();
    let n = spec.cells()?;
    let h = spec.spacing()?;
    let size = spec.physical_size()?;
    let ext: Vec<usize> = (0..dim).map(|a| n[a] + 2).collect();
    let origin = vec![-1i64; dim];
    let total: usize = ext.iter().product();
    let mut g = CellGrid::with_origin(dim, &ext, &origin, h, vec![CellLabel::Interior; total])?;
    for idx in 0..total {
        let c = g.cell_coords(idx);
        let wall = (1..dim).any(|a| c[a] == 0 || c[a] == ext[a] - 1);
        if wall || c[0] == 0 {
            g.set_label(c, CellLabel::Dirichlet);
        } else if c[0] == ext[0] - 1 {
            g.set_label(c, CellLabel::Exterior);
        }
    }
    let solid = obstacle(spec, size, n)?;
    for idx in 0..total {
        let c = g.cell_coords(idx);
        if g.label(c) == CellLabel::Interior {
            let x = g.cell_center(c);
            let gc = [c[0] as i64 - 1, c[1] as i64 - 1, c[2] as i64 - if dim == 3 { 1 } else { 0 }];
            if solid(x, gc) {
                g.set_label(c, CellLabel::Dirichlet);
            }
        }
    }
    Ok(g)
}

type Solid = Box<dyn Fn([f64; 3], [i64; 3]) -> bool>;

fn inside_box(x: [f64; 3], lo: [f64; 3], hi: [f64; 3], dim: usize) -> bool {
    (0..dim).all(|a| x[a] >= lo[a] && x[a] <= hi[a])
}

fn fraction(v: Option<f64>, default: f64, what: &str) -> Result<f64> {
    let v = v.unwrap_or(default);
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(StokesError::InvalidScenario(format!("{what} must lie in (0, 1), got {v}")))
    }
}

fn obstacle(spec: &ScenarioSpec, size: [f64; 3], n: [usize; 3]) -> Result<Solid> {
    let dim = spec.name.dim();
    match spec.name {
        ScenarioKind::Cylinder2d | ScenarioKind::Cylinder3d => {
            let c = match &spec.center {
                Some(v) if v.len() == 2 => [v[0], v[1]],
                Some(_) => return Err(StokesError::InvalidScenario("center needs two coordinates".into())),
                None if dim == 2 => [0.2, 0.2],
                None => [0.5, 0.2],
            };
            let r = spec.radius.unwrap_or(0.05);
            if !(r > 0.0) || c[0] - r < 0.0 || c[0] + r > size[0] || c[1] - r < 0.0 || c[1] + r > size[1] {
                return Err(StokesError::InvalidScenario("obstacle outside domain".into()));
            }
            Ok(Box::new(move |x, _| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) <= r * r))
        }
        ScenarioKind::HollowSquare2d => {
            let hgt = size[1];
            let s = fraction(spec.obstacle_size, 0.5, "obstacle_size")? * hgt;
            let t = fraction(spec.wall_thickness, 0.05, "wall_thickness")? * hgt;
            let gap = fraction(spec.gap, 0.1, "gap")? * hgt;
            if 2.0 * t >= s || gap >= s - 2.0 * t || s >= size[0].min(hgt) {
                return Err(StokesError::InvalidScenario("hollow square does not fit".into()));
            }
            let (cx, cy) = (0.5 * size[0], 0.5 * hgt);
            let lo = [cx - s / 2.0, cy - s / 2.0, 0.0];
            let hi = [cx + s / 2.0, cy + s / 2.0, 0.0];
            let ilo = [lo[0] + t, lo[1] + t, 0.0];
            let ihi = [hi[0] - t, hi[1] - t, 0.0];
            Ok(Box::new(move |x, _| {
                let in_wall = inside_box(x, lo, hi, 2) && !inside_box(x, ilo, ihi, 2);
                let in_gap = x[0] < ilo[0] && (x[1] - cy).abs() <= gap / 2.0;
                in_wall && !in_gap
            }))
        }
        ScenarioKind::Brancher2d | ScenarioKind::Brancher3d => {
            let k = spec.slots.unwrap_or(4);
            if k == 0 {
                return Err(StokesError::InvalidScenario("slots must be positive".into()));
            }
            let w = fraction(spec.slot_width, 0.4, "slot_width")?;
            let bx = fraction(spec.barrier_x, 0.7, "barrier_x")? * size[0];
            let bt = fraction(spec.barrier_thickness, 0.05, "barrier_thickness")? * size[0];
            if bx + bt >= size[0] {
                return Err(StokesError::InvalidScenario("barrier outside domain".into()));
            }
            let plate = 0.5 * (1.0 - w);
            Ok(Box::new(move |x, _| {
                if x[0] < bx {
                    return false;
                }
                // Position within the slot pitch on each transverse axis.
                let mut in_slot = true;
                let mut on_divider = false;
                for a in 1..dim {
                    let p = x[a] / size[a] * k as f64;
                    let f = p - p.floor();
                    in_slot &= (f - 0.5).abs() <= w / 2.0;
                    on_divider |= f < plate / 2.0 || f > 1.0 - plate / 2.0;
                }
                if x[0] <= bx + bt {
                    !in_slot
                } else {
                    on_divider
                }
            }))
        }
        ScenarioKind::Porous3d => {
            let porosity = fraction(spec.porosity, 0.5, "porosity")?;
            let grain = spec.grain.unwrap_or(2).max(1) as i64;
            let [s0, s1] = spec.slab.unwrap_or([0.4, 0.6]);
            if !(0.0..1.0).contains(&s0) || !(s0 < s1 && s1 <= 1.0) {
                return Err(StokesError::InvalidScenario("slab must satisfy 0 <= start < end <= 1".into()));
            }
            let g0 = ((s0 * n[0] as f64).floor() as i64).div_euclid(grain);
            let g1 = ((s1 * n[0] as f64).ceil() as i64 - 1).div_euclid(grain);
            let gn = [(g1 - g0 + 1) as usize, (n[1] as i64).div_euclid(grain) as usize + 1, (n[2] as i64).div_euclid(grain) as usize + 1];
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(7));
            let cells: Vec<bool> = (0..gn[0] * gn[1] * gn[2]).map(|_| rng.gen::<f64>() >= porosity).collect();
            Ok(Box::new(move |_, c| {
                let x0 = (s0 * n[0] as f64).floor() as i64;
                let x1 = (s1 * n[0] as f64).ceil() as i64;
                if c[0] < x0 || c[0] >= x1 {
                    return false;
                }
                let gi = (c[0].div_euclid(grain) - g0) as usize;
                let gj = c[1].div_euclid(grain) as usize;
                let gk = c[2].div_euclid(grain) as usize;
                cells[gi + gn[0] * (gj + gn[1] * gk)]
            }))
        }
        ScenarioKind::Cavity2d | ScenarioKind::Cavity3d => Ok(Box::new(|_, _| false)),
    }
}

/// Inflow values on the faces between the inflow layer and the first column.
fn channel_inflow(spec: &ScenarioSpec, grid: &CellGrid, map: &DofMap, bc: &mut BoundaryData) -> Result<()> {
    let dim = grid.dim();
    let ext = grid.extents();
    let zr = if dim == 3 { 1..ext[2] - 1 } else { 0..1 };
    for k in zr {
        for j in 1..ext[1] - 1 {
            let f = [1, j, k];
            if map.face_status(0, f) != DofStatus::Dirichlet {
                continue;
            }
            // Only faces whose downstream cell is fluid carry the profile.
            if grid.label([1, j, k]) != CellLabel::Interior {
                continue;
            }
            let x = grid.cell_center([1, j, k]);
            let v = if dim == 2 {
                inflow_profile(spec, x[1], None)?
            } else {
                inflow_profile(spec, x[1], Some(x[2]))?
            };
            bc.set_face_value(map, 0, f, v);
        }
    }
    Ok(())
}
