//! Symmetric distributive Gauss-Seidel, Vanka block smoothers, and the
//! integrated boundary/interior smoothing step.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::LevelOperator;
use crate::domain::DofStatus;
use crate::error::{Result, StokesError};
use crate::linalg::{DenseLu, SmallLu, SMALL_LU_MAX};

/// Largest `V1` handled by the direct boundary mode.
pub const DIRECT_BAND_CAP: usize = 8_000;

/// Blocks per color below which a color is processed without rayon.
const PAR_MIN_BLOCKS: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySmoother {
    #[default]
    Multiplicative,
    Additive,
    Direct,
}

impl std::str::FromStr for BoundarySmoother {
    type Err = StokesError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiplicative" => Ok(Self::Multiplicative),
            "additive" => Ok(Self::Additive),
            "direct" => Ok(Self::Direct),
            _ => Err(StokesError::InvalidConfig(format!("unknown boundary smoother `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmootherConfig {
    pub kind: BoundarySmoother,
    /// Vanka applications before and after the interior pass.
    pub sweeps: usize,
    pub band_width: usize,
    /// Damping for additive Vanka.
    pub omega: f64,
    /// Debug switch: drop the reverse DGS pass, breaking symmetry on purpose.
    pub skip_reverse_dgs: bool,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            kind: BoundarySmoother::Multiplicative,
            sweeps: 1,
            band_width: 1,
            omega: 1.0,
            skip_reverse_dgs: false,
        }
    }
}

impl SmootherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(StokesError::InvalidConfig("sweeps must be at least 1".into()));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(StokesError::InvalidConfig("omega must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Distributive relaxation data for an ordered index set.
#[derive(Clone, Debug)]
pub struct DgsPlan {
    set: Vec<usize>,
    inv_diag: Vec<f64>,
    col_ptr: Vec<usize>,
    col: Vec<(usize, f64)>,
}

impl DgsPlan {
    /// `set` must be ascending. Fails if any `d_j` on the set is zero.
    pub fn new(op: &LevelOperator, set: &[usize]) -> Result<Self> {
        op.check_distributive_diagonal(set.iter().copied())?;
        let d = op.distributive_diagonal();
        let mut col_ptr = vec![0];
        let mut col = Vec::new();
        let mut buf = Vec::new();
        for &j in set {
            op.distributive_column_into(j, &mut buf);
            col.extend_from_slice(&buf);
            col_ptr.push(col.len());
        }
        Ok(Self {
            set: set.to_vec(),
            inv_diag: set.iter().map(|&j| 1.0 / d[j]).collect(),
            col_ptr,
            col,
        })
    }

    pub fn set(&self) -> &[usize] {
        &self.set
    }

    fn column(&self, i: usize) -> &[(usize, f64)] {
        &self.col[self.col_ptr[i]..self.col_ptr[i + 1]]
    }

    /// Ascending sweep: `x += (r_j / d_j) M e_j`.
    pub fn forward(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        for (i, &j) in self.set.iter().enumerate() {
            let r = b[j] - op.row_dot(j, x);
            let delta = r * self.inv_diag[i];
            for &(k, m) in self.column(i) {
                x[k] += delta * m;
            }
        }
    }

    /// Descending sweep on the left-transformed system: `x_j += (Mᵀ(b - Lx))_j / d_j`.
    pub fn reverse_left(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        for (i, &j) in self.set.iter().enumerate().rev() {
            let mut r = 0.0;
            for &(k, m) in self.column(i) {
                r += m * (b[k] - op.row_dot(k, x));
            }
            x[j] += r * self.inv_diag[i];
        }
    }

    pub fn symmetric(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        self.forward(op, x, b);
        self.reverse_left(op, x, b);
    }
}

fn check_lengths(op: &LevelOperator, x: &[f64], b: &[f64]) -> Result<()> {
    for v in [x.len(), b.len()] {
        if v != op.len() {
            return Err(StokesError::LengthMismatch { expected: op.len(), actual: v });
        }
    }
    Ok(())
}

fn checked_set(op: &LevelOperator, set: &[usize]) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&j) = s.iter().find(|&&j| j >= op.len()) {
        return Err(StokesError::IndexOutOfRange { index: j, len: op.len() });
    }
    Ok(s)
}

/// One forward DGS sweep over `set` in ascending order.
pub fn dgs_forward(op: &LevelOperator, x: &mut [f64], b: &[f64], set: &[usize]) -> Result<()> {
    check_lengths(op, x, b)?;
    DgsPlan::new(op, &checked_set(op, set)?)?.forward(op, x, b);
    Ok(())
}

/// One reverse sweep over `set` in descending order on the left-transformed system.
pub fn dgs_reverse_left(op: &LevelOperator, x: &mut [f64], b: &[f64], set: &[usize]) -> Result<()> {
    check_lengths(op, x, b)?;
    DgsPlan::new(op, &checked_set(op, set)?)?.reverse_left(op, x, b);
    Ok(())
}

pub fn symmetric_dgs(op: &LevelOperator, x: &mut [f64], b: &[f64], set: &[usize]) -> Result<()> {
    check_lengths(op, x, b)?;
    DgsPlan::new(op, &checked_set(op, set)?)?.symmetric(op, x, b);
    Ok(())
}

/// Pressure cell plus its active faces, with the factorized local block of `L̃`.
#[derive(Clone, Debug)]
pub struct VankaBlock {
    dofs: [usize; SMALL_LU_MAX],
    len: usize,
    class: usize,
    color: usize,
}

impl VankaBlock {
    pub fn dofs(&self) -> &[usize] {
        &self.dofs[..self.len]
    }

    /// Index of the shared factorization.
    pub fn class(&self) -> usize {
        self.class
    }

    pub fn color(&self) -> usize {
        self.color
    }
}

/// All Vanka blocks of a level, grouped by color.
#[derive(Clone, Debug)]
pub struct VankaSet {
    blocks: Vec<VankaBlock>,
    factors: Vec<SmallLu>,
    colors: Vec<Vec<usize>>,
}

/// One block per band cell. Local matrices are factorized once per distinct
/// matrix; blocks are colored by global cell coordinates modulo 3 so that
/// blocks of one color neither share unknowns nor read each other's updates.
pub fn vanka_setup(op: &LevelOperator) -> Result<VankaSet> {
    let map = op.map();
    let dim = map.dim();
    let ext = map.extents();
    let org = map.origin();
    let ncolors = 3usize.pow(dim as u32);
    let mut blocks = Vec::new();
    let mut factors = Vec::new();
    let mut cache: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut colors = vec![Vec::new(); ncolors];

    for (idx, &is_band) in map.band_cells().iter().enumerate() {
        if !is_band {
            continue;
        }
        let Some(p) = map.cell_statuses()[idx].active() else { continue };
        let c = [idx % ext[0], (idx / ext[0]) % ext[1], idx / (ext[0] * ext[1])];
        let mut dofs = [0usize; SMALL_LU_MAX];
        let mut len = 0;
        for a in 0..dim {
            for s in 0..2 {
                let mut f = c;
                f[a] += s;
                if let DofStatus::Active(k) = map.face_status(a, f) {
                    dofs[len] = k;
                    len += 1;
                }
            }
        }
        dofs[len] = p;
        len += 1;
        dofs[..len].sort_unstable();

        let mut local = [[0.0f64; SMALL_LU_MAX]; SMALL_LU_MAX];
        for (r, &j) in dofs[..len].iter().enumerate() {
            op.for_each_in_row(j, |k, v| {
                if let Some(cc) = dofs[..len].iter().position(|&d| d == k) {
                    local[r][cc] += v;
                }
            });
        }
        let key: Vec<u64> = (0..len)
            .flat_map(|r| (0..len).map(move |cc| (r, cc)))
            .map(|(r, cc)| local[r][cc].to_bits())
            .chain(std::iter::once(len as u64))
            .collect();
        let class = match cache.get(&key) {
            Some(&k) => k,
            None => {
                let lu = SmallLu::factor(len, &local).map_err(|_| StokesError::SingularMatrix(p))?;
                factors.push(lu);
                cache.insert(key, factors.len() - 1);
                factors.len() - 1
            }
        };
        let mut color = 0;
        for a in (0..dim).rev() {
            color = 3 * color + (org[a] + c[a] as i64).rem_euclid(3) as usize;
        }
        colors[color].push(blocks.len());
        blocks.push(VankaBlock { dofs, len, class, color });
    }
    Ok(VankaSet { blocks, factors, colors })
}

impl VankaSet {
    pub fn blocks(&self) -> &[VankaBlock] {
        &self.blocks
    }

    /// Number of distinct factorized local matrices.
    pub fn num_classes(&self) -> usize {
        self.factors.len()
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    /// Dense local matrix of block `i`, reassembled from the operator.
    pub fn local_matrix(&self, op: &LevelOperator, i: usize) -> Vec<Vec<f64>> {
        let d = self.blocks[i].dofs();
        d.iter().map(|&r| d.iter().map(|&c| op.entry(r, c)).collect()).collect()
    }

    #[inline]
    fn block_correction(&self, op: &LevelOperator, i: usize, x: &[f64], b: &[f64]) -> [f64; SMALL_LU_MAX] {
        let blk = &self.blocks[i];
        let mut r = [0.0; SMALL_LU_MAX];
        for (ri, &j) in blk.dofs().iter().enumerate() {
            r[ri] = b[j] - op.row_dot(j, x);
        }
        self.factors[blk.class].solve(&r)
    }

    #[inline]
    fn apply_correction(&self, i: usize, delta: &[f64; SMALL_LU_MAX], x: &mut [f64]) {
        for (ri, &j) in self.blocks[i].dofs().iter().enumerate() {
            x[j] += delta[ri];
        }
    }

    fn sweep_color(&self, op: &LevelOperator, color: usize, reverse: bool, x: &mut [f64], b: &[f64]) {
        let ids = &self.colors[color];
        if ids.len() >= PAR_MIN_BLOCKS && rayon::current_num_threads() > 1 {
            // Same-color blocks are decoupled, so a simultaneous update equals
            // the sequential one exactly.
            let deltas: Vec<_> = ids.par_iter().map(|&i| self.block_correction(op, i, x, b)).collect();
            for (&i, d) in ids.iter().zip(&deltas) {
                self.apply_correction(i, d, x);
            }
        } else if reverse {
            for &i in ids.iter().rev() {
                let d = self.block_correction(op, i, x, b);
                self.apply_correction(i, &d, x);
            }
        } else {
            for &i in ids {
                let d = self.block_correction(op, i, x, b);
                self.apply_correction(i, &d, x);
            }
        }
    }

    /// Blocks in color-major order.
    pub fn forward(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        for color in 0..self.colors.len() {
            self.sweep_color(op, color, false, x, b);
        }
    }

    /// Exact reverse of `forward`.
    pub fn reverse(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        for color in (0..self.colors.len()).rev() {
            self.sweep_color(op, color, true, x, b);
        }
    }

    pub fn multiplicative_symmetric(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        self.forward(op, x, b);
        self.reverse(op, x, b);
    }

    /// One residual, all block solves against it, corrections summed in block order.
    pub fn additive(&self, op: &LevelOperator, x: &mut [f64], b: &[f64], omega: f64) {
        let n = self.blocks.len();
        let deltas: Vec<[f64; SMALL_LU_MAX]> = if n >= PAR_MIN_BLOCKS && rayon::current_num_threads() > 1 {
            (0..n).into_par_iter().map(|i| self.block_correction(op, i, x, b)).collect()
        } else {
            (0..n).map(|i| self.block_correction(op, i, x, b)).collect()
        };
        let mut sum = vec![0.0; x.len()];
        for (i, d) in deltas.iter().enumerate() {
            self.apply_correction(i, d, &mut sum);
        }
        for (xi, s) in x.iter_mut().zip(&sum) {
            *xi += omega * s;
        }
    }
}

pub fn vanka_multiplicative_symmetric(
    blocks: &VankaSet,
    op: &LevelOperator,
    x: &mut [f64],
    b: &[f64],
) -> Result<()> {
    check_lengths(op, x, b)?;
    blocks.multiplicative_symmetric(op, x, b);
    Ok(())
}

pub fn vanka_additive(blocks: &VankaSet, op: &LevelOperator, x: &mut [f64], b: &[f64], omega: f64) -> Result<()> {
    check_lengths(op, x, b)?;
    blocks.additive(op, x, b, omega);
    Ok(())
}

/// Exact solve on the `V1 × V1` principal block.
#[derive(Clone, Debug)]
pub struct DirectBand {
    set: Vec<usize>,
    lu: Option<DenseLu>,
}

impl DirectBand {
    pub fn new(op: &LevelOperator, set: &[usize]) -> Result<Self> {
        if set.is_empty() {
            return Ok(Self { set: Vec::new(), lu: None });
        }
        let m = op.assemble_submatrix(set, DIRECT_BAND_CAP).map_err(|e| match e {
            StokesError::DenseCapExceeded { n, cap, .. } => StokesError::DenseCapExceeded {
                n,
                cap,
                hint: " (direct boundary smoother; use multiplicative or additive)",
            },
            e => e,
        })?;
        Ok(Self { set: set.to_vec(), lu: Some(DenseLu::factor(&m)?) })
    }

    pub fn apply(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        let Some(lu) = &self.lu else { return };
        let mut r: Vec<f64> = self.set.iter().map(|&j| b[j] - op.row_dot(j, x)).collect();
        lu.solve_in_place(&mut r);
        for (&j, d) in self.set.iter().zip(&r) {
            x[j] += d;
        }
    }
}

#[derive(Clone, Debug)]
enum Boundary {
    Vanka(VankaSet),
    Direct(DirectBand),
}

/// Prepared smoother for one level: boundary relaxation on `V1` and
/// distributive relaxation on `V2`.
#[derive(Clone, Debug)]
pub struct LevelSmoother {
    cfg: SmootherConfig,
    boundary: Boundary,
    dgs: DgsPlan,
    band_len: usize,
}

impl LevelSmoother {
    /// `op` must carry a band partition (see `partition_band`).
    pub fn new(op: &LevelOperator, cfg: SmootherConfig) -> Result<Self> {
        cfg.validate()?;
        let map = op.map();
        let v1 = map.band_set();
        let v2 = map.interior_set();
        let boundary = match cfg.kind {
            BoundarySmoother::Direct => Boundary::Direct(DirectBand::new(op, &v1)?),
            _ => Boundary::Vanka(vanka_setup(op)?),
        };
        Ok(Self { cfg, boundary, dgs: DgsPlan::new(op, &v2)?, band_len: v1.len() })
    }

    pub fn config(&self) -> &SmootherConfig {
        &self.cfg
    }

    pub fn vanka(&self) -> Option<&VankaSet> {
        match &self.boundary {
            Boundary::Vanka(v) => Some(v),
            Boundary::Direct(_) => None,
        }
    }

    pub fn band_len(&self) -> usize {
        self.band_len
    }

    pub fn interior_len(&self) -> usize {
        self.dgs.set.len()
    }

    fn boundary_pass(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        if self.band_len == 0 {
            return;
        }
        for _ in 0..self.cfg.sweeps {
            match (&self.boundary, self.cfg.kind) {
                (Boundary::Vanka(v), BoundarySmoother::Additive) => v.additive(op, x, b, self.cfg.omega),
                (Boundary::Vanka(v), _) => v.multiplicative_symmetric(op, x, b),
                (Boundary::Direct(d), _) => d.apply(op, x, b),
            }
        }
    }

    /// Boundary pass, one symmetric DGS pass on the interior, boundary pass.
    pub fn smooth(&self, op: &LevelOperator, x: &mut [f64], b: &[f64]) {
        self.boundary_pass(op, x, b);
        if self.cfg.skip_reverse_dgs {
            self.dgs.forward(op, x, b);
        } else {
            self.dgs.symmetric(op, x, b);
        }
        self.boundary_pass(op, x, b);
    }
}
