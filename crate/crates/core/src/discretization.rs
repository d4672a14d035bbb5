//! Matrix-free MAC discretization of the Stokes operator
//!
//! ```text
//!     L = [ A   Bᵀ ]        L̃ = [ A   Bᵀ ]
//!         [ B   0  ]            [ B  -γI ]
//! ```
//!
//! with `A = -ηΔ` (5/7-point), `Bᵀ = ∇` and `B = -∇·` on a uniform grid.
//! Dirichlet velocities are eliminated into the right-hand side; stencil legs
//! reaching inactive faces are dropped.

use crate::domain::{classify_dofs, CellGrid, DofKind, DofMap, DofStatus};
use crate::error::{Result, StokesError};
use crate::linalg::{DenseMatrix, LinearOperator};

/// Default size cap for dense materialization.
pub const DENSE_CAP: usize = 5_000;

/// Stokes operator on one grid level.
#[derive(Clone, Debug)]
pub struct LevelOperator {
    grid: CellGrid,
    map: DofMap,
    eta: f64,
    gamma: f64,
    lap: f64,
    inv_h: f64,
    diag: Vec<f64>,
}

impl LevelOperator {
    /// Builds the operator for an already classified grid. `gamma = 0` gives `L`.
    pub fn new(grid: CellGrid, map: DofMap, eta: f64, gamma: f64) -> Self {
        assert!(eta > 0.0, "viscosity must be positive");
        assert!(gamma >= 0.0, "penalty must be non-negative");
        let h = grid.h();
        let mut op = Self {
            lap: eta / (h * h),
            inv_h: 1.0 / h,
            grid,
            map,
            eta,
            gamma,
            diag: Vec::new(),
        };
        op.diag = (0..op.len()).map(|j| op.compute_distributive_diagonal(j)).collect();
        op
    }

    pub fn from_grid(grid: CellGrid, eta: f64, gamma: f64) -> Self {
        let map = classify_dofs(&grid);
        Self::new(grid, map, eta, gamma)
    }

    /// Same grid and numbering with a different penalty.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self::new(self.grid.clone(), self.map.clone(), self.eta, gamma)
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn map(&self) -> &DofMap {
        &self.map
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Calls `f(col, value)` for every stencil entry of row `j`. Columns may
    /// repeat (the diagonal of a velocity row is emitted once, pressure
    /// diagonals once).
    #[inline]
    pub fn for_each_in_row(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        let loc = self.map.location(j);
        let p = [loc.pos[0] as i64, loc.pos[1] as i64, loc.pos[2] as i64];
        let dim = self.map.dim();
        match loc.kind {
            DofKind::Velocity(a) => {
                let mut diag = 0.0;
                for b in 0..dim {
                    for s in [-1i64, 1] {
                        let mut n = p;
                        n[b] += s;
                        match self.map.face_status_at(a, n) {
                            DofStatus::Active(k) => {
                                f(k, -self.lap);
                                diag += self.lap;
                            }
                            DofStatus::Dirichlet => diag += self.lap,
                            DofStatus::Inactive => {}
                        }
                    }
                }
                f(j, diag);
                if let DofStatus::Active(k) = self.map.cell_status_at(p) {
                    f(k, self.inv_h);
                }
                let mut left = p;
                left[a] -= 1;
                if let DofStatus::Active(k) = self.map.cell_status_at(left) {
                    f(k, -self.inv_h);
                }
            }
            DofKind::Pressure => {
                for a in 0..dim {
                    if let DofStatus::Active(k) = self.map.face_status_at(a, p) {
                        f(k, self.inv_h);
                    }
                    let mut right = p;
                    right[a] += 1;
                    if let DofStatus::Active(k) = self.map.face_status_at(a, right) {
                        f(k, -self.inv_h);
                    }
                }
                if self.gamma != 0.0 {
                    f(j, -self.gamma);
                }
            }
        }
    }

    #[inline]
    pub fn row_dot(&self, j: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_each_in_row(j, |k, v| s += v * x[k]);
        s
    }

    /// Entry `(i, j)` of the operator.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        self.for_each_in_row(i, |k, v| {
            if k == j {
                s += v
            }
        });
        s
    }

    /// `y = L x` without length checks beyond debug assertions.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.len());
        debug_assert_eq!(y.len(), self.len());
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.row_dot(j, x);
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.len() {
            return Err(StokesError::LengthMismatch { expected: self.len(), actual: x.len() });
        }
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `r = b - L x`
    pub fn residual_into(&self, b: &[f64], x: &[f64], r: &mut [f64]) {
        for (j, rj) in r.iter_mut().enumerate() {
            *rj = b[j] - self.row_dot(j, x);
        }
    }

    pub fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.len()];
        self.residual_into(b, x, &mut r);
        r
    }

    /// Column `j` of the distribution matrix `M = [[I, -Bᵀ], [0, ηBBᵀ]]`
    /// restricted to active unknowns, written into `out` as merged
    /// `(row, value)` pairs.
    pub fn distributive_column_into(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        match self.map.location(j).kind {
            DofKind::Velocity(_) => out.push((j, 1.0)),
            DofKind::Pressure => {
                let vstart = self.map.velocity_len();
                let eta = self.eta;
                self.for_each_in_row(j, |k, v| {
                    if k < vstart {
                        out.push((k, -v));
                    }
                });
                let nvel = out.len();
                for i in 0..nvel {
                    let (k, neg_b) = out[i];
                    let b = -neg_b;
                    self.for_each_in_row(k, |n, w| {
                        if n >= vstart {
                            let add = eta * b * w;
                            match out[nvel..].iter_mut().find(|e| e.0 == n) {
                                Some(e) => e.1 += add,
                                None => out.push((n, add)),
                            }
                        }
                    });
                }
            }
        }
    }

    pub fn distributive_column(&self, j: usize) -> Result<Vec<(usize, f64)>> {
        if j >= self.len() {
            return Err(StokesError::IndexOutOfRange { index: j, len: self.len() });
        }
        let mut out = Vec::new();
        self.distributive_column_into(j, &mut out);
        Ok(out)
    }

    fn compute_distributive_diagonal(&self, j: usize) -> f64 {
        let mut col = Vec::new();
        self.distributive_column_into(j, &mut col);
        let mut d = 0.0;
        self.for_each_in_row(j, |k, v| {
            if let Some(&(_, m)) = col.iter().find(|e| e.0 == k) {
                d += v * m;
            }
        });
        d
    }

    /// Cached `d_j = L_{j,:} · M_{:,j}` for every active unknown.
    pub fn distributive_diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// The cached diagonal, failing on the first zero entry.
    pub fn checked_distributive_diagonal(&self) -> Result<&[f64]> {
        self.check_distributive_diagonal(0..self.len())?;
        Ok(&self.diag)
    }

    /// Fails if any `d_j` for `j` in `set` is zero.
    pub fn check_distributive_diagonal(&self, set: impl IntoIterator<Item = usize>) -> Result<()> {
        for j in set {
            if self.diag[j] == 0.0 || !self.diag[j].is_finite() {
                return Err(StokesError::ZeroDistributiveDiagonal(j));
            }
        }
        Ok(())
    }

    /// Dense materialization `M[i][j] = <e_i, L e_j>`, row by row from the stencil.
    pub fn assemble_dense(&self) -> Result<DenseMatrix> {
        self.assemble_dense_capped(DENSE_CAP)
    }

    pub fn assemble_dense_capped(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.len();
        if n > cap {
            return Err(StokesError::DenseCapExceeded { n, cap, hint: "" });
        }
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            self.for_each_in_row(i, |k, v| m[(i, k)] += v);
        }
        Ok(m)
    }

    /// Dense principal sub-block on the (ascending) index set `set`.
    pub fn assemble_submatrix(&self, set: &[usize], cap: usize) -> Result<DenseMatrix> {
        let n = set.len();
        if n > cap {
            return Err(StokesError::DenseCapExceeded { n, cap, hint: "" });
        }
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &j) in set.iter().enumerate() {
            pos[j] = i;
        }
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &j) in set.iter().enumerate() {
            self.for_each_in_row(j, |k, v| {
                if pos[k] != usize::MAX {
                    m[(i, pos[k])] += v;
                }
            });
        }
        Ok(m)
    }

    /// Dense distribution matrix `M` (verification only).
    pub fn assemble_distribution_dense(&self) -> Result<DenseMatrix> {
        let n = self.len();
        if n > DENSE_CAP {
            return Err(StokesError::DenseCapExceeded { n, cap: DENSE_CAP, hint: "" });
        }
        let mut m = DenseMatrix::zeros(n, n);
        let mut col = Vec::new();
        for j in 0..n {
            self.distributive_column_into(j, &mut col);
            for &(i, v) in &col {
                m[(i, j)] += v;
            }
        }
        Ok(m)
    }

    pub fn rhs(&self, bc: &BoundaryData) -> Result<Vec<f64>> {
        assemble_rhs(&self.grid, &self.map, bc, self.eta)
    }

    /// Maximum norm of the continuity rows of `b - L x`, i.e. the discrete
    /// divergence defect of the velocity part of `x`.
    pub fn divergence_defect(&self, b: &[f64], x: &[f64]) -> f64 {
        self.map
            .pressure_range()
            .map(|j| (b[j] - self.row_dot(j, x)).abs())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for LevelOperator {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        LevelOperator::apply_into(self, x, y)
    }
}

/// Dirichlet face velocities and body force. Neumann data is always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    /// Per axis, one value per face of the face lattice; only Dirichlet faces
    /// may be nonzero.
    pub face_values: [Vec<f64>; 3],
    /// Body force per active velocity unknown.
    pub force: Vec<f64>,
}

impl BoundaryData {
    pub fn zeros(map: &DofMap) -> Self {
        let mut face_values: [Vec<f64>; 3] = Default::default();
        for (a, fv) in face_values.iter_mut().enumerate().take(map.dim()) {
            *fv = vec![0.0; map.face_statuses(a).len()];
        }
        Self { face_values, force: vec![0.0; map.velocity_len()] }
    }

    pub fn face_value(&self, map: &DofMap, axis: usize, f: [usize; 3]) -> f64 {
        self.face_values[axis][map.face_index(axis, f)]
    }

    pub fn set_face_value(&mut self, map: &DofMap, axis: usize, f: [usize; 3], value: f64) {
        let i = map.face_index(axis, f);
        self.face_values[axis][i] = value;
    }

    fn validate(&self, map: &DofMap) -> Result<()> {
        for a in 0..map.dim() {
            let st = map.face_statuses(a);
            if self.face_values[a].len() != st.len() {
                return Err(StokesError::LengthMismatch {
                    expected: st.len(),
                    actual: self.face_values[a].len(),
                });
            }
            for (i, (&v, s)) in self.face_values[a].iter().zip(st).enumerate() {
                if !v.is_finite() {
                    return Err(StokesError::InvalidConfig(format!("non-finite boundary value on axis {a}")));
                }
                if v != 0.0 && *s != DofStatus::Dirichlet {
                    return Err(StokesError::BoundaryValueOnNonDirichletFace { axis: a, face: i });
                }
            }
        }
        if self.force.len() != map.velocity_len() {
            return Err(StokesError::LengthMismatch {
                expected: map.velocity_len(),
                actual: self.force.len(),
            });
        }
        Ok(())
    }
}

/// Right-hand side: body force plus Dirichlet contributions to the momentum
/// rows, and Dirichlet fluxes in the continuity rows.
pub fn assemble_rhs(grid: &CellGrid, map: &DofMap, bc: &BoundaryData, eta: f64) -> Result<Vec<f64>> {
    bc.validate(map)?;
    let h = grid.h();
    let inv_h = 1.0 / h;
    let dim = map.dim();
    let mut b = vec![0.0; map.len()];
    for (j, bj) in b.iter_mut().enumerate() {
        let loc = map.location(j);
        let p = [loc.pos[0] as i64, loc.pos[1] as i64, loc.pos[2] as i64];
        match loc.kind {
            DofKind::Velocity(a) => {
                *bj = bc.force[j];
                for bax in 0..dim {
                    for s in [-1i64, 1] {
                        let mut n = p;
                        n[bax] += s;
                        if map.face_status_at(a, n) == DofStatus::Dirichlet {
                            let f = [n[0] as usize, n[1] as usize, n[2] as usize];
                            *bj += eta * bc.face_value(map, a, f) / (h * h);
                        }
                    }
                }
            }
            DofKind::Pressure => {
                for a in 0..dim {
                    if map.face_status_at(a, p) == DofStatus::Dirichlet {
                        *bj -= inv_h * bc.face_value(map, a, loc.pos);
                    }
                    let mut right = loc.pos;
                    right[a] += 1;
                    if map.face_status(a, right) == DofStatus::Dirichlet {
                        *bj += inv_h * bc.face_value(map, a, right);
                    }
                }
            }
        }
    }
    Ok(b)
}

/// Net Dirichlet inflow over the boundary of the interior region, as a sum of
/// face velocities (outward-normal sign convention flipped).
pub fn net_dirichlet_inflow(map: &DofMap, bc: &BoundaryData) -> f64 {
    let mut total = 0.0;
    for j in map.pressure_range() {
        let c = map.location(j).pos;
        for a in 0..map.dim() {
            if map.face_status(a, c) == DofStatus::Dirichlet {
                total += bc.face_value(map, a, c);
            }
            let mut right = c;
            right[a] += 1;
            if map.face_status(a, right) == DofStatus::Dirichlet {
                total -= bc.face_value(map, a, right);
            }
        }
    }
    total
}
