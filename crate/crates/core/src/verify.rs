//! Operator materialization and symmetry/structure checks.

use rayon::prelude::*;

use crate::discretization::{LevelOperator, DENSE_CAP};
use crate::domain::{CellLabel, DofKind};
use crate::error::{Result, StokesError};
use crate::linalg::DenseMatrix;
use crate::multigrid::{build_hierarchy, CycleConfig, CycleKind};
use crate::scenarios::{build, ScenarioSpec};
use crate::smoothers::{vanka_setup, BoundarySmoother, DgsPlan, LevelSmoother, SmootherConfig};

/// Relative tolerance for the symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Magnitude above which a commutator entry counts as nonzero.
pub const COMMUTATOR_TOL: f64 = 1e-12;

/// Dense matrix of a linear map, column `j` = `f(e_j)`. Columns are computed
/// independently (in parallel when a rayon pool is available).
pub fn materialize<F>(f: F, n: usize) -> Result<DenseMatrix>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    materialize_capped(f, n, DENSE_CAP)
}

pub fn materialize_capped<F>(f: F, n: usize, cap: usize) -> Result<DenseMatrix>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if n > cap {
        return Err(StokesError::DenseCapExceeded { n, cap, hint: "" });
    }
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            f(&e)
        })
        .collect();
    if let Some(c) = cols.iter().find(|c| c.len() != n) {
        return Err(StokesError::LengthMismatch { expected: n, actual: c.len() });
    }
    Ok(DenseMatrix::from_columns(n, &cols))
}

/// `‖A − Aᵀ‖_F / ‖A‖_F` (denominator floored at the smallest normal number).
pub fn symmetry_defect(a: &DenseMatrix) -> f64 {
    assert_eq!(a.rows(), a.cols(), "symmetry defect needs a square matrix");
    let n = a.rows();
    let mut num = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = a[(i, j)] - a[(j, i)];
            num += d * d;
        }
    }
    num.sqrt() / a.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Entry of `L·M` in a velocity row and pressure column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default)]
pub struct CommutativityReport {
    /// Deep-interior columns with a velocity-row entry above tolerance.
    pub violations: Vec<CommutatorEntry>,
    /// Number of pressure columns classed as deep interior.
    pub deep_columns: usize,
    /// Largest velocity-row magnitude among the remaining pressure columns.
    pub boundary_max: f64,
}

/// A pressure column is deep when every cell within Chebyshev distance
/// `radius` of its cell lies on the grid and is interior.
pub fn is_deep_pressure(op: &LevelOperator, j: usize, radius: i64) -> bool {
    let loc = op.map().location(j);
    if loc.kind != DofKind::Pressure {
        return false;
    }
    let dim = op.map().dim();
    let c = [loc.pos[0] as i64, loc.pos[1] as i64, loc.pos[2] as i64];
    let rz = if dim == 3 { -radius..=radius } else { 0..=0 };
    for dz in rz {
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                // label_at works in local coordinates.
                let n = [c[0] + dx, c[1] + dy, c[2] + dz];
                if op.grid().label_at(n) != Some(CellLabel::Interior) {
                    return false;
                }
            }
        }
    }
    true
}

/// Dense `L·M` restricted to velocity rows and pressure columns, split into
/// deep-interior violations and the near-boundary maximum.
pub fn commutativity_report(op: &LevelOperator) -> Result<CommutativityReport> {
    let l = op.assemble_dense()?;
    let m = op.assemble_distribution_dense()?;
    let lm = l.matmul(&m);
    let nv = op.map().velocity_len();
    let mut rep = CommutativityReport::default();
    for j in op.map().pressure_range() {
        let deep = is_deep_pressure(op, j, 2);
        if deep {
            rep.deep_columns += 1;
        }
        for i in 0..nv {
            let v = lm[(i, j)];
            if deep {
                if v.abs() > COMMUTATOR_TOL {
                    rep.violations.push(CommutatorEntry { row: i, col: j, value: v });
                }
            } else {
                rep.boundary_max = rep.boundary_max.max(v.abs());
            }
        }
    }
    Ok(rep)
}

/// One line of the verification table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub n: usize,
    pub defect: f64,
    pub tol: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.defect.is_finite() && self.defect < self.tol
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<44} n={:<5} defect={:.3e} tol={:.0e} {}",
            self.name,
            self.n,
            self.defect,
            self.tol,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Largest cavity resolution included (2D sizes 8, 12, 16 and 3D size 6).
    pub max_n: usize,
    pub skip_reverse_dgs: bool,
    pub eta: f64,
    pub gamma: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { max_n: 16, skip_reverse_dgs: false, eta: 1e-3, gamma: 1e-3 }
    }
}

fn symmetry_check<F>(name: String, n: usize, f: F) -> Result<CheckResult>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let c = materialize(f, n)?;
    Ok(CheckResult { name, n, defect: symmetry_defect(&c), tol: SYMMETRY_TOL })
}

/// Penalized cavity operator with a width-1 band partition.
pub fn cavity_operator(spec: &ScenarioSpec, eta: f64, gamma: f64) -> Result<LevelOperator> {
    let s = build(spec)?;
    let map = crate::domain::partition_band(&s.grid, &s.map, 1);
    Ok(LevelOperator::new(s.grid, map, eta, gamma))
}

/// Smoother symmetry checks for one operator.
pub fn smoother_checks(op: &LevelOperator, label: &str, opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n = op.len();
    let mut out = Vec::new();
    let all: Vec<usize> = (0..n).collect();
    let plan = DgsPlan::new(op, &all)?;
    let skip = opts.skip_reverse_dgs;
    out.push(symmetry_check(format!("{label} symmetric DGS"), n, |b| {
        let mut x = vec![0.0; n];
        plan.forward(op, &mut x, b);
        if !skip {
            plan.reverse_left(op, &mut x, b);
        }
        x
    })?);
    let vanka = vanka_setup(op)?;
    for nu in 1..=3 {
        out.push(symmetry_check(format!("{label} additive Vanka nu={nu}"), n, |b| {
            let mut x = vec![0.0; n];
            for _ in 0..nu {
                vanka.additive(op, &mut x, b, 1.0);
            }
            x
        })?);
        out.push(symmetry_check(format!("{label} multiplicative Vanka nu={nu}"), n, |b| {
            let mut x = vec![0.0; n];
            for _ in 0..nu {
                vanka.multiplicative_symmetric(op, &mut x, b);
            }
            x
        })?);
    }
    for kind in [BoundarySmoother::Multiplicative, BoundarySmoother::Additive, BoundarySmoother::Direct] {
        for nu in 1..=3 {
            let cfg = SmootherConfig { kind, sweeps: nu, skip_reverse_dgs: skip, ..Default::default() };
            let s = LevelSmoother::new(op, cfg)?;
            out.push(symmetry_check(format!("{label} integrated {kind:?} nu={nu}"), n, |b| {
                let mut x = vec![0.0; n];
                s.smooth(op, &mut x, b);
                x
            })?);
        }
    }
    Ok(out)
}

/// Cycle symmetry checks on a cavity grid.
pub fn cycle_checks(spec: &ScenarioSpec, label: &str, opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let grid = build(spec)?.grid;
    let mut out = Vec::new();
    for (kind, levels) in [(CycleKind::V, 2), (CycleKind::V, 3), (CycleKind::W, 3)] {
        let cfg = CycleConfig {
            kind,
            levels,
            smoother: SmootherConfig { skip_reverse_dgs: opts.skip_reverse_dgs, ..Default::default() },
        };
        let h = build_hierarchy(&grid, opts.eta, opts.gamma, &cfg)?;
        let n = h.finest().len();
        out.push(symmetry_check(format!("{label} {kind:?}-cycle {levels} levels"), n, |b| {
            h.cycle(b).expect("cycle length")
        })?);
    }
    Ok(out)
}

/// The full suite run by `solver verify`.
pub fn run_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for r in [8usize, 12, 16].into_iter().filter(|&r| r <= opts.max_n) {
        let op = cavity_operator(&ScenarioSpec::cavity2d(r), opts.eta, opts.gamma)?;
        out.extend(smoother_checks(&op, &format!("cavity {r}x{r}"), opts)?);
    }
    if opts.max_n >= 6 {
        let op = cavity_operator(&ScenarioSpec::cavity3d(6), opts.eta, opts.gamma)?;
        out.extend(smoother_checks(&op, "cavity 6x6x6", opts)?);
    }
    let r = [16usize, 12, 8].into_iter().find(|&r| r <= opts.max_n);
    if let Some(r) = r {
        out.extend(cycle_checks(&ScenarioSpec::cavity2d(r), &format!("cavity {r}x{r}"), opts)?);
        let op = cavity_operator(&ScenarioSpec::cavity2d(12.min(r)), opts.eta, opts.gamma)?;
        let a = op.assemble_dense()?;
        out.push(CheckResult {
            name: format!("cavity {0}x{0} operator", 12.min(r)),
            n: op.len(),
            defect: symmetry_defect(&a),
            tol: 1e-12,
        });
    }
    Ok(out)
}
