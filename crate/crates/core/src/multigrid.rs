//! Level hierarchy, V/W-cycles, and stand-alone multigrid iteration.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::discretization::LevelOperator;
use crate::domain::{classify_dofs, partition_band, CellGrid};
use crate::error::{Result, StokesError};
use crate::krylov::{relative_residual, History, SolveOutcome, SolveStatus};
use crate::linalg::{DenseLu, LinearOperator};
use crate::smoothers::{LevelSmoother, SmootherConfig};
use crate::transfer::TransferPair;

/// Default size cap for the coarsest dense factorization.
pub const COARSE_CAP: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum CycleKind {
    #[default]
    V,
    W,
}

impl std::str::FromStr for CycleKind {
    type Err = StokesError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V" | "v" => Ok(Self::V),
            "W" | "w" => Ok(Self::W),
            _ => Err(StokesError::InvalidConfig(format!("unknown cycle `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleConfig {
    pub kind: CycleKind,
    pub levels: usize,
    pub smoother: SmootherConfig,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self { kind: CycleKind::V, levels: 3, smoother: SmootherConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub op: LevelOperator,
    /// Absent on the coarsest level.
    pub smoother: Option<LevelSmoother>,
    /// Transfer to the next coarser level.
    pub transfer: Option<TransferPair>,
}

#[derive(Clone, Debug)]
pub struct MgHierarchy {
    levels: Vec<Level>,
    coarse: Option<DenseLu>,
    kind: CycleKind,
}

/// Builds `cfg.levels` levels by repeated coarsening and re-discretization,
/// each with the penalized operator, and factorizes the coarsest one.
pub fn build_hierarchy(grid: &CellGrid, eta: f64, gamma: f64, cfg: &CycleConfig) -> Result<MgHierarchy> {
    build_hierarchy_capped(grid, eta, gamma, cfg, COARSE_CAP)
}

pub fn build_hierarchy_capped(
    grid: &CellGrid,
    eta: f64,
    gamma: f64,
    cfg: &CycleConfig,
    cap: usize,
) -> Result<MgHierarchy> {
    if cfg.levels == 0 {
        return Err(StokesError::InvalidHierarchy("at least one level is required".into()));
    }
    if !(gamma > 0.0) {
        return Err(StokesError::InvalidHierarchy("multigrid needs a positive penalty".into()));
    }
    cfg.smoother.validate()?;
    let mut grids = vec![grid.clone()];
    for _ in 1..cfg.levels {
        let g = grids.last().unwrap().coarsen()?;
        grids.push(g);
    }
    let mut ops = Vec::with_capacity(grids.len());
    for (k, g) in grids.into_iter().enumerate() {
        let map = partition_band(&g, &classify_dofs(&g), cfg.smoother.band_width);
        if map.is_empty() {
            return Err(StokesError::InvalidHierarchy(format!("level {k} has no active unknowns")));
        }
        ops.push(LevelOperator::new(g, map, eta, gamma));
    }
    let n_coarse = ops.last().unwrap().len();
    if n_coarse > cap {
        return Err(StokesError::DenseCapExceeded { n: n_coarse, cap, hint: " at the coarsest level; add levels" });
    }
    let coarse = DenseLu::factor(&ops.last().unwrap().assemble_dense_capped(cap)?)?;
    let nlev = ops.len();
    let mut levels = Vec::with_capacity(nlev);
    for k in 0..nlev {
        let (smoother, transfer) = if k + 1 < nlev {
            (
                Some(LevelSmoother::new(&ops[k], cfg.smoother)?),
                Some(TransferPair::new(ops[k].map(), ops[k + 1].map())),
            )
        } else {
            (None, None)
        };
        levels.push(Level { op: ops[k].clone(), smoother, transfer });
    }
    Ok(MgHierarchy { levels, coarse: Some(coarse), kind: cfg.kind })
}

impl MgHierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &LevelOperator {
        &self.levels[0].op
    }

    pub fn kind(&self) -> CycleKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: CycleKind) -> Self {
        self.kind = kind;
        self
    }

    /// One cycle with zero initial guess: returns `x ≈ L̃⁻¹ b`.
    pub fn cycle(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.finest().len() {
            return Err(StokesError::LengthMismatch { expected: self.finest().len(), actual: b.len() });
        }
        Ok(self.cycle_at(0, b))
    }

    fn cycle_at(&self, k: usize, b: &[f64]) -> Vec<f64> {
        let lvl = &self.levels[k];
        if k + 1 == self.levels.len() {
            return self.coarse.as_ref().expect("coarsest factorization").solve(b);
        }
        let op = &lvl.op;
        let smoother = lvl.smoother.as_ref().expect("smoother on non-coarsest level");
        let transfer = lvl.transfer.as_ref().expect("transfer on non-coarsest level");
        let mut x = vec![0.0; b.len()];
        smoother.smooth(op, &mut x, b);
        let r = op.residual(b, &x);
        let rc = transfer.restrict(&r).expect("restriction length");
        let mut ec = self.cycle_at(k + 1, &rc);
        if self.kind == CycleKind::W && k + 2 < self.levels.len() {
            let rc2 = self.levels[k + 1].op.residual(&rc, &ec);
            let e2 = self.cycle_at(k + 1, &rc2);
            for (a, d) in ec.iter_mut().zip(&e2) {
                *a += d;
            }
        }
        let ef = transfer.prolong(&ec).expect("prolongation length");
        for (a, d) in x.iter_mut().zip(&ef) {
            *a += d;
        }
        smoother.smooth(op, &mut x, b);
        x
    }
}

impl LinearOperator for MgHierarchy {
    fn dim(&self) -> usize {
        self.finest().len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.cycle_at(0, x));
    }
}

/// Stand-alone iteration `x ← x + cycle(b − L̃x)` on the penalized operator.
pub fn mg_solve(h: &MgHierarchy, b: &[f64], tol: f64, maxit: usize) -> Result<SolveOutcome> {
    mg_solve_from(h, b, vec![0.0; b.len()], tol, maxit)
}

/// As `mg_solve` with an explicit starting vector.
pub fn mg_solve_from(h: &MgHierarchy, b: &[f64], x0: Vec<f64>, tol: f64, maxit: usize) -> Result<SolveOutcome> {
    let op = h.finest();
    if b.len() != op.len() || x0.len() != op.len() {
        return Err(StokesError::LengthMismatch { expected: op.len(), actual: b.len().min(x0.len()) });
    }
    if !(tol > 0.0) {
        return Err(StokesError::InvalidConfig("tolerance must be positive".into()));
    }
    let start = Instant::now();
    let mut x = x0;
    let mut history = History::default();
    let mut r = op.residual(b, &x);
    let mut rel = relative_residual(&r, b);
    history.push(0, rel, start.elapsed().as_secs_f64());
    let mut status = SolveStatus::MaxIterations;
    if rel < tol {
        status = SolveStatus::Converged;
    } else {
        for it in 1..=maxit {
            let e = h.cycle_at(0, &r);
            for (a, d) in x.iter_mut().zip(&e) {
                *a += d;
            }
            r = op.residual(b, &x);
            rel = relative_residual(&r, b);
            history.push(it, rel, start.elapsed().as_secs_f64());
            if !rel.is_finite() {
                status = SolveStatus::Breakdown;
                break;
            }
            if rel < tol {
                status = SolveStatus::Converged;
                break;
            }
        }
    }
    Ok(SolveOutcome { x, history, status })
}
