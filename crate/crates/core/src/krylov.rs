//! Preconditioned symmetric QMR and the solver driver.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::discretization::LevelOperator;
use crate::error::{Result, StokesError};
use crate::linalg::{dot, norm2, LinearOperator};
use crate::multigrid::{mg_solve, MgHierarchy};

/// Magnitude below which `σ` or `ρ` counts as breakdown.
pub const BREAKDOWN: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Breakdown,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::Breakdown => "breakdown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub rel_residual: f64,
    pub seconds: f64,
}

/// True relative residual per iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    records: Vec<HistoryRecord>,
}

impl History {
    pub fn push(&mut self, iteration: usize, rel_residual: f64, seconds: f64) {
        if let Some(last) = self.records.last() {
            assert!(iteration > last.iteration, "history iterations must increase");
        }
        self.records.push(HistoryRecord { iteration, rel_residual, seconds });
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.rel_residual)
    }

    /// `iteration,rel_residual,seconds` with one row per record.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,rel_residual,seconds")?;
        for r in &self.records {
            writeln!(w, "{},{:.6e},{:.6}", r.iteration, r.rel_residual, r.seconds)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub history: History,
    pub status: SolveStatus,
}

/// `‖r‖₂ / ‖b‖₂`. For `b = 0` this is 0 if `r = 0` and infinite otherwise.
pub fn relative_residual(r: &[f64], b: &[f64]) -> f64 {
    let nb = norm2(b);
    let nr = norm2(r);
    if nb == 0.0 {
        if nr == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        nr / nb
    }
}

/// Symmetric QMR with a symmetric (possibly indefinite) preconditioner and
/// zero initial guess. Convergence is judged on the recomputed true residual.
pub fn sqmr_solve(
    l: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<SolveOutcome> {
    let n = l.dim();
    if b.len() != n {
        return Err(StokesError::LengthMismatch { expected: n, actual: b.len() });
    }
    if precond.dim() != n {
        return Err(StokesError::LengthMismatch { expected: n, actual: precond.dim() });
    }
    if !(tol > 0.0) {
        return Err(StokesError::InvalidConfig("tolerance must be positive".into()));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(StokesError::InvalidConfig("right-hand side is not finite".into()));
    }
    let start = Instant::now();
    let mut history = History::default();
    let mut x = vec![0.0; n];
    let nb = norm2(b);
    if nb == 0.0 {
        history.push(0, 0.0, start.elapsed().as_secs_f64());
        return Ok(SolveOutcome { x, history, status: SolveStatus::Converged });
    }
    history.push(0, 1.0, start.elapsed().as_secs_f64());

    let mut s = b.to_vec();
    let mut t = vec![0.0; n];
    precond.apply_into(&s, &mut t);
    let mut q = t.clone();
    let mut tau = norm2(&t);
    let mut nu_prev = 0.0;
    let mut rho = dot(&s, &q);
    let mut d = vec![0.0; n];
    let mut lx = vec![0.0; n];

    for j in 1..=maxit {
        l.apply_into(&q, &mut t);
        let sigma = dot(&q, &t);
        if sigma.abs() < BREAKDOWN || rho.abs() < BREAKDOWN {
            return Ok(SolveOutcome { x, history, status: SolveStatus::Breakdown });
        }
        let alpha = rho / sigma;
        for (si, ti) in s.iter_mut().zip(&t) {
            *si -= alpha * ti;
        }
        precond.apply_into(&s, &mut t);
        let nu = norm2(&t) / tau;
        let c = 1.0 / (1.0 + nu * nu).sqrt();
        tau = tau * nu * c;
        let c2 = c * c;
        for (di, qi) in d.iter_mut().zip(&q) {
            *di = c2 * nu_prev * nu_prev * *di + c2 * alpha * qi;
        }
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        nu_prev = nu;

        l.apply_into(&x, &mut lx);
        let r: Vec<f64> = b.iter().zip(&lx).map(|(bi, li)| bi - li).collect();
        let rel = norm2(&r) / nb;
        history.push(j, rel, start.elapsed().as_secs_f64());
        if rel < tol {
            return Ok(SolveOutcome { x, history, status: SolveStatus::Converged });
        }
        if !rel.is_finite() {
            return Ok(SolveOutcome { x, history, status: SolveStatus::Breakdown });
        }

        let rho_new = dot(&s, &t);
        let beta = rho_new / rho;
        rho = rho_new;
        for (qi, ti) in q.iter_mut().zip(&t) {
            *qi = ti + beta * *qi;
        }
    }
    Ok(SolveOutcome { x, history, status: SolveStatus::MaxIterations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mg,
    #[default]
    MgSqmr,
    Sqmr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mg => "mg",
            Method::MgSqmr => "mg-sqmr",
            Method::Sqmr => "sqmr",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = StokesError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mg" => Ok(Method::Mg),
            "mg-sqmr" => Ok(Method::MgSqmr),
            "sqmr" => Ok(Method::Sqmr),
            _ => Err(StokesError::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

/// Runs one method: `mg` iterates on `L̃`, `mg-sqmr` solves `L` with the
/// cycle on `L̃` as preconditioner, `sqmr` solves `L` unpreconditioned.
/// `l` must be the unpenalized operator on the finest grid of `h`.
pub fn solve_driver(
    method: Method,
    l: &LevelOperator,
    h: Option<&MgHierarchy>,
    b: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<SolveOutcome> {
    let need = || StokesError::InvalidConfig(format!("method {} needs a hierarchy", method.name()));
    match method {
        Method::Mg => mg_solve(h.ok_or_else(need)?, b, tol, maxit),
        Method::MgSqmr => sqmr_solve(l, h.ok_or_else(need)?, b, tol, maxit),
        Method::Sqmr => sqmr_solve(l, &crate::linalg::Identity(l.len()), b, tol, maxit),
    }
}
