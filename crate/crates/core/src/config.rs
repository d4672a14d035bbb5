//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{classify_dofs, CellGrid};
use crate::error::{Result, StokesError};
use crate::krylov::Method;
use crate::multigrid::{CycleConfig, CycleKind};
use crate::scenarios::{build, Scenario, ScenarioSpec};
use crate::discretization::BoundaryData;
use crate::smoothers::{BoundarySmoother, SmootherConfig};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SOLVER_OUTPUT_DIR";

/// Coarsest level targeted by automatic level selection (unknowns).
const AUTO_COARSE_TARGET: usize = 1_500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emit {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default)]
    pub vtk: bool,
    /// Matrix Market dump of the finest operator (small problems only).
    #[serde(default)]
    pub matrix: bool,
    /// Write wall-clock seconds in the CSV; `false` writes zeros for byte-stable output.
    #[serde(default = "yes")]
    pub timings: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Self { csv: true, vtk: false, matrix: false, timings: true }
    }
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn small() -> f64 {
    1e-3
}
fn default_tol() -> f64 {
    1e-8
}
fn default_maxit() -> usize {
    200
}
fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in scenario; exclusive with `domain_file`.
    #[serde(default)]
    pub scenario: Option<ScenarioSpec>,
    /// Domain text file (zero boundary data); exclusive with `scenario`.
    #[serde(default)]
    pub domain_file: Option<PathBuf>,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub cycle: CycleKind,
    /// Number of multigrid levels; chosen automatically when absent.
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub boundary_smoother: BoundarySmoother,
    #[serde(default = "one")]
    pub sweeps: usize,
    #[serde(default = "one")]
    pub band_width: usize,
    #[serde(default = "small")]
    pub gamma: f64,
    #[serde(default = "small")]
    pub eta: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_maxit")]
    pub max_iterations: usize,
    #[serde(default = "unit")]
    pub omega: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit: Emit,
}

impl RunConfig {
    pub fn for_scenario(spec: ScenarioSpec) -> Self {
        serde_json::from_value(serde_json::json!({ "scenario": spec })).expect("default config")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| StokesError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(d), Some(parent)) = (&cfg.domain_file, path.parent()) {
            if d.is_relative() {
                cfg.domain_file = Some(parent.join(d));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(StokesError::InvalidConfig(m.to_string()));
        match (&self.scenario, &self.domain_file) {
            (Some(_), Some(_)) => return bad("give either scenario or domain_file, not both"),
            (None, None) => return bad("missing scenario"),
            _ => {}
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be positive");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol must lie in (0, 1)");
        }
        if self.levels == Some(0) {
            return bad("levels must be at least 1");
        }
        self.smoother().validate()
    }

    pub fn smoother(&self) -> SmootherConfig {
        SmootherConfig {
            kind: self.boundary_smoother,
            sweeps: self.sweeps,
            band_width: self.band_width,
            omega: self.omega,
            skip_reverse_dgs: false,
        }
    }

    pub fn cycle_config(&self, grid: &CellGrid) -> Result<CycleConfig> {
        let levels = match self.levels {
            Some(l) => l,
            None => auto_levels(grid)?,
        };
        Ok(CycleConfig { kind: self.cycle, levels, smoother: self.smoother() })
    }

    /// The configured problem: scenario builder output or a domain file with
    /// zero boundary data.
    pub fn problem(&self) -> Result<Scenario> {
        if let Some(spec) = &self.scenario {
            return build(spec);
        }
        let path = self.domain_file.as_ref().expect("validated");
        let grid = CellGrid::from_text(&std::fs::read_to_string(path)?)?;
        let map = classify_dofs(&grid);
        let bc = BoundaryData::zeros(&map);
        Ok(Scenario { spec: None, grid, map, bc })
    }

    /// Output directory: explicit override, then config, then the environment, then `.`.
    pub fn resolve_output_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_override {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from("."),
        }
    }
}

/// Coarsen until the coarsest level has at most about 1500 unknowns or a
/// further halving is impossible.
pub fn auto_levels(grid: &CellGrid) -> Result<usize> {
    let mut g = grid.clone();
    let mut levels = 1;
    loop {
        let n = classify_dofs(&g).len();
        let e = g.extents();
        let can = (0..g.dim()).all(|a| e[a] >= 4);
        if n <= AUTO_COARSE_TARGET || !can {
            return Ok(levels);
        }
        let c = g.coarsen()?;
        if classify_dofs(&c).is_empty() {
            return Ok(levels);
        }
        g = c;
        levels += 1;
    }
}
