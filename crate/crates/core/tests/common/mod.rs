#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use stokes_mg::discretization::LevelOperator;
use stokes_mg::domain::{classify_dofs, partition_band, CellGrid, CellLabel};
use stokes_mg::linalg::DenseMatrix;
use stokes_mg::scenarios::{build, ScenarioSpec};

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.data())
}

/// Operator assembled independently of the library: apply to unit vectors.
pub fn dense_by_columns(op: &LevelOperator) -> DMatrix<f64> {
    let n = op.len();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply(&e).unwrap();
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    m
}

pub fn materialize_na(n: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = f(&e);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
        e[j] = 0.0;
    }
    m
}

pub fn sym_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

pub fn cavity_grid(n: usize) -> CellGrid {
    build(&ScenarioSpec::cavity2d(n)).unwrap().grid
}

/// Penalized operator with a width-1 band on a built scenario.
pub fn banded_op(spec: &ScenarioSpec, eta: f64, gamma: f64) -> LevelOperator {
    let s = build(spec).unwrap();
    let map = partition_band(&s.grid, &s.map, 1);
    LevelOperator::new(s.grid, map, eta, gamma)
}

pub fn patch(dim: usize, n: usize, h: f64) -> CellGrid {
    let ext = vec![n; dim];
    CellGrid::filled(dim, &ext, h, CellLabel::Interior).unwrap()
}

pub fn patch_op(dim: usize, n: usize, h: f64, eta: f64, gamma: f64) -> LevelOperator {
    let g = patch(dim, n, h);
    let map = partition_band(&g, &classify_dofs(&g), 1);
    LevelOperator::new(g, map, eta, gamma)
}

/// Solve `L x = b` for the cavity with the pressure mean pinned by a border row.
pub fn bordered_solve(op: &LevelOperator, b: &[f64]) -> Vec<f64> {
    let n = op.len();
    let l = dense_by_columns(op);
    let mut a = DMatrix::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&l);
    for j in op.map().pressure_range() {
        a[(n, j)] = 1.0;
        a[(j, n)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i] = b[i];
    }
    let x = a.lu().solve(&rhs).expect("bordered system is nonsingular");
    x.iter().take(n).copied().collect()
}

pub fn subtract_pressure_mean(op: &LevelOperator, x: &mut [f64]) {
    let r = op.map().pressure_range();
    let mean = x[r.clone()].iter().sum::<f64>() / r.len() as f64;
    for v in &mut x[r] {
        *v -= mean;
    }
}
