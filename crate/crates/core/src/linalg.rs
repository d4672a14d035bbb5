//! Small dense linear algebra and the `LinearOperator` abstraction shared by
//! the operators, smoothers, multigrid cycles and Krylov solvers.

use std::io::Write;

use crate::error::{Result, StokesError};

/// A square linear map applied into a caller-provided output buffer.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

/// Identity map, the un-preconditioned baseline.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Wraps a closure as a linear operator.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[f64], &mut [f64]) + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = col[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, o) in dst.iter_mut().zip(orow) {
                    *d += a * o;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        norm_inf(&self.data)
    }

    /// Matrix Market coordinate format, nonzeros only, 1-based indices.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let nnz = self.data.iter().filter(|&&v| v != 0.0).count();
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.rows, self.cols, nnz)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self[(i, j)];
                if v != 0.0 {
                    writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
                }
            }
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }
}

/// LU factorization with partial (row) pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(StokesError::SingularMatrix(k));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let (upper, lower) = lu.split_at_mut((k + 1) * n);
            let krow = &upper[k * n..(k + 1) * n];
            for row in lower.chunks_exact_mut(n) {
                let f = row[k] / pivot;
                row[k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        row[j] -= f * krow[j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s = dot(row, &y[..i]);
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s = dot(&row[i + 1..], &y[i + 1..]);
            y[i] = (y[i] - s) / row[i];
        }
        b.copy_from_slice(&y);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Fixed-size LU for the small local saddle-point blocks (at most 7x7).
#[derive(Clone, Debug, PartialEq)]
pub struct SmallLu {
    n: usize,
    lu: [[f64; 7]; 7],
    perm: [usize; 7],
}

pub const SMALL_LU_MAX: usize = 7;

impl SmallLu {
    pub fn factor(n: usize, a: &[[f64; 7]; 7]) -> Result<Self> {
        assert!(n <= SMALL_LU_MAX);
        let mut lu = *a;
        let mut perm = [0usize, 1, 2, 3, 4, 5, 6];
        let mut scale = 0.0f64;
        for row in lu.iter().take(n) {
            for v in row.iter().take(n) {
                scale = scale.max(v.abs());
            }
        }
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[i][k].abs() > lu[p][k].abs() {
                    p = i;
                }
            }
            if lu[p][k] == 0.0 || lu[p][k].abs() <= scale * 1e-14 {
                return Err(StokesError::SingularMatrix(k));
            }
            lu.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let f = lu[i][k] / lu[k][k];
                lu[i][k] = f;
                for j in k + 1..n {
                    lu[i][j] -= f * lu[k][j];
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn solve(&self, b: &[f64; 7]) -> [f64; 7] {
        let n = self.n;
        let mut y = [0.0; 7];
        for i in 0..n {
            y[i] = b[self.perm[i]];
        }
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i][j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i][j] * y[j];
            }
            y[i] /= self.lu[i][i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_pivoting_system() {
        let a = DenseMatrix::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, -1.0, 0.0],
            vec![3.0, 0.0, -2.0],
        ]);
        let x = vec![1.0, 2.0, 3.0];
        let b = a.matvec(&x);
        let sol = DenseLu::factor(&a).unwrap().solve(&b);
        for (s, e) in sol.iter().zip(&x) {
            assert!((s - e).abs() < 1e-14);
        }
    }

    #[test]
    fn lu_reports_singular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(DenseLu::factor(&a), Err(StokesError::SingularMatrix(1))));
    }

    #[test]
    fn small_lu_matches_dense() {
        let mut a = [[0.0; 7]; 7];
        let rows = [[4.0, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, 2.0, -1.0]];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = rows[i][j];
            }
        }
        let lu = SmallLu::factor(3, &a).unwrap();
        let mut b = [0.0; 7];
        b[..3].copy_from_slice(&[1.0, 2.0, 3.0]);
        let x = lu.solve(&b);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| rows[i][j] * x[j]).sum();
            assert!((r - b[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn matrix_market_header() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -2.0]]);
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("%%MatrixMarket matrix coordinate real general\n2 2 2\n"));
    }
}
