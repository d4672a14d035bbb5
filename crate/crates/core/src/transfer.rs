//! Grid transfers between consecutive levels.
//!
//! Prolongation and restriction share one stencil table, so `P = c Rᵀ` holds
//! exactly (the scaling `c` is a power of two).

use crate::domain::{DofKind, DofMap, DofStatus};
use crate::error::{Result, StokesError};
use crate::linalg::DenseMatrix;

#[derive(Clone, Debug)]
pub struct TransferPair {
    fine_len: usize,
    coarse_len: usize,
    scale: f64,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

/// One-dimensional interpolation weights from a fine position to coarse positions.
fn normal_weights(fine_face: i64) -> ([(i64, f64); 2], usize) {
    if fine_face.rem_euclid(2) == 0 {
        ([(fine_face.div_euclid(2), 1.0), (0, 0.0)], 1)
    } else {
        let lo = fine_face.div_euclid(2);
        ([(lo, 0.5), (lo + 1, 0.5)], 2)
    }
}

fn tangential_weights(fine_cell: i64) -> [(i64, f64); 2] {
    let g = fine_cell.div_euclid(2);
    if fine_cell.rem_euclid(2) == 0 {
        [(g, 0.75), (g - 1, 0.25)]
    } else {
        [(g, 0.75), (g + 1, 0.25)]
    }
}

impl TransferPair {
    /// Builds the stencil table between `fine` and `coarse`, where `coarse`
    /// is the numbering of the coarsened grid.
    pub fn new(fine: &DofMap, coarse: &DofMap) -> Self {
        let dim = fine.dim();
        assert_eq!(dim, coarse.dim());
        let fo = fine.origin();
        let co = coarse.origin();
        let mut row_ptr = Vec::with_capacity(fine.len() + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        row_ptr.push(0);
        for j in 0..fine.len() {
            let loc = fine.location(j);
            let g = [
                fo[0] + loc.pos[0] as i64,
                fo[1] + loc.pos[1] as i64,
                fo[2] + loc.pos[2] as i64,
            ];
            match loc.kind {
                DofKind::Pressure => {
                    let mut c = [0i64; 3];
                    for a in 0..dim {
                        c[a] = g[a].div_euclid(2) - co[a];
                    }
                    if let DofStatus::Active(k) = coarse.cell_status_at(c) {
                        cols.push(k);
                        weights.push(1.0);
                    }
                }
                DofKind::Velocity(a) => {
                    // Per-axis candidate lists, then tensor product.
                    let mut axes: [Vec<(i64, f64)>; 3] = Default::default();
                    for b in 0..3 {
                        axes[b] = if b >= dim {
                            vec![(0, 1.0)]
                        } else if b == a {
                            let (w, n) = normal_weights(g[b]);
                            w[..n].iter().map(|&(i, v)| (i - co[b], v)).collect()
                        } else {
                            tangential_weights(g[b]).iter().map(|&(i, v)| (i - co[b], v)).collect()
                        };
                    }
                    for &(z, wz) in &axes[2] {
                        for &(y, wy) in &axes[1] {
                            for &(x, wx) in &axes[0] {
                                if let DofStatus::Active(k) = coarse.face_status_at(a, [x, y, z]) {
                                    cols.push(k);
                                    weights.push(wx * wy * wz);
                                }
                            }
                        }
                    }
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            fine_len: fine.len(),
            coarse_len: coarse.len(),
            scale: if dim == 3 { 8.0 } else { 4.0 },
            row_ptr,
            cols,
            weights,
        }
    }

    pub fn fine_len(&self) -> usize {
        self.fine_len
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_len
    }

    /// The constant `c` in `P = c Rᵀ`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Stencil of fine unknown `j` as `(coarse index, weight)` pairs.
    pub fn stencil(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[j]..self.row_ptr[j + 1];
        self.cols[r.clone()].iter().copied().zip(self.weights[r].iter().copied())
    }

    pub fn prolong_into(&self, xc: &[f64], xf: &mut [f64]) {
        for (j, out) in xf.iter_mut().enumerate() {
            *out = self.stencil(j).map(|(k, w)| w * xc[k]).sum();
        }
    }

    pub fn prolong(&self, xc: &[f64]) -> Result<Vec<f64>> {
        if xc.len() != self.coarse_len {
            return Err(StokesError::LengthMismatch { expected: self.coarse_len, actual: xc.len() });
        }
        let mut xf = vec![0.0; self.fine_len];
        self.prolong_into(xc, &mut xf);
        Ok(xf)
    }

    pub fn restrict_into(&self, rf: &[f64], rc: &mut [f64]) {
        rc.iter_mut().for_each(|v| *v = 0.0);
        for (j, &r) in rf.iter().enumerate() {
            for (k, w) in self.stencil(j) {
                rc[k] += w * r;
            }
        }
        let inv = 1.0 / self.scale;
        rc.iter_mut().for_each(|v| *v *= inv);
    }

    pub fn restrict(&self, rf: &[f64]) -> Result<Vec<f64>> {
        if rf.len() != self.fine_len {
            return Err(StokesError::LengthMismatch { expected: self.fine_len, actual: rf.len() });
        }
        let mut rc = vec![0.0; self.coarse_len];
        self.restrict_into(rf, &mut rc);
        Ok(rc)
    }

    /// Dense prolongation matrix (fine × coarse).
    pub fn prolongation_dense(&self) -> DenseMatrix {
        let mut p = DenseMatrix::zeros(self.fine_len, self.coarse_len);
        for j in 0..self.fine_len {
            for (k, w) in self.stencil(j) {
                p[(j, k)] += w;
            }
        }
        p
    }

    /// Dense restriction matrix (coarse × fine), built by restricting unit vectors.
    pub fn restriction_dense(&self) -> DenseMatrix {
        let mut r = DenseMatrix::zeros(self.coarse_len, self.fine_len);
        let mut e = vec![0.0; self.fine_len];
        let mut rc = vec![0.0; self.coarse_len];
        for j in 0..self.fine_len {
            e[j] = 1.0;
            self.restrict_into(&e, &mut rc);
            for (k, &v) in rc.iter().enumerate() {
                r[(k, j)] = v;
            }
            e[j] = 0.0;
        }
        r
    }
}
