//! Householder QR with column-norm pivoting.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Column-pivoted QR factorisation `A P = Q R` of an `m × p` matrix.
///
/// Only the Householder vectors and the pivot order are kept; `Q` is
/// materialised on demand with [`PivotedQr::leading_q`].
pub struct PivotedQr<T: Scalar> {
    rows: usize,
    reflectors: Vec<DVector<T>>,
    r_diag: Vec<f64>,
    permutation: Vec<usize>,
}

impl<T: Scalar> PivotedQr<T> {
    pub fn new(a: &DMatrix<T>) -> Self {
        let (m, p) = a.shape();
        let steps = m.min(p);
        let mut work = a.clone();
        let mut permutation: Vec<usize> = (0..p).collect();
        let mut reflectors = Vec::with_capacity(steps);
        let mut r_diag = Vec::with_capacity(steps);

        for i in 0..steps {
            // Trailing column norms are recomputed each step; matrices here are small.
            let pivot = (i..p)
                .map(|j| (j, work.view((i, j), (m - i, 1)).norm_squared()))
                .fold((i, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
                .0;
            if pivot != i {
                work.swap_columns(i, pivot);
                permutation.swap(i, pivot);
            }

            let x: DVector<T> = work.view((i, i), (m - i, 1)).column(0).into_owned();
            let norm = x.norm();
            if norm == 0.0 {
                reflectors.push(DVector::zeros(m - i));
                r_diag.push(0.0);
                continue;
            }
            let x0 = x[0];
            let phase = if x0.modulus() > 0.0 {
                x0.scale(1.0 / x0.modulus())
            } else {
                T::one()
            };
            let alpha = phase.scale(-norm);
            let mut v = x;
            v[0] -= alpha;
            let v_norm = v.norm();
            if v_norm > 0.0 {
                v.unscale_mut(v_norm);
                let mut block = work.view_mut((i, i), (m - i, p - i));
                // block ← (I − 2 v v*) block
                let proj = v.adjoint() * &block;
                block -= (&v * proj).scale(2.0);
            }
            r_diag.push(alpha.modulus());
            reflectors.push(v);
        }

        Self {
            rows: m,
            reflectors,
            r_diag,
            permutation,
        }
    }

    /// `|R_ii|`, nonincreasing up to rounding.
    pub fn r_diagonal(&self) -> &[f64] {
        &self.r_diag
    }

    /// Column order chosen by the pivoting.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// First `k` columns of `Q`.
    pub fn leading_q(&self, k: usize) -> DMatrix<T> {
        assert!(k <= self.reflectors.len(), "requested {k} columns of Q");
        let mut q = DMatrix::<T>::identity(self.rows, k);
        for (i, v) in self.reflectors.iter().enumerate().take(k).rev() {
            let mut block = q.view_mut((i, 0), (self.rows - i, k));
            let proj = v.adjoint() * &block;
            block -= (v * proj).scale(2.0);
        }
        q
    }
}
