//! Dense linear algebra on `H = 𝔽ⁿ`.
//!
//! Bounded operators are square matrices ([`Operator`]), closed subspaces
//! are column spans of orthonormal bases ([`SubspaceBasis`]). Eigen and
//! singular value computations go through nalgebra's dense, deterministic
//! routines.

mod qr;

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

pub use qr::PivotedQr;

/// A bounded operator on `𝔽ⁿ`: a square matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Scalar>(DMatrix<T>);

impl<T: Scalar> Operator<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(FrameError::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(FrameError::Empty { what: "operator" });
        }
        if !matrix.iter().all(|x| x.is_finite()) {
            return Err(FrameError::NonFinite { what: "operator" });
        }
        Ok(Self(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Builds an operator from row-major rows.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(FrameError::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn apply(&self, f: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.dim(), f.len())?;
        Ok(&self.0 * f)
    }
}

impl<T: Scalar> Deref for Operator<T> {
    type Target = DMatrix<T>;

    fn deref(&self) -> &DMatrix<T> {
        &self.0
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(FrameError::DimensionMismatch { expected, found })
    }
}

/// An `n × k` matrix with orthonormal columns; its span is a closed subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis<T: Scalar> {
    columns: DMatrix<T>,
}

impl<T: Scalar> SubspaceBasis<T> {
    /// Wraps columns that are already orthonormal, within `tol.orth` (relative).
    pub fn from_orthonormal(columns: DMatrix<T>, tol: &Tolerances) -> Result<Self> {
        let (n, k) = columns.shape();
        if k == 0 || n == 0 {
            return Err(FrameError::ZeroSubspace);
        }
        if k > n {
            return Err(FrameError::DimensionMismatch { expected: n, found: k });
        }
        if !columns.iter().all(|x| x.is_finite()) {
            return Err(FrameError::NonFinite { what: "subspace basis" });
        }
        let residual = (columns.adjoint() * &columns - DMatrix::identity(k, k)).norm();
        if residual > tol.orth * (k as f64).max(1.0) {
            return Err(FrameError::NotOrthonormal { residual });
        }
        Ok(Self { columns })
    }

    /// The coordinate subspace spanned by `e_i` for the given indices.
    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Result<Self> {
        if axes.is_empty() {
            return Err(FrameError::ZeroSubspace);
        }
        let mut columns = DMatrix::zeros(ambient_dim, axes.len());
        for (j, &axis) in axes.iter().enumerate() {
            if axis >= ambient_dim {
                return Err(FrameError::DimensionMismatch {
                    expected: ambient_dim,
                    found: axis + 1,
                });
            }
            columns[(axis, j)] = T::one();
        }
        Self::from_orthonormal(columns, &Tolerances::default())
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<T> {
        &self.columns
    }

    pub fn vectors(&self) -> Vec<DVector<T>> {
        self.columns.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn contains(&self, f: &DVector<T>, tol: f64) -> bool {
        let p = projection(self);
        (p.as_matrix() * f - f).norm() <= tol * f.norm().max(1.0)
    }
}

/// Orthonormal basis of `span(vectors)`.
///
/// The numerical rank counts singular values above `tol.rank · σ_max`; the
/// basis is the leading block of a column-pivoted QR factorisation.
pub fn orthonormalize<T: Scalar>(vectors: &[DVector<T>], tol: &Tolerances) -> Result<SubspaceBasis<T>> {
    let first = vectors.first().ok_or(FrameError::Empty { what: "vector list" })?;
    let n = first.len();
    if n == 0 {
        return Err(FrameError::ZeroSubspace);
    }
    for v in vectors {
        check_dim(n, v.len())?;
        if !v.iter().all(|x| x.is_finite()) {
            return Err(FrameError::NonFinite { what: "spanning vector" });
        }
    }
    let a = DMatrix::from_columns(vectors);
    orthonormalize_columns(&a, tol)
}

/// Orthonormal basis of the column span of `a`.
pub fn orthonormalize_columns<T: Scalar>(a: &DMatrix<T>, tol: &Tolerances) -> Result<SubspaceBasis<T>> {
    let rank = numerical_rank(a, tol);
    if rank == 0 {
        return Err(FrameError::ZeroSubspace);
    }
    let q = PivotedQr::new(a).leading_q(rank);
    Ok(SubspaceBasis { columns: q })
}

/// Orthogonal projection `π = Q Q*` onto the span of `basis`.
pub fn projection<T: Scalar>(basis: &SubspaceBasis<T>) -> Operator<T> {
    let q = basis.columns();
    Operator(q * q.adjoint())
}

/// `(M + M*) / 2`.
pub fn hermitian_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.adjoint()).scale(0.5)
}

/// `‖M − M*‖_F / max(1, ‖M‖_F)`.
pub fn hermitian_residual<T: Scalar>(m: &DMatrix<T>) -> f64 {
    (m - m.adjoint()).norm() / m.norm().max(1.0)
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Scalar> {
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector for `eigenvalues[j]`.
    pub eigenvectors: DMatrix<T>,
}

impl<T: Scalar> HermitianEigen<T> {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn vector(&self, j: usize) -> DVector<T> {
        self.eigenvectors.column(j).into_owned()
    }

    /// `V f(Λ) V*`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<T> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Fails with [`FrameError::NotHermitian`] when the relative Hermitian
/// residual exceeds `tol.herm`; otherwise the Hermitian part is decomposed.
pub fn hermitian_eigen<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> Result<HermitianEigen<T>> {
    if m.nrows() != m.ncols() {
        return Err(FrameError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let residual = hermitian_residual(m);
    if residual > tol.herm {
        return Err(FrameError::NotHermitian { residual });
    }
    Ok(eigen_of_hermitian_part(m))
}

/// Eigendecomposition of `(M + M*) / 2`, with no Hermitian check.
pub fn eigen_of_hermitian_part<T: Scalar>(m: &DMatrix<T>) -> HermitianEigen<T> {
    let h = hermitian_part(m);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let columns: Vec<DVector<T>> = order.iter().map(|&j| eig.eigenvectors.column(j).into_owned()).collect();
    HermitianEigen {
        eigenvalues,
        eigenvectors: DMatrix::from_columns(&columns),
    }
}

/// `V |Λ| V*` for the Hermitian part of `m`.
pub fn spectral_abs<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let abs = eigen_of_hermitian_part(m).recompose_with(f64::abs);
    hermitian_part(&abs)
}

/// Principal square root of a Hermitian positive semidefinite operator.
///
/// Eigenvalues in `[-tol.psd · max(1, λ_max), 0)` are clipped to zero;
/// anything more negative is rejected with [`FrameError::NotPsd`].
pub fn principal_sqrt_psd<T: Scalar>(op: &DMatrix<T>, tol: &Tolerances) -> Result<Operator<T>> {
    let eig = hermitian_eigen(op, tol)?;
    let floor = -tol.psd * eig.max().max(1.0);
    if eig.min() < floor {
        return Err(FrameError::NotPsd { eigenvalue: eig.min() });
    }
    let root = eig.recompose_with(|l| l.max(0.0).sqrt());
    Ok(Operator(hermitian_part(&root)))
}

/// Singular values in descending order.
pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm: the largest singular value.
pub fn operator_norm<T: Scalar>(m: &DMatrix<T>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Number of singular values above `tol.rank · σ_max`.
pub fn numerical_rank<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&max) if max > 0.0 => s.iter().filter(|&&x| x > tol.rank * max).count(),
        _ => 0,
    }
}

/// Moore–Penrose pseudo-inverse with relative cutoff `tol.rank`.
pub fn pseudo_inverse<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return DMatrix::zeros(cols, rows);
    }
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V* requested");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.rank * max;
    let mut result = DMatrix::zeros(cols, rows);
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if max > 0.0 && s > cutoff {
            let vj = v_t.row(j).adjoint();
            let uj = u.column(j);
            result += (vj * uj.adjoint()).unscale(s);
        }
    }
    result
}

/// Solves `op · x = g` by LU with partial pivoting.
pub fn solve<T: Scalar>(op: &DMatrix<T>, g: &DVector<T>) -> Option<DVector<T>> {
    op.clone().lu().solve(g)
}

/// `⟨x, y⟩ = Σ x_i conj(y_i)`, linear in the first argument.
pub fn inner<T: Scalar>(x: &DVector<T>, y: &DVector<T>) -> T {
    y.dotc(x)
}

/// Singular-value summary used for `GL(H)` / `GL⁺(H)` membership.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvertibilityReport {
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    pub condition_number: f64,
    pub is_invertible: bool,
    /// Hermitian with strictly positive spectrum.
    pub is_positive: bool,
}

pub fn check_gl<T: Scalar>(op: &DMatrix<T>, tol: &Tolerances) -> InvertibilityReport {
    let s = singular_values(op);
    let largest = s.first().copied().unwrap_or(0.0);
    let smallest = s.last().copied().unwrap_or(0.0);
    let is_invertible = op.is_square() && largest > 0.0 && smallest > tol.inv * largest;
    let condition_number = if smallest > 0.0 { largest / smallest } else { f64::INFINITY };
    let is_positive = is_invertible
        && hermitian_residual(op) <= tol.herm
        && eigen_of_hermitian_part(op).min() > tol.inv * largest;
    InvertibilityReport {
        smallest_singular_value: smallest,
        largest_singular_value: largest,
        condition_number,
        is_invertible,
        is_positive,
    }
}
