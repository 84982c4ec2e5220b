//! Classical vector frames `{f_i}` in `𝔽ⁿ`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::hilbert::{self, check_dim, Operator};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// Lower and upper frame bounds `A ≤ B`.
///
/// Bounds produced by eigenanalysis are optimal. The lower bound is the
/// smallest eigenvalue of the relevant Hermitian operator and is kept signed:
/// a negative value means the quadratic form is indefinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub optimal: bool,
}

impl FrameBounds {
    pub fn optimal(lower: f64, upper: f64) -> Self {
        Self { lower, upper, optimal: true }
    }

    pub fn predicted(lower: f64, upper: f64) -> Self {
        Self { lower, upper, optimal: false }
    }

    /// `A > tol.frame · max(1, B)`.
    pub fn is_frame(&self, tol: &Tolerances) -> bool {
        self.lower > tol.frame * self.upper.max(1.0)
    }

    pub fn is_tight(&self, tol: &Tolerances) -> bool {
        self.is_frame(tol) && self.upper - self.lower <= tol.tight * self.upper.max(1.0)
    }

    pub fn is_parseval(&self, tol: &Tolerances) -> bool {
        self.is_tight(tol) && (self.lower - 1.0).abs() <= tol.tight && (self.upper - 1.0).abs() <= tol.tight
    }

    /// `self.lower ≤ other.lower + slack` and `other.upper ≤ self.upper + slack`.
    pub fn contains(&self, other: &FrameBounds, slack: f64) -> bool {
        self.lower <= other.lower + slack && other.upper <= self.upper + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFrame<T: Scalar> {
    dim: usize,
    vectors: Vec<DVector<T>>,
}

impl<T: Scalar> VectorFrame<T> {
    pub fn new(vectors: Vec<DVector<T>>) -> Result<Self> {
        let dim = vectors.first().ok_or(FrameError::Empty { what: "frame" })?.len();
        if dim == 0 {
            return Err(FrameError::Empty { what: "frame vector" });
        }
        for v in &vectors {
            check_dim(dim, v.len())?;
            if !v.iter().all(|x| x.is_finite()) {
                return Err(FrameError::NonFinite { what: "frame vector" });
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[DVector<T>] {
        &self.vectors
    }

    /// The `n × m` matrix `T` with the frame vectors as columns.
    pub fn synthesis_matrix(&self) -> DMatrix<T> {
        DMatrix::from_columns(&self.vectors)
    }

    /// `S = Σ f_i f_i* = T T*`.
    pub fn frame_operator(&self) -> Operator<T> {
        let mut s = DMatrix::zeros(self.dim, self.dim);
        for f in &self.vectors {
            s += f * f.adjoint();
        }
        Operator::new(s).expect("finite square frame operator")
    }

    /// Optimal bounds: the extremal eigenvalues of `S`.
    pub fn frame_bounds(&self) -> FrameBounds {
        let eig = hilbert::eigen_of_hermitian_part(self.frame_operator().as_matrix());
        FrameBounds::optimal(eig.min(), eig.max())
    }

    /// `T* f = (⟨f, f_i⟩)_i`.
    pub fn analyze(&self, f: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.dim, f.len())?;
        Ok(DVector::from_iterator(
            self.vectors.len(),
            self.vectors.iter().map(|fi| hilbert::inner(f, fi)),
        ))
    }

    /// `T c = Σ c_i f_i`.
    pub fn synthesize(&self, coefficients: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.vectors.len(), coefficients.len())?;
        let mut out = DVector::zeros(self.dim);
        for (fi, &c) in self.vectors.iter().zip(coefficients.iter()) {
            out.axpy(c, fi, T::one());
        }
        Ok(out)
    }

    /// `Σ |⟨f, f_i⟩|²`.
    pub fn quadratic_form(&self, f: &DVector<T>) -> Result<f64> {
        Ok(self.analyze(f)?.norm_squared())
    }

    /// Canonical dual frame `{S⁻¹ f_i}`.
    pub fn canonical_dual(&self, tol: &Tolerances) -> Result<Self> {
        let bounds = self.frame_bounds();
        if !bounds.is_frame(tol) {
            return Err(FrameError::NotAFrame { lower: bounds.lower });
        }
        let s = self.frame_operator();
        let inv = s
            .as_matrix()
            .clone()
            .try_inverse()
            .ok_or(FrameError::SingularOperator { condition: f64::INFINITY })?;
        Self::new(self.vectors.iter().map(|f| &inv * f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn repeated_e1() -> VectorFrame<f64> {
        VectorFrame::new(vec![v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn frame_operator_examples() {
        let onb = VectorFrame::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        assert_eq!(*onb.frame_operator().as_matrix(), DMatrix::identity(2, 2));
        assert_eq!(*repeated_e1().frame_operator().as_matrix(), DMatrix::from_diagonal(&v(&[2.0, 1.0])));
        let single = VectorFrame::new(vec![v(&[1.0, 0.0])]).unwrap();
        assert_eq!(*single.frame_operator().as_matrix(), DMatrix::from_diagonal(&v(&[1.0, 0.0])));
    }

    #[test]
    fn bounds_and_classification() {
        let tol = Tolerances::default();
        let onb = VectorFrame::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let b = onb.frame_bounds();
        assert!(b.is_parseval(&tol));

        let b = repeated_e1().frame_bounds();
        assert_abs_diff_eq!(b.lower, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, 2.0, epsilon = 1e-15);
        assert!(b.is_frame(&tol) && !b.is_tight(&tol));

        let b = VectorFrame::new(vec![v(&[1.0, 0.0])]).unwrap().frame_bounds();
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-15);
        assert!(!b.is_frame(&tol));
    }

    #[test]
    fn analysis_synthesis_examples() {
        let onb = VectorFrame::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let c = onb.analyze(&v(&[3.0, 4.0])).unwrap();
        assert_eq!(c, v(&[3.0, 4.0]));
        assert_eq!(onb.synthesize(&c).unwrap(), v(&[3.0, 4.0]));

        let frame = repeated_e1();
        let c = frame.analyze(&v(&[1.0, 2.0])).unwrap();
        assert_eq!(c, v(&[1.0, 1.0, 2.0]));
        assert_eq!(frame.synthesize(&c).unwrap(), v(&[2.0, 2.0]));

        let zero = frame.analyze(&v(&[0.0, 0.0])).unwrap();
        assert_eq!(zero, DVector::zeros(3));
        assert_eq!(frame.synthesize(&zero).unwrap(), DVector::zeros(2));

        assert!(matches!(frame.analyze(&v(&[1.0])), Err(FrameError::DimensionMismatch { .. })));
        assert!(matches!(frame.synthesize(&v(&[1.0])), Err(FrameError::DimensionMismatch { .. })));
    }

    #[test]
    fn canonical_dual_reconstructs() {
        let tol = Tolerances::default();
        let frame = repeated_e1();
        let dual = frame.canonical_dual(&tol).unwrap();
        let f = v(&[0.3, -1.7]);
        let c = frame.analyze(&f).unwrap();
        assert_abs_diff_eq!(dual.synthesize(&c).unwrap(), f, epsilon = 1e-14);

        let deficient = VectorFrame::new(vec![v(&[1.0, 0.0])]).unwrap();
        assert!(matches!(deficient.canonical_dual(&tol), Err(FrameError::NotAFrame { .. })));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(VectorFrame::<f64>::new(vec![]).is_err());
        assert!(VectorFrame::new(vec![v(&[1.0]), v(&[1.0, 2.0])]).is_err());
    }
}
