//! Fusion frames: weighted families of subspaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{FrameError, Result};
use crate::frames::FrameBounds;
use crate::hilbert::{self, check_dim, Operator, SubspaceBasis};
use crate::scalar::Scalar;

/// `{(W_i, v_i)}` with `v_i > 0`. Weights are stored unsquared.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSubspaceFamily<T: Scalar> {
    dim: usize,
    subspaces: Vec<SubspaceBasis<T>>,
    weights: Vec<f64>,
    projections: Vec<Operator<T>>,
}

impl<T: Scalar> WeightedSubspaceFamily<T> {
    pub fn new(items: Vec<(SubspaceBasis<T>, f64)>) -> Result<Self> {
        let dim = items
            .first()
            .ok_or(FrameError::Empty { what: "subspace family" })?
            .0
            .ambient_dim();
        for (index, (basis, weight)) in items.iter().enumerate() {
            check_dim(dim, basis.ambient_dim())?;
            if !(weight.is_finite() && *weight > 0.0) {
                return Err(FrameError::InvalidWeight { index, value: *weight });
            }
        }
        let (subspaces, weights): (Vec<_>, Vec<_>) = items.into_iter().unzip();
        let projections = subspaces.iter().map(hilbert::projection).collect();
        Ok(Self {
            dim,
            subspaces,
            weights,
            projections,
        })
    }

    /// Same weights, different subspaces.
    pub fn with_subspaces(&self, subspaces: Vec<SubspaceBasis<T>>) -> Result<Self> {
        check_dim(self.len(), subspaces.len())?;
        Self::new(subspaces.into_iter().zip(self.weights.iter().copied()).collect())
    }

    /// Same subspaces, different weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        check_dim(self.len(), weights.len())?;
        Self::new(self.subspaces.iter().cloned().zip(weights).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[SubspaceBasis<T>] {
        &self.subspaces
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `π_{W_i}` for every index.
    pub fn projections(&self) -> &[Operator<T>] {
        &self.projections
    }

    /// `Σ v_i² π_{W_i}`.
    pub fn fusion_frame_operator(&self) -> Operator<T> {
        let mut s = DMatrix::zeros(self.dim, self.dim);
        for (p, &w) in self.projections.iter().zip(&self.weights) {
            s += p.as_matrix().scale(w * w);
        }
        Operator::new(s).expect("finite fusion frame operator")
    }

    /// Extremal eigenvalues of the fusion frame operator.
    pub fn fusion_bounds(&self) -> FrameBounds {
        let eig = hilbert::eigen_of_hermitian_part(self.fusion_frame_operator().as_matrix());
        FrameBounds::optimal(eig.min(), eig.max())
    }

    /// `Σ v_i² ‖π_{W_i} h‖²`.
    pub fn quadratic_form(&self, h: &DVector<T>) -> Result<f64> {
        check_dim(self.dim, h.len())?;
        Ok(self
            .projections
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * w * (p.as_matrix() * h).norm_squared())
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coord(n: usize, axes: &[usize]) -> SubspaceBasis<f64> {
        SubspaceBasis::coordinate(n, axes).unwrap()
    }

    #[test]
    fn coordinate_lines_are_parseval() {
        let family = WeightedSubspaceFamily::new((0..4).map(|i| (coord(4, &[i]), 1.0)).collect()).unwrap();
        assert_eq!(*family.fusion_frame_operator().as_matrix(), DMatrix::identity(4, 4));
        let b = family.fusion_bounds();
        assert_abs_diff_eq!(b.lower, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn coordinate_planes_cover_twice() {
        let family = WeightedSubspaceFamily::new(vec![
            (coord(3, &[0, 1]), 1.0),
            (coord(3, &[1, 2]), 1.0),
            (coord(3, &[0, 2]), 1.0),
        ])
        .unwrap();
        assert_eq!(*family.fusion_frame_operator().as_matrix(), DMatrix::identity(3, 3) * 2.0);
        let b = family.fusion_bounds();
        assert_abs_diff_eq!(b.lower, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn whole_space_and_deficient() {
        let whole = WeightedSubspaceFamily::new(vec![(coord(3, &[0, 1, 2]), 1.0)]).unwrap();
        assert_eq!(*whole.fusion_frame_operator().as_matrix(), DMatrix::identity(3, 3));

        let line = WeightedSubspaceFamily::new(vec![(coord(2, &[0]), 1.0)]).unwrap();
        let b = line.fusion_bounds();
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_are_squared_at_assembly() {
        let family = WeightedSubspaceFamily::new(vec![(coord(2, &[0]), 3.0), (coord(2, &[1]), 0.5)]).unwrap();
        assert_eq!(family.weights(), &[3.0, 0.5]);
        assert_eq!(*family.fusion_frame_operator().as_matrix(), DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 0.25])));
        let h = DVector::from_vec(vec![1.0, 2.0]);
        assert_abs_diff_eq!(family.quadratic_form(&h).unwrap(), 9.0 + 0.25 * 4.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_invalid_families() {
        assert!(matches!(
            WeightedSubspaceFamily::new(vec![(coord(2, &[0]), 0.0)]),
            Err(FrameError::InvalidWeight { index: 0, .. })
        ));
        assert!(matches!(
            WeightedSubspaceFamily::new(vec![(coord(2, &[0]), 1.0), (coord(3, &[0]), -1.0)]),
            Err(FrameError::DimensionMismatch { .. })
        ));
        assert!(WeightedSubspaceFamily::<f64>::new(vec![]).is_err());
    }
}
