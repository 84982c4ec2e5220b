use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{flag, TheoremId, TheoremReport};
use crate::controlled::ControlledFusionFrame;
use crate::error::{FrameError, Result};
use crate::frames::FrameBounds;
use crate::hilbert::{self, check_dim, Operator};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformMode {
    /// `u` invertible with `u* C = C u*`.
    AdjointCommuting,
    /// `u` unitary with `u C = C u`.
    UnitaryCommuting,
}

fn relative(m: &DMatrix<impl Scalar>, scale: f64) -> f64 {
    m.norm() / scale.max(1.0)
}

/// Moves every subspace by `u` and compares the new optimal bounds with
/// `(A/κ, Bκ)`, `κ = ‖u‖²‖u⁻¹‖²`.
pub fn verify_transform<T: Scalar>(
    frame: &ControlledFusionFrame<T>,
    u: &Operator<T>,
    mode: TransformMode,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    check_dim(frame.dim(), u.dim())?;
    let controls = frame.controls();
    let squared = controls.squared_residual();
    if squared > tol.commute {
        return Err(FrameError::NotCSquared { residual: squared });
    }
    let c = controls.c().as_matrix();
    let um = u.as_matrix();
    let scale = c.norm() * um.norm();

    let gl = hilbert::check_gl(um, tol);
    if !gl.is_invertible {
        return Err(FrameError::HypothesisViolated(format!(
            "u is not invertible (smallest singular value {:e})",
            gl.smallest_singular_value
        )));
    }
    let (id, commutator) = match mode {
        TransformMode::AdjointCommuting => {
            let ua = um.adjoint();
            (TheoremId::TransformAdjoint, relative(&(&ua * c - c * &ua), scale))
        }
        TransformMode::UnitaryCommuting => (TheoremId::TransformUnitary, relative(&(um * c - c * um), scale)),
    };
    if commutator > tol.commute {
        return Err(FrameError::HypothesisViolated(format!(
            "commutation residual {commutator:e} exceeds {:e}",
            tol.commute
        )));
    }
    let mut unitary_residual = None;
    if mode == TransformMode::UnitaryCommuting {
        let n = u.dim();
        let r = (um.adjoint() * um - DMatrix::<T>::identity(n, n)).norm();
        if r > tol.commute {
            return Err(FrameError::HypothesisViolated(format!(
                "u*u − Id residual {r:e} exceeds {:e}",
                tol.commute
            )));
        }
        unitary_residual = Some(r);
    }

    let before = frame.bounds(tol);
    let moved = frame
        .family()
        .subspaces()
        .iter()
        .map(|b| hilbert::orthonormalize_columns(&(um * b.columns()), tol))
        .collect::<Result<Vec<_>>>()?;
    let image = frame.with_family(frame.family().with_subspaces(moved)?)?;
    let after = image.bounds(tol);

    let kappa = gl.largest_singular_value.powi(2) / gl.smallest_singular_value.powi(2);
    let (a, b) = (before.bounds.lower, before.bounds.upper);
    let predicted = FrameBounds::predicted(a / kappa, b * kappa);
    let hypothesis = before.form_is_real && before.bounds.is_frame(tol);
    let mut report = TheoremReport::new(id, hypothesis, predicted, after.bounds, tol.containment);
    report
        .diag("kappa", kappa)
        .diag("commutation_residual", commutator)
        .diag("c_squared_residual", squared)
        .diag("source_lower", a)
        .diag("source_upper", b)
        .diag("source_is_frame", flag(hypothesis));
    if let Some(r) = unitary_residual {
        report.diag("unitary_residual", r);
    }
    if !hypothesis {
        report.note("source family is not a controlled frame");
    }
    Ok(report)
}
