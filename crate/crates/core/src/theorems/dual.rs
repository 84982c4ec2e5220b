use nalgebra::DMatrix;

use super::{flag, TheoremId, TheoremReport};
use crate::controlled::{ControlPair, ControlledFusionFrame};
use crate::error::{FrameError, Result};
use crate::frames::FrameBounds;
use crate::fusion::WeightedSubspaceFamily;
use crate::hilbert::{self, check_dim, Operator};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// `C = C′ = F^{-1/2}` with `F` the fusion frame operator, so that
/// `S_W = F^{-1/2} F F^{-1/2} = Id`.
pub fn canonical_parseval_controls<T: Scalar>(
    family: &WeightedSubspaceFamily<T>,
    tol: &Tolerances,
) -> Result<ControlPair<T>> {
    let f = family.fusion_frame_operator();
    let eig = hilbert::hermitian_eigen(f.as_matrix(), tol)?;
    if eig.min() <= tol.frame * eig.max().max(1.0) {
        return Err(FrameError::NotAFrame { lower: eig.min() });
    }
    let c = Operator::new(eig.recompose_with(|x| 1.0 / x.sqrt()))?;
    ControlPair::squared(c, tol)
}

/// `ε = ‖Id − T*_Z T_W‖`. With `ε < 1` both families are frames; the
/// predicted lower bounds are `(1−ε)²/B_W` for `W` and `(1−ε)²/B_Z` for `Z`.
///
/// The report's main bounds are those of `W`; the `Z` side is in the
/// diagnostics and enters `containment_ok`. The crossed pairing
/// `(1−ε)²/B_Z` for `W` is reported as well.
pub fn verify_approximate_dual<T: Scalar>(
    w: &ControlledFusionFrame<T>,
    z: &ControlledFusionFrame<T>,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    check_dim(w.dim(), z.dim())?;
    check_dim(w.len(), z.len())?;
    let tw = w.analysis_matrix(tol)?;
    let tz = z.analysis_matrix(tol)?;
    let n = w.dim();
    let epsilon = hilbert::operator_norm(&(DMatrix::<T>::identity(n, n) - tz.adjoint() * &tw));

    let bw = w.bounds(tol).bounds;
    let bz = z.bounds(tol).bounds;
    let hypothesis = epsilon < 1.0;
    let gap = (1.0 - epsilon).max(0.0).powi(2);
    let predicted_w = FrameBounds::predicted(gap / bw.upper, bw.upper);
    let predicted_z = FrameBounds::predicted(gap / bz.upper, bz.upper);
    let crossed_w = gap / bz.upper;
    let crossed_z = gap / bw.upper;

    let mut report = TheoremReport::new(TheoremId::ApproximateDual, hypothesis, predicted_w, bw, tol.containment);
    let z_ok = predicted_z.contains(&bz, tol.containment);
    report.containment_ok &= z_ok;
    report
        .diag("epsilon", epsilon)
        .diag("z_predicted_lower", predicted_z.lower)
        .diag("z_actual_lower", bz.lower)
        .diag("z_actual_upper", bz.upper)
        .diag("z_containment_ok", flag(z_ok))
        .diag("crossed_w_lower", crossed_w)
        .diag("crossed_z_lower", crossed_z)
        .diag(
            "crossed_containment_ok",
            flag(crossed_w <= bw.lower + tol.containment && crossed_z <= bz.lower + tol.containment),
        );
    if w.family().weights() != z.family().weights() || w.controls() != z.controls() {
        report.note("W and Z differ in weights or controls");
    }
    if !hypothesis {
        report.note(format!("ε = {epsilon} is not below 1"));
    }
    Ok(report)
}
