use super::{flag, TheoremId, TheoremReport};
use crate::controlled::ControlledFusionFrame;
use crate::error::Result;
use crate::frames::FrameBounds;
use crate::hilbert;
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// Reads the bounds off the analysis operator: `‖T*_W‖² = B` and
/// `σ_min(T_W)² = ‖T_W†‖⁻² = A`, and checks `T*_W T_W = S_W`.
///
/// `T*_W` has full row rank exactly when the family is a frame.
pub fn verify_factorization<T: Scalar>(frame: &ControlledFusionFrame<T>, tol: &Tolerances) -> Result<TheoremReport> {
    let t = frame.analysis_matrix(tol)?;
    let n = frame.dim();
    let s = frame.frame_operator();
    let residual = hilbert::operator_norm(&(t.adjoint() * &t - s.as_matrix()));
    let sv = hilbert::singular_values(&t);
    let top = sv.first().copied().unwrap_or(0.0);
    let bottom = if sv.len() >= n { sv[n - 1] } else { 0.0 };
    let rank = hilbert::numerical_rank(&t.adjoint(), tol);

    let actual = frame.bounds(tol);
    let predicted = FrameBounds::predicted(bottom * bottom, top * top);
    let surjective = rank == n;
    let mut report = TheoremReport::new(TheoremId::Factorization, true, predicted, actual.bounds, tol.containment);
    // the identities are equalities, so check both directions
    report.containment_ok &= actual.bounds.contains(&predicted, tol.containment);
    report
        .diag("factorization_residual", residual)
        .diag("synthesis_norm_squared", top * top)
        .diag("pseudo_inverse_norm_inverse_squared", bottom * bottom)
        .diag("synthesis_rank", rank as f64)
        .diag("synthesis_surjective", flag(surjective))
        .diag("is_frame", flag(actual.bounds.is_frame(tol)));
    if surjective != actual.bounds.is_frame(tol) {
        report.note("synthesis rank and frame classification disagree");
    }
    Ok(report)
}
