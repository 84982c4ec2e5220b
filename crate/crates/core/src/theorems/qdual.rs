use nalgebra::DMatrix;
use serde::Serialize;

use super::{flag, TheoremId, TheoremReport};
use crate::controlled::ControlledFusionFrame;
use crate::error::{FrameError, Result};
use crate::frames::FrameBounds;
use crate::hilbert::{self, check_dim};
use crate::random;
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// Residuals of the three equivalent Q-dual conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QDualEquivalence {
    /// `‖T*_W̃ Q* T_W − Id‖`.
    pub adjoint_identity: f64,
    /// `‖T*_W Q T_W̃ − Id‖`.
    pub identity: f64,
    /// Largest deviation of `⟨Q* T_W f, T_W̃ g⟩` or `⟨Q T_W̃ f, T_W g⟩`
    /// from `⟨f, g⟩` over the sampled unit pairs.
    pub inner_product: f64,
    pub pairs: usize,
}

impl QDualEquivalence {
    pub fn max_residual(&self) -> f64 {
        self.adjoint_identity.max(self.identity).max(self.inner_product)
    }
}

/// `Q : K_W̃ → K_W` with `T*_W Q T_W̃ = Id`, stored as an `(m·n) × (m̃·n)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QDual<T: Scalar> {
    pub q: DMatrix<T>,
    pub defect: f64,
    pub q_norm: f64,
    pub equivalence: QDualEquivalence,
}

const PAIRS: usize = 100;

fn identity_defect<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let n = m.nrows();
    hilbert::operator_norm(&(m - DMatrix::<T>::identity(n, n)))
}

/// `Q = (T*_W)† (T_W̃)†`, its defect, and the three equivalent conditions
/// measured on `100` seeded unit pairs.
pub fn construct_q_dual<T: Scalar>(
    w: &ControlledFusionFrame<T>,
    w_tilde: &ControlledFusionFrame<T>,
    seed: u64,
    tol: &Tolerances,
) -> Result<QDual<T>> {
    check_dim(w.dim(), w_tilde.dim())?;
    let n = w.dim();
    let tw = w.analysis_matrix(tol)?;
    let tt = w_tilde.analysis_matrix(tol)?;
    let tw_star = tw.adjoint();
    let rank = hilbert::numerical_rank(&tw_star, tol);
    if rank < n {
        return Err(FrameError::NotSurjective { rank, dim: n });
    }
    let q = hilbert::pseudo_inverse(&tw_star, tol) * hilbert::pseudo_inverse(&tt, tol);

    let identity = identity_defect(&(&tw_star * &q * &tt));
    let adjoint_identity = identity_defect(&(tt.adjoint() * q.adjoint() * &tw));
    let mut rng = random::rng(seed);
    let mut inner_product = 0.0_f64;
    for _ in 0..PAIRS {
        let f = random::unit_vector::<T, _>(&mut rng, n);
        let g = random::unit_vector::<T, _>(&mut rng, n);
        let fg = hilbert::inner(&f, &g);
        let lhs = hilbert::inner(&(q.adjoint() * (&tw * &f)), &(&tt * &g));
        let rhs = hilbert::inner(&(&q * (&tt * &f)), &(&tw * &g));
        inner_product = inner_product.max((fg - lhs).abs()).max((fg - rhs).abs());
    }
    Ok(QDual {
        q_norm: hilbert::operator_norm(&q),
        defect: identity,
        equivalence: QDualEquivalence {
            adjoint_identity,
            identity,
            inner_product,
            pairs: PAIRS,
        },
        q,
    })
}

/// Lower estimates for the optimal bounds `(C_op, D_op)` of `W̃`:
/// `C_op ≥ 1/(B‖Q‖²)` and `D_op ≥ 1/(A‖Q‖²)`.
///
/// Both predictions are lower estimates, so `predicted_bounds.upper` holds
/// the estimate for `D_op` and containment means
/// `C_op ≥ predicted.lower − τ` and `D_op ≥ predicted.upper − τ`.
pub fn verify_q_dual_bounds<T: Scalar>(
    w: &ControlledFusionFrame<T>,
    w_tilde: &ControlledFusionFrame<T>,
    q: &QDual<T>,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    check_dim(w.dim(), w_tilde.dim())?;
    let n = w.dim();
    if q.q.nrows() != n * w.len() || q.q.ncols() != n * w_tilde.len() {
        return Err(FrameError::DimensionMismatch {
            expected: n * w.len(),
            found: q.q.nrows(),
        });
    }
    let tw = w.analysis_matrix(tol)?;
    let tt = w_tilde.analysis_matrix(tol)?;
    let defect = identity_defect(&(tw.adjoint() * &q.q * &tt));
    if !(defect <= tol.qdual) {
        return Err(FrameError::InvalidQDual {
            defect,
            tolerance: tol.qdual,
        });
    }
    let bw = w.bounds(tol);
    let bt = w_tilde.bounds(tol);
    let (a, b) = (bw.bounds.lower, bw.bounds.upper);
    let q2 = q.q_norm * q.q_norm;
    let predicted = FrameBounds::predicted(1.0 / (b * q2), 1.0 / (a * q2));
    let hypothesis = bw.form_is_real && bw.bounds.is_frame(tol);
    let c_ok = bt.bounds.lower >= predicted.lower - tol.containment;
    let d_ok = bt.bounds.upper >= predicted.upper - tol.containment;

    let mut report = TheoremReport::new(TheoremId::QDual, hypothesis, predicted, bt.bounds, tol.containment);
    report.containment_ok = c_ok && d_ok;
    report
        .diag("defect", defect)
        .diag("q_norm", q.q_norm)
        .diag("w_lower", a)
        .diag("w_upper", b)
        .diag("lower_estimate_ok", flag(c_ok))
        .diag("upper_estimate_ok", flag(d_ok))
        .diag("equivalence_adjoint_identity", q.equivalence.adjoint_identity)
        .diag("equivalence_identity", q.equivalence.identity)
        .diag("equivalence_inner_product", q.equivalence.inner_product);
    report.note("predicted_bounds are lower estimates for both optimal bounds of W̃");
    if !hypothesis {
        report.note("W is not a controlled frame");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parseval_self_dual() {
        let tol = Tolerances::default();
        let w = fixtures::coordinate_parseval(4);
        let q = construct_q_dual(&w, &w, 0, &tol).unwrap();
        assert!(q.defect < 1e-10);
        assert!((q.q_norm - 1.0).abs() < 1e-10);
        let t = w.analysis_matrix(&tol).unwrap();
        assert!((&q.q - &t * t.adjoint()).norm() < 1e-10);
        let r = verify_q_dual_bounds(&w, &w, &q, &tol).unwrap();
        assert!((r.predicted_bounds.lower - 1.0).abs() < 1e-10);
        assert!(r.hypothesis_satisfied && r.containment_ok);
    }

    #[test]
    fn deficient_family_is_not_surjective() {
        let tol = Tolerances::default();
        let full = fixtures::coordinate_parseval(3);
        let fam = full.family().with_subspaces(vec![full.family().subspaces()[0].clone(); 3]).unwrap();
        let w = ControlledFusionFrame::uncontrolled(fam);
        assert!(matches!(
            construct_q_dual(&w, &full, 0, &tol),
            Err(FrameError::NotSurjective { rank: 1, dim: 3 })
        ));
    }

    #[test]
    fn rejects_bad_q() {
        let tol = Tolerances::default();
        let w = fixtures::coordinate_parseval(3);
        let mut q = construct_q_dual(&w, &w, 0, &tol).unwrap();
        q.q *= 2.0;
        assert!(matches!(verify_q_dual_bounds(&w, &w, &q, &tol), Err(FrameError::InvalidQDual { .. })));
    }
}
