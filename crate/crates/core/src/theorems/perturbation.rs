use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{flag, TheoremId, TheoremReport};
use crate::controlled::ControlledFusionFrame;
use crate::error::{FrameError, Result};
use crate::frames::FrameBounds;
use crate::hilbert::{self, check_dim, SubspaceBasis};
use crate::random;
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// `D_i = v_i² (C* π_{W_i} C′ − C* π_{Z_i} C′)` for every index.
fn differences<T: Scalar>(w: &ControlledFusionFrame<T>, z: &ControlledFusionFrame<T>) -> Vec<DMatrix<T>> {
    (0..w.len())
        .map(|i| {
            let vw = w.family().weights()[i];
            let vz = z.family().weights()[i];
            w.local_operator(i).scale(vw * vw) - z.local_operator(i).scale(vz * vz)
        })
        .collect()
}

/// `ε_eff = λ_max(Σ_i |H(D_i)|)^{1/2}` and the smallest eigenvalue over all `H(D_i)`.
fn effective_size<T: Scalar>(diffs: &[DMatrix<T>], n: usize) -> (f64, f64) {
    let mut total = DMatrix::<T>::zeros(n, n);
    let mut smallest = f64::INFINITY;
    for d in diffs {
        let eig = hilbert::eigen_of_hermitian_part(d);
        smallest = smallest.min(eig.min());
        total += eig.recompose_with(f64::abs);
    }
    let top = hilbert::eigen_of_hermitian_part(&total).max().max(0.0);
    (top.sqrt(), smallest)
}

fn perturbed<T: Scalar>(w: &ControlledFusionFrame<T>, z_subspaces: &[SubspaceBasis<T>]) -> Result<ControlledFusionFrame<T>> {
    check_dim(w.len(), z_subspaces.len())?;
    w.with_family(w.family().with_subspaces(z_subspaces.to_vec())?)
}

/// The spectral surrogate `ε_eff` for moving every `W_i` to `Z_i`.
pub fn subspace_perturbation_size<T: Scalar>(w: &ControlledFusionFrame<T>, z_subspaces: &[SubspaceBasis<T>]) -> Result<f64> {
    let z = perturbed(w, z_subspaces)?;
    Ok(effective_size(&differences(w, &z), w.dim()).0)
}

/// Replaces `W_i` by `Z_i` (same weights and controls) and checks the new
/// bounds against `(A − ε², B + ε²)`.
///
/// The hypothesis is `ε_eff ≤ ε < √A`. When `epsilon` is `None` the
/// measured `ε_eff` is used.
pub fn verify_subspace_perturbation<T: Scalar>(
    w: &ControlledFusionFrame<T>,
    z_subspaces: &[SubspaceBasis<T>],
    epsilon: Option<f64>,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    let z = perturbed(w, z_subspaces)?;
    let (eps_eff, smallest) = effective_size(&differences(w, &z), w.dim());
    let eps = epsilon.unwrap_or(eps_eff);
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(FrameError::InvalidParams(format!("ε must be finite and nonnegative, got {eps}")));
    }
    let bw = w.bounds(tol);
    let bz = z.bounds(tol);
    let a = bw.bounds.lower;
    let sqrt_a = a.max(0.0).sqrt();
    let hypothesis = bw.form_is_real && eps_eff <= eps + tol.containment && eps < sqrt_a;
    let predicted = FrameBounds::predicted(a - eps * eps, bw.bounds.upper + eps * eps);

    let mut report = TheoremReport::new(TheoremId::SubspacePerturbation, hypothesis, predicted, bz.bounds, tol.containment);
    let psd = smallest >= -tol.psd;
    report
        .diag("epsilon", eps)
        .diag("epsilon_eff", eps_eff)
        .diag("sqrt_a", sqrt_a)
        .diag("min_difference_eigenvalue", smallest)
        .diag("differences_psd", flag(psd));
    if !psd {
        report.note("some C*π_W C′ − C*π_Z C′ is not PSD; its square root is undefined and ε_eff is a conservative surrogate");
    }
    if eps == 0.0 {
        report.note("ε = 0 sits outside the stated open range; the bounds are still checked");
    }
    Ok(report)
}

/// `(λ₁, λ₂, β)` with `0 ≤ λ₁, λ₂ < 1` and every `c_i > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta: Vec<f64>,
}

impl PerturbationParams {
    pub fn new(lambda1: f64, lambda2: f64, beta: Vec<f64>) -> Result<Self> {
        for (name, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(l.is_finite() && (0.0..1.0).contains(&l)) {
                return Err(FrameError::InvalidParams(format!("{name} = {l} is outside [0, 1)")));
            }
        }
        if beta.is_empty() {
            return Err(FrameError::InvalidParams("beta is empty".into()));
        }
        if let Some((i, c)) = beta.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
            return Err(FrameError::InvalidParams(format!("beta[{i}] = {c} is not positive")));
        }
        Ok(Self { lambda1, lambda2, beta })
    }

    pub fn beta_norm(&self) -> f64 {
        self.beta.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

struct FormSample {
    w: f64,
    z: f64,
    negative_terms: usize,
}

/// Per-index forms `v_i²⟨C*π_{W_i}C′f, f⟩` and the `Z` counterparts, summed.
struct Forms<T: Scalar> {
    w: Vec<DMatrix<T>>,
    z: Vec<DMatrix<T>>,
}

impl<T: Scalar> Forms<T> {
    fn new(w: &ControlledFusionFrame<T>, z: &ControlledFusionFrame<T>) -> Self {
        let weighted = |f: &ControlledFusionFrame<T>| {
            (0..f.len())
                .map(|i| {
                    let v = f.family().weights()[i];
                    f.local_operator(i).scale(v * v)
                })
                .collect::<Vec<_>>()
        };
        Self { w: weighted(w), z: weighted(z) }
    }

    fn eval(&self, f: &DVector<T>, floor: f64) -> FormSample {
        let form = |m: &DMatrix<T>| hilbert::inner(&(m * f), f).real();
        let mut out = FormSample { w: 0.0, z: 0.0, negative_terms: 0 };
        for (a, b) in self.w.iter().zip(&self.z) {
            let (fa, fb) = (form(a), form(b));
            out.negative_terms += [fa, fb, fa - fb].iter().filter(|&&x| x < -floor).count();
            out.w += fa;
            out.z += fb;
        }
        out
    }
}

fn sample_set<T: Scalar>(w: &ControlledFusionFrame<T>, z: &ControlledFusionFrame<T>, samples: usize, seed: u64) -> Vec<DVector<T>> {
    let mut rng = random::rng(seed);
    let n = w.dim();
    let mut out: Vec<DVector<T>> = (0..samples).map(|_| random::unit_vector::<T, _>(&mut rng, n)).collect();
    for s in [w.frame_operator(), z.frame_operator()] {
        let eig = hilbert::eigen_of_hermitian_part(s.as_matrix());
        out.push(eig.vector(0));
        out.push(eig.vector(n - 1));
    }
    out
}

/// `‖(form_W − form_Z)^{1/2}‖ − λ₁‖form_W^{1/2}‖ − λ₂‖form_Z^{1/2}‖` at one unit vector.
fn residual(s: &FormSample, lambda1: f64, lambda2: f64) -> f64 {
    (s.w - s.z).max(0.0).sqrt() - lambda1 * s.w.max(0.0).sqrt() - lambda2 * s.z.max(0.0).sqrt()
}

/// The smallest `β` (spread evenly over the indices) for which the defining
/// inequality holds on the sample set, padded by a relative `1e-9`.
pub fn fit_beta<T: Scalar>(
    w: &ControlledFusionFrame<T>,
    z: &ControlledFusionFrame<T>,
    lambda1: f64,
    lambda2: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dim(w.dim(), z.dim())?;
    check_dim(w.len(), z.len())?;
    let forms = Forms::new(w, z);
    let worst = sample_set(w, z, samples, seed)
        .iter()
        .map(|f| residual(&forms.eval(f, f64::INFINITY), lambda1, lambda2))
        .fold(0.0_f64, f64::max);
    let norm = worst * (1.0 + 1e-9) + 1e-12;
    let m = w.len();
    Ok(vec![norm / (m as f64).sqrt(); m])
}

/// Checks the defining inequality on `samples` seeded unit vectors plus the
/// extremal eigenvectors of both forms, then compares the optimal bounds of
/// `Z` with the predicted pair.
pub fn verify_lambda_perturbation<T: Scalar>(
    w: &ControlledFusionFrame<T>,
    z: &ControlledFusionFrame<T>,
    params: &PerturbationParams,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<TheoremReport> {
    check_dim(w.dim(), z.dim())?;
    check_dim(w.len(), z.len())?;
    let params = PerturbationParams::new(params.lambda1, params.lambda2, params.beta.clone())?;
    let (l1, l2, beta) = (params.lambda1, params.lambda2, params.beta_norm());

    let forms = Forms::new(w, z);
    let set = sample_set(w, z, samples, seed);
    let mut worst_slack = f64::INFINITY;
    let mut negative = 0usize;
    for f in &set {
        let s = forms.eval(f, tol.form_floor);
        negative += s.negative_terms;
        worst_slack = worst_slack.min(beta - residual(&s, l1, l2));
    }

    let bw = w.bounds(tol);
    let bz = z.bounds(tol);
    let (a, b) = (bw.bounds.lower, bw.bounds.upper);
    let w_frame = bw.form_is_real && bw.bounds.is_frame(tol);
    let numerator = (1.0 - l1) * a.max(0.0).sqrt() - beta;
    let lower = if numerator > 0.0 { (numerator / (1.0 + l2)).powi(2) } else { 0.0 };
    let upper = (((1.0 + l1) * b.max(0.0).sqrt() + beta) / (1.0 - l2)).powi(2);
    let inequality = negative == 0 && worst_slack >= 0.0;
    let hypothesis = w_frame && bz.form_is_real && inequality && numerator > 0.0;

    let mut report = TheoremReport::new(
        TheoremId::LambdaPerturbation,
        hypothesis,
        FrameBounds::predicted(lower, upper),
        bz.bounds,
        tol.containment,
    );
    report
        .diag("lambda1", l1)
        .diag("lambda2", l2)
        .diag("beta_norm", beta)
        .diag("samples", set.len() as f64)
        .diag("max_inequality_slack", worst_slack)
        .diag("negative_form_terms", negative as f64)
        .diag("inequality_holds", flag(inequality));
    if numerator <= 0.0 {
        report.note("(1 − λ₁)√A ≤ ‖β‖: predicted lower bound is not positive, verdict is vacuous");
    }
    if negative > 0 {
        report.note(format!("{negative} per-index form terms are negative"));
    }
    if !w_frame {
        report.note("W is not a controlled frame");
    }
    Ok(report)
}
