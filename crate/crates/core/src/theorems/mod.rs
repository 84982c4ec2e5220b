//! Numerical verifiers for the transform, perturbation, approximate-dual and
//! Q-dual statements about controlled fusion frames.
//!
//! Every verifier returns a [`TheoremReport`]: whether the hypothesis holds on
//! the given instance, the bounds the statement predicts, the actual optimal
//! bounds, and whether the prediction contains the actual bounds up to
//! `Tolerances::containment`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::FrameError;
use crate::frames::FrameBounds;

mod dual;
mod factorization;
mod perturbation;
mod qdual;
mod transform;

pub use dual::{canonical_parseval_controls, verify_approximate_dual};
pub use factorization::verify_factorization;
pub use perturbation::{
    fit_beta, subspace_perturbation_size, verify_lambda_perturbation, verify_subspace_perturbation,
    PerturbationParams,
};
pub use qdual::{construct_q_dual, verify_q_dual_bounds, QDual, QDualEquivalence};
pub use transform::{verify_transform, TransformMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremId {
    TransformAdjoint,
    TransformUnitary,
    ApproximateDual,
    SubspacePerturbation,
    LambdaPerturbation,
    QDual,
    Factorization,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::TransformAdjoint,
        TheoremId::TransformUnitary,
        TheoremId::ApproximateDual,
        TheoremId::SubspacePerturbation,
        TheoremId::LambdaPerturbation,
        TheoremId::QDual,
        TheoremId::Factorization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::TransformAdjoint => "transform-adjoint",
            TheoremId::TransformUnitary => "transform-unitary",
            TheoremId::ApproximateDual => "approximate-dual",
            TheoremId::SubspacePerturbation => "subspace-perturbation",
            TheoremId::LambdaPerturbation => "lambda-perturbation",
            TheoremId::QDual => "q-dual",
            TheoremId::Factorization => "factorization",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| FrameError::InvalidParams(format!("unknown theorem `{s}`")))
    }
}

/// Verdict of one verifier on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub hypothesis_satisfied: bool,
    pub predicted_bounds: FrameBounds,
    pub actual_bounds: FrameBounds,
    pub containment_ok: bool,
    pub diagnostics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl TheoremReport {
    fn new(theorem: TheoremId, hypothesis_satisfied: bool, predicted: FrameBounds, actual: FrameBounds, slack: f64) -> Self {
        Self {
            theorem,
            hypothesis_satisfied,
            predicted_bounds: predicted,
            actual_bounds: actual,
            containment_ok: predicted.contains(&actual, slack),
            diagnostics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn diag(&mut self, key: &str, value: f64) -> &mut Self {
        self.diagnostics.insert(key.to_owned(), value);
        self
    }

    fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// A report passes unless its hypothesis holds and containment fails.
    pub fn passes(&self) -> bool {
        !self.hypothesis_satisfied || self.containment_ok
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}
