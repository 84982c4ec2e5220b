//! JSON instance files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "field": "real",
//!   "dim": 3,
//!   "subspaces": [{ "basis": [[1, 0, 0], [0, 1, 0]], "weight": 1.0 }],
//!   "C": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
//!   "C_prime": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
//!   "second": { "subspaces": [...] },
//!   "params": { "lambda1": 0.1, "lambda2": 0.1, "beta": [0.1], "epsilon": 0.5,
//!               "seed": 42, "samples": 1000,
//!               "transform": { "u": [[...]], "mode": "adjoint-commuting" } }
//! }
//! ```
//!
//! Matrices are row-major. Complex entries are `[re, im]`; real files may use
//! plain numbers. Bases need not be orthonormal. The second frame shares the
//! controls of the first.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controlled::{ControlPair, ControlledFusionFrame};
use crate::error::FrameError;
use crate::fusion::WeightedSubspaceFamily;
use crate::hilbert::{self, Operator};
use crate::random::{self, ControlConstraint};
use crate::scalar::{Field, Scalar};
use crate::theorems::{self, TransformMode};
use crate::tolerances::Tolerances;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid `{path}`: {reason}")]
    Field { path: String, reason: String },
    #[error("missing input: `{0}`")]
    Missing(&'static str),
}

fn invalid(path: impl Into<String>, reason: impl ToString) -> InstanceError {
    InstanceError::Field {
        path: path.into(),
        reason: reason.to_string(),
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn from_scalar<T: Scalar>(x: T) -> Self {
        let (re, im) = x.parts();
        match T::FIELD {
            Field::Real => Entry::Real(re),
            Field::Complex => Entry::Complex([re, im]),
        }
    }

    pub fn to_scalar<T: Scalar>(self, path: &str) -> Result<T, InstanceError> {
        let (re, im) = match self {
            Entry::Real(re) => (re, 0.0),
            Entry::Complex([re, im]) => (re, im),
        };
        if !(re.is_finite() && im.is_finite()) {
            return Err(invalid(path, "entry is not finite"));
        }
        T::from_parts(re, im).ok_or_else(|| invalid(path, "complex entry in a real instance"))
    }
}

pub type Matrix = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceSpec {
    pub basis: Vec<Vec<Entry>>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondFrame {
    pub subspaces: Vec<SubspaceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub u: Matrix,
    pub mode: TransformMode,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformSpec>,
}

impl Params {
    fn is_empty(&self) -> bool {
        *self == Params::default()
    }
}

/// The on-disk representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub field: Field,
    pub dim: usize,
    pub subspaces: Vec<SubspaceSpec>,
    #[serde(rename = "C")]
    pub c: Matrix,
    #[serde(rename = "C_prime")]
    pub c_prime: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<SecondFrame>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
}

/// A parsed instance over one field.
#[derive(Debug, Clone)]
pub struct Instance<T: Scalar> {
    pub frame: ControlledFusionFrame<T>,
    pub second: Option<ControlledFusionFrame<T>>,
    pub transform: Option<(Operator<T>, TransformMode)>,
    pub params: Params,
}

impl<T: Scalar> Instance<T> {
    pub fn second(&self) -> Result<&ControlledFusionFrame<T>, InstanceError> {
        self.second.as_ref().ok_or(InstanceError::Missing("second"))
    }

    pub fn transform(&self) -> Result<(&Operator<T>, TransformMode), InstanceError> {
        self.transform
            .as_ref()
            .map(|(u, mode)| (u, *mode))
            .ok_or(InstanceError::Missing("params.transform"))
    }

    pub fn perturbation_params(&self) -> Result<theorems::PerturbationParams, InstanceError> {
        let p = &self.params;
        let lambda1 = p.lambda1.ok_or(InstanceError::Missing("params.lambda1"))?;
        let lambda2 = p.lambda2.ok_or(InstanceError::Missing("params.lambda2"))?;
        let beta = p.beta.clone().ok_or(InstanceError::Missing("params.beta"))?;
        theorems::PerturbationParams::new(lambda1, lambda2, beta).map_err(|e| invalid("params", e))
    }
}

#[derive(Debug, Clone)]
pub enum AnyInstance {
    Real(Instance<f64>),
    Complex(Instance<Complex64>),
}

impl AnyInstance {
    pub fn field(&self) -> Field {
        match self {
            AnyInstance::Real(_) => Field::Real,
            AnyInstance::Complex(_) => Field::Complex,
        }
    }

    pub fn params(&self) -> &Params {
        match self {
            AnyInstance::Real(i) => &i.params,
            AnyInstance::Complex(i) => &i.params,
        }
    }
}

fn matrix<T: Scalar>(rows: &Matrix, n: usize, path: &str) -> Result<DMatrix<T>, InstanceError> {
    if rows.len() != n {
        return Err(invalid(path, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::<T>::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(invalid(format!("{path}[{i}]"), format!("expected {n} entries, found {}", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            m[(i, j)] = e.to_scalar(&format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn vector<T: Scalar>(entries: &[Entry], n: usize, path: &str) -> Result<DVector<T>, InstanceError> {
    if entries.len() != n {
        return Err(invalid(path, format!("expected {n} entries, found {}", entries.len())));
    }
    let items = entries
        .iter()
        .enumerate()
        .map(|(j, e)| e.to_scalar(&format!("{path}[{j}]")))
        .collect::<Result<Vec<T>, _>>()?;
    Ok(DVector::from_vec(items))
}

fn family<T: Scalar>(
    specs: &[SubspaceSpec],
    n: usize,
    path: &str,
    tol: &Tolerances,
) -> Result<WeightedSubspaceFamily<T>, InstanceError> {
    if specs.is_empty() {
        return Err(invalid(path, "no subspaces"));
    }
    let mut items = Vec::with_capacity(specs.len());
    for (i, s) in specs.iter().enumerate() {
        let here = format!("{path}[{i}]");
        if s.basis.is_empty() {
            return Err(invalid(format!("{here}.basis"), "empty basis"));
        }
        let vectors = s
            .basis
            .iter()
            .enumerate()
            .map(|(k, v)| vector::<T>(v, n, &format!("{here}.basis[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let basis = hilbert::orthonormalize(&vectors, tol).map_err(|e| invalid(format!("{here}.basis"), e))?;
        if !(s.weight.is_finite() && s.weight > 0.0) {
            return Err(invalid(format!("{here}.weight"), format!("{} is not a positive weight", s.weight)));
        }
        items.push((basis, s.weight));
    }
    WeightedSubspaceFamily::new(items).map_err(|e| invalid(path, e))
}

fn validate_params(p: &Params) -> Result<(), InstanceError> {
    for (name, value) in [("params.lambda1", p.lambda1), ("params.lambda2", p.lambda2)] {
        if let Some(l) = value {
            if !(l.is_finite() && (0.0..1.0).contains(&l)) {
                return Err(invalid(name, format!("{l} is outside [0, 1)")));
            }
        }
    }
    if let Some(beta) = &p.beta {
        if let Some((i, c)) = beta.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
            return Err(invalid(format!("params.beta[{i}]"), format!("{c} is not positive")));
        }
    }
    if let Some(e) = p.epsilon {
        if !(e.is_finite() && e >= 0.0) {
            return Err(invalid("params.epsilon", format!("{e} is not a nonnegative number")));
        }
    }
    Ok(())
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(text).map_err(|e| InstanceError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Pretty-printed JSON with a trailing newline; byte-stable for equal inputs.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn load(&self, tol: &Tolerances) -> Result<AnyInstance, InstanceError> {
        if self.version != FORMAT_VERSION {
            return Err(InstanceError::Version(self.version));
        }
        if self.dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        validate_params(&self.params)?;
        Ok(match self.field {
            Field::Real => AnyInstance::Real(self.typed(tol)?),
            Field::Complex => AnyInstance::Complex(self.typed(tol)?),
        })
    }

    fn typed<T: Scalar>(&self, tol: &Tolerances) -> Result<Instance<T>, InstanceError> {
        let n = self.dim;
        let fam = family::<T>(&self.subspaces, n, "subspaces", tol)?;
        let c = Operator::new(matrix::<T>(&self.c, n, "C")?).map_err(|e| invalid("C", e))?;
        let cp = Operator::new(matrix::<T>(&self.c_prime, n, "C_prime")?).map_err(|e| invalid("C_prime", e))?;
        let controls = ControlPair::new(c, cp, tol).map_err(|e| match &e {
            FrameError::NotInvertible { which: "C'", .. } => invalid("C_prime", e),
            _ => invalid("C", e),
        })?;
        let frame = ControlledFusionFrame::new(fam, controls.clone()).map_err(|e| invalid("subspaces", e))?;
        let second = match &self.second {
            Some(s) => {
                let fam = family::<T>(&s.subspaces, n, "second.subspaces", tol)?;
                Some(ControlledFusionFrame::new(fam, controls).map_err(|e| invalid("second", e))?)
            }
            None => None,
        };
        let transform = match &self.params.transform {
            Some(t) => {
                let u = Operator::new(matrix::<T>(&t.u, n, "params.transform.u")?)
                    .map_err(|e| invalid("params.transform.u", e))?;
                Some((u, t.mode))
            }
            None => None,
        };
        Ok(Instance {
            frame,
            second,
            transform,
            params: self.params.clone(),
        })
    }

    /// Serializes a typed instance; bases are written as stored (orthonormal).
    pub fn from_instance<T: Scalar>(inst: &Instance<T>) -> Self {
        let mut params = inst.params.clone();
        params.transform = inst.transform.as_ref().map(|(u, mode)| TransformSpec {
            u: write_matrix(u.as_matrix()),
            mode: *mode,
        });
        InstanceFile {
            version: FORMAT_VERSION,
            field: T::FIELD,
            dim: inst.frame.dim(),
            subspaces: write_family(inst.frame.family()),
            c: write_matrix(inst.frame.controls().c().as_matrix()),
            c_prime: write_matrix(inst.frame.controls().c_prime().as_matrix()),
            second: inst.second.as_ref().map(|s| SecondFrame {
                subspaces: write_family(s.family()),
            }),
            params,
        }
    }
}

fn write_matrix<T: Scalar>(m: &DMatrix<T>) -> Matrix {
    m.row_iter()
        .map(|r| r.iter().map(|&x| Entry::from_scalar(x)).collect())
        .collect()
}

fn write_family<T: Scalar>(f: &WeightedSubspaceFamily<T>) -> Vec<SubspaceSpec> {
    f.subspaces()
        .iter()
        .zip(f.weights())
        .map(|(b, &w)| SubspaceSpec {
            basis: b
                .vectors()
                .iter()
                .map(|v| v.iter().map(|&x| Entry::from_scalar(x)).collect())
                .collect(),
            weight: w,
        })
        .collect()
}

/// Default sample count for the Monte Carlo checks.
pub const DEFAULT_SAMPLES: usize = 1000;

/// A seeded random instance with a second frame and a parameter block.
///
/// The first frame is redrawn until it is a frame, except over ℂ with
/// independent controls where the form is almost never real. The second
/// frame drops basis vectors from the first (`Z_i ⊆ W_i`). `λ₁ = λ₂ = 0`
/// and `β` is fitted on the sample set. When `C = C′` an adjoint-commuting
/// transform `u = p(C)*` is included.
pub fn generate<T: Scalar>(seed: u64, dim: usize, constraint: ControlConstraint, tol: &Tolerances) -> Instance<T> {
    let mut rng = random::rng(seed);
    let frame = if T::FIELD == Field::Complex && constraint == ControlConstraint::None {
        random::controlled_instance::<T, _>(&mut rng, dim, constraint, tol)
    } else {
        random::controlled_frame::<T, _>(&mut rng, dim, constraint, tol)
    };
    let shrunk = random::shrunk_subspaces(&mut rng, frame.family(), 0.5);
    let second = frame
        .with_family(frame.family().with_subspaces(shrunk).expect("same ambient space"))
        .expect("same controls");
    let fit_seed: u64 = rng.random();
    let beta = theorems::fit_beta(&frame, &second, 0.0, 0.0, DEFAULT_SAMPLES, fit_seed).expect("matching shapes");
    let transform = if constraint != ControlConstraint::None {
        let u = random::adjoint_commuting_transform(&mut rng, frame.controls().c(), tol);
        Some((u, TransformMode::AdjointCommuting))
    } else {
        None
    };
    Instance {
        frame,
        second: Some(second),
        transform,
        params: Params {
            lambda1: Some(0.0),
            lambda2: Some(0.0),
            beta: Some(beta),
            epsilon: None,
            seed: Some(fit_seed),
            samples: Some(DEFAULT_SAMPLES),
            transform: None,
        },
    }
}

/// [`generate`] over the requested field, serialized.
pub fn generate_file(seed: u64, dim: usize, field: Field, constraint: ControlConstraint, tol: &Tolerances) -> InstanceFile {
    match field {
        Field::Real => InstanceFile::from_instance(&generate::<f64>(seed, dim, constraint, tol)),
        Field::Complex => InstanceFile::from_instance(&generate::<Complex64>(seed, dim, constraint, tol)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn example_json() -> String {
        r#"{
          "version": 1, "field": "real", "dim": 3,
          "subspaces": [
            {"basis": [[1,0,0],[0,1,0]], "weight": 1},
            {"basis": [[1,0,0],[0,0,1]], "weight": 1},
            {"basis": [[0,1,0],[0,0,1]], "weight": 1}
          ],
          "C": [[1,0,0],[0,1,0],[1,0,1]],
          "C_prime": [[1,0,0],[0,1,0],[0,1,1]]
        }"#
        .to_owned()
    }

    #[test]
    fn parses_example() {
        let tol = Tolerances::default();
        let inst = InstanceFile::from_json(&example_json()).unwrap().load(&tol).unwrap();
        let AnyInstance::Real(inst) = inst else { panic!("expected real") };
        let expected = fixtures::r3_example().frame_operator();
        assert!((inst.frame.frame_operator().as_matrix() - expected.as_matrix()).norm() < 1e-12);
        assert!(matches!(inst.second(), Err(InstanceError::Missing("second"))));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let tol = Tolerances::default();
        let bad = example_json().replace("\"weight\": 1}\n          ],", "\"weight\": -1}\n          ],");
        let err = InstanceFile::from_json(&bad).unwrap().load(&tol).unwrap_err();
        assert_eq!(
            err,
            InstanceError::Field {
                path: "subspaces[2].weight".into(),
                reason: "-1 is not a positive weight".into()
            }
        );
        let short = example_json().replace("[[0,1,0],[0,0,1]]", "[[0,1],[0,0,1]]");
        let err = InstanceFile::from_json(&short).unwrap().load(&tol).unwrap_err();
        assert!(matches!(err, InstanceError::Field { ref path, .. } if path == "subspaces[2].basis[0]"));
        let singular = example_json().replace("[[1,0,0],[0,1,0],[0,1,1]]", "[[1,0,0],[0,1,0],[0,1,0]]");
        let err = InstanceFile::from_json(&singular).unwrap().load(&tol).unwrap_err();
        assert!(matches!(err, InstanceError::Field { ref path, .. } if path == "C_prime"));
        let complex = example_json().replace("[[1,0,0],[0,1,0],[1,0,1]]", "[[1,0,0],[0,[1,2],0],[1,0,1]]");
        let err = InstanceFile::from_json(&complex).unwrap().load(&tol).unwrap_err();
        assert!(matches!(err, InstanceError::Field { ref path, .. } if path == "C[1][1]"));
        assert!(matches!(InstanceFile::from_json("{ nope"), Err(InstanceError::Json { line: 1, .. })));
    }

    #[test]
    fn generated_instances_round_trip() {
        let tol = Tolerances::default();
        for (seed, constraint) in [(1, ControlConstraint::None), (2, ControlConstraint::GatePassing)] {
            let inst = generate::<Complex64>(seed, 4, constraint, &tol);
            let file = InstanceFile::from_instance(&inst);
            let text = file.to_json();
            assert_eq!(text, InstanceFile::from_instance(&generate::<Complex64>(seed, 4, constraint, &tol)).to_json());
            let back = InstanceFile::from_json(&text).unwrap();
            assert_eq!(back, file);
            let AnyInstance::Complex(loaded) = back.load(&tol).unwrap() else { panic!("expected complex") };
            let d = loaded.frame.frame_operator().as_matrix() - inst.frame.frame_operator().as_matrix();
            assert!(d.norm() < 1e-12);
            assert!(loaded.second.is_some());
            assert_eq!(loaded.transform.is_some(), constraint != ControlConstraint::None);
        }
    }

    #[test]
    fn non_orthonormal_bases_are_orthonormalized() {
        let tol = Tolerances::default();
        let text = example_json().replace("[[1,0,0],[0,1,0]]", "[[1,1,0],[2,0,0],[3,1,0]]");
        let AnyInstance::Real(inst) = InstanceFile::from_json(&text).unwrap().load(&tol).unwrap() else {
            panic!()
        };
        let b = &inst.frame.family().subspaces()[0];
        assert_eq!(b.rank(), 2);
        let listed = [DVector::from_vec(vec![1.0, 1.0, 0.0]), DVector::from_vec(vec![2.0, 0.0, 0.0])];
        assert!(listed.iter().all(|v| b.contains(v, 1e-12)));
    }
}
