//! CC′-controlled fusion frames.
//!
//! For a weighted family `{(W_i, v_i)}` and invertible controls `C`, `C′`
//! the controlled quadratic form is `Σ v_i² ⟨π_{W_i} C′ f, π_{W_i} C f⟩` and
//! the controlled frame operator is `S_W = Σ v_i² C* π_{W_i} C′`.
//!
//! `S_W` need not be Hermitian. The form only sees its Hermitian part
//! `H(S_W) = (S_W + S_W*)/2` (exactly over ℝ, through the real part over ℂ),
//! so optimal bounds are the extremal eigenvalues of `H(S_W)`.
//!
//! The analysis operator `T_W f = (v_i (C* π_{W_i} C′)^{1/2} f)_i` needs a
//! square root of every local operator `C* π_{W_i} C′`, which exists only
//! when that operator is Hermitian PSD. The square-root based operations are
//! therefore gated per index; the form-based ones always work.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::Serialize;

use crate::error::{FrameError, Result};
use crate::frames::FrameBounds;
use crate::fusion::WeightedSubspaceFamily;
use crate::hilbert::{self, check_dim, InvertibilityReport, Operator};
use crate::scalar::{Field, Scalar};
use crate::tolerances::Tolerances;

/// The control operators `(C, C′)`, both checked to be in `GL(H)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPair<T: Scalar> {
    c: Operator<T>,
    c_prime: Operator<T>,
    c_report: InvertibilityReport,
    c_prime_report: InvertibilityReport,
}

impl<T: Scalar> ControlPair<T> {
    pub fn new(c: Operator<T>, c_prime: Operator<T>, tol: &Tolerances) -> Result<Self> {
        check_dim(c.dim(), c_prime.dim())?;
        let c_report = hilbert::check_gl(c.as_matrix(), tol);
        if !c_report.is_invertible {
            return Err(FrameError::NotInvertible {
                which: "C",
                smallest: c_report.smallest_singular_value,
            });
        }
        let c_prime_report = hilbert::check_gl(c_prime.as_matrix(), tol);
        if !c_prime_report.is_invertible {
            return Err(FrameError::NotInvertible {
                which: "C'",
                smallest: c_prime_report.smallest_singular_value,
            });
        }
        Ok(Self {
            c,
            c_prime,
            c_report,
            c_prime_report,
        })
    }

    /// `C = C′ = Id`.
    pub fn identity(dim: usize) -> Self {
        Self::new(Operator::identity(dim), Operator::identity(dim), &Tolerances::default())
            .expect("identity is invertible")
    }

    /// `C = C′`.
    pub fn squared(c: Operator<T>, tol: &Tolerances) -> Result<Self> {
        Self::new(c.clone(), c, tol)
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn c(&self) -> &Operator<T> {
        &self.c
    }

    pub fn c_prime(&self) -> &Operator<T> {
        &self.c_prime
    }

    pub fn c_report(&self) -> &InvertibilityReport {
        &self.c_report
    }

    pub fn c_prime_report(&self) -> &InvertibilityReport {
        &self.c_prime_report
    }

    /// `‖C − C′‖_F / max(1, ‖C‖_F)`.
    pub fn squared_residual(&self) -> f64 {
        (self.c.as_matrix() - self.c_prime.as_matrix()).norm() / self.c.norm().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Over ℂ the form `Σ v_i²⟨π C′f, π Cf⟩` is not real-valued.
    NotBesselForm,
    BesselOnly,
    Frame,
    Tight,
    Parseval,
}

impl Classification {
    pub fn is_frame(self) -> bool {
        matches!(self, Self::Frame | Self::Tight | Self::Parseval)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::NotBesselForm => "not_bessel_form",
            Self::BesselOnly => "bessel_only",
            Self::Frame => "frame",
            Self::Tight => "tight",
            Self::Parseval => "parseval",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub bounds: FrameBounds,
    /// `‖S_W − S_W*‖_F / max(1, ‖S_W‖_F)`.
    pub hermitian_residual: f64,
    pub form_is_real: bool,
    pub classification: Classification,
}

/// Stacked per-index coefficient vectors: the finite stand-in for `K_{2,W}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector<T: Scalar> {
    pub blocks: Vec<DVector<T>>,
}

impl<T: Scalar> BlockVector<T> {
    pub fn zeros(count: usize, dim: usize) -> Self {
        Self {
            blocks: vec![DVector::zeros(dim); count],
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `Σ_i ‖block_i‖²`.
    pub fn norm_squared(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    pub fn stacked(&self) -> DVector<T> {
        let total: usize = self.blocks.iter().map(|b| b.len()).sum();
        DVector::from_iterator(total, self.blocks.iter().flat_map(|b| b.iter().copied()))
    }

    pub fn from_stacked(stacked: &DVector<T>, dim: usize) -> Result<Self> {
        if dim == 0 || stacked.len() % dim != 0 {
            return Err(FrameError::DimensionMismatch {
                expected: dim,
                found: stacked.len(),
            });
        }
        Ok(Self {
            blocks: stacked
                .as_slice()
                .chunks(dim)
                .map(DVector::from_column_slice)
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlledFusionFrame<T: Scalar> {
    family: WeightedSubspaceFamily<T>,
    controls: ControlPair<T>,
}

impl<T: Scalar> ControlledFusionFrame<T> {
    pub fn new(family: WeightedSubspaceFamily<T>, controls: ControlPair<T>) -> Result<Self> {
        check_dim(family.dim(), controls.dim())?;
        Ok(Self { family, controls })
    }

    /// `C = C′ = Id`: an ordinary fusion frame.
    pub fn uncontrolled(family: WeightedSubspaceFamily<T>) -> Self {
        let controls = ControlPair::identity(family.dim());
        Self { family, controls }
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn family(&self) -> &WeightedSubspaceFamily<T> {
        &self.family
    }

    pub fn controls(&self) -> &ControlPair<T> {
        &self.controls
    }

    pub fn field(&self) -> Field {
        T::FIELD
    }

    /// Same controls, new family.
    pub fn with_family(&self, family: WeightedSubspaceFamily<T>) -> Result<Self> {
        Self::new(family, self.controls.clone())
    }

    /// `C* π_{W_i} C′` (unweighted).
    pub fn local_operator(&self, index: usize) -> DMatrix<T> {
        let p = self.family.projections()[index].as_matrix();
        self.controls.c.adjoint().as_matrix() * p * self.controls.c_prime.as_matrix()
    }

    /// `S_W = Σ v_i² C* π_{W_i} C′`.
    pub fn frame_operator(&self) -> Operator<T> {
        let n = self.dim();
        let mut s = DMatrix::zeros(n, n);
        for (i, &w) in self.family.weights().iter().enumerate() {
            s += self.local_operator(i).scale(w * w);
        }
        Operator::new(s).expect("finite controlled frame operator")
    }

    /// `Σ v_i² ⟨π_{W_i} C′ f, π_{W_i} C f⟩`, evaluated term by term.
    ///
    /// Over ℂ the value may carry an imaginary part; bounds only describe its
    /// real part.
    pub fn quadratic_form(&self, f: &DVector<T>) -> Result<T> {
        check_dim(self.dim(), f.len())?;
        let cf = self.controls.c.as_matrix() * f;
        let cpf = self.controls.c_prime.as_matrix() * f;
        let mut total = T::zero();
        for (p, &w) in self.family.projections().iter().zip(self.family.weights()) {
            let a = p.as_matrix() * &cpf;
            let b = p.as_matrix() * &cf;
            total += hilbert::inner(&a, &b).scale(w * w);
        }
        Ok(total)
    }

    /// Optimal bounds from the Hermitian part of `S_W`, with classification.
    pub fn bounds(&self, tol: &Tolerances) -> BoundsReport {
        bounds_of_operator::<T>(self.frame_operator().as_matrix(), tol)
    }

    /// `(C* π_{W_i} C′)^{1/2}` for every index, or the first index that fails
    /// the Hermitian-PSD gate.
    pub fn sqrt_factors(&self, tol: &Tolerances) -> Result<Vec<Operator<T>>> {
        (0..self.len())
            .map(|i| {
                hilbert::principal_sqrt_psd(&self.local_operator(i), tol).map_err(|reason| {
                    FrameError::SqrtGateFailed {
                        index: i,
                        reason: Box::new(reason),
                    }
                })
            })
            .collect()
    }

    /// Per-index gate outcome, for diagnostics.
    pub fn gate_status(&self, tol: &Tolerances) -> Vec<Result<()>> {
        (0..self.len())
            .map(|i| hilbert::principal_sqrt_psd(&self.local_operator(i), tol).map(|_| ()))
            .collect()
    }

    pub fn passes_sqrt_gate(&self, tol: &Tolerances) -> bool {
        self.gate_status(tol).iter().all(Result::is_ok)
    }

    /// `T_W` as an `(m·n) × n` matrix; block `i` is `v_i (C* π_{W_i} C′)^{1/2}`.
    pub fn analysis_matrix(&self, tol: &Tolerances) -> Result<DMatrix<T>> {
        let n = self.dim();
        let factors = self.sqrt_factors(tol)?;
        let mut t = DMatrix::zeros(n * self.len(), n);
        for (i, (r, &w)) in factors.iter().zip(self.family.weights()).enumerate() {
            t.view_mut((i * n, 0), (n, n)).copy_from(&r.as_matrix().scale(w));
        }
        Ok(t)
    }

    /// `T*_W`, the `n × (m·n)` adjoint of [`Self::analysis_matrix`].
    pub fn synthesis_matrix(&self, tol: &Tolerances) -> Result<DMatrix<T>> {
        Ok(self.analysis_matrix(tol)?.adjoint())
    }

    /// `T_W f = (v_i (C* π_{W_i} C′)^{1/2} f)_i`.
    pub fn analysis(&self, f: &DVector<T>, tol: &Tolerances) -> Result<BlockVector<T>> {
        check_dim(self.dim(), f.len())?;
        let factors = self.sqrt_factors(tol)?;
        Ok(BlockVector {
            blocks: factors
                .iter()
                .zip(self.family.weights())
                .map(|(r, &w)| (r.as_matrix() * f).scale(w))
                .collect(),
        })
    }

    /// `T*_W (g_i)_i = Σ v_i (C* π_{W_i} C′)^{1/2} g_i`.
    pub fn synthesis(&self, blocks: &BlockVector<T>, tol: &Tolerances) -> Result<DVector<T>> {
        check_dim(self.len(), blocks.len())?;
        for b in &blocks.blocks {
            check_dim(self.dim(), b.len())?;
        }
        let factors = self.sqrt_factors(tol)?;
        let mut out = DVector::zeros(self.dim());
        for ((r, &w), g) in factors.iter().zip(self.family.weights()).zip(&blocks.blocks) {
            out += (r.as_matrix() * g).scale(w);
        }
        Ok(out)
    }

    /// Recovers `f` from `g = S_W f` by a dense LU solve.
    pub fn reconstruct(&self, g: &DVector<T>, tol: &Tolerances) -> Result<DVector<T>> {
        check_dim(self.dim(), g.len())?;
        self.reconstructor(tol)?.solve(g)
    }

    /// Checks the frame condition and factorizes `S_W` once, for many solves.
    pub fn reconstructor(&self, tol: &Tolerances) -> Result<Reconstructor<T>> {
        let s = self.frame_operator().into_matrix();
        let report = bounds_of_operator::<T>(&s, tol);
        if !(report.form_is_real && report.bounds.is_frame(tol)) {
            return Err(FrameError::NotAFrame {
                lower: report.bounds.lower,
            });
        }
        let gl = hilbert::check_gl(&s, tol);
        if !gl.is_invertible {
            return Err(FrameError::SingularOperator {
                condition: gl.condition_number,
            });
        }
        Ok(Reconstructor {
            lu: s.clone().lu(),
            s,
            condition: gl.condition_number,
            residual_tol: tol.reconstruct,
        })
    }
}

/// A factorized frame operator; see [`ControlledFusionFrame::reconstructor`].
#[derive(Debug, Clone)]
pub struct Reconstructor<T: Scalar> {
    s: DMatrix<T>,
    lu: LU<T, Dyn, Dyn>,
    condition: f64,
    residual_tol: f64,
}

impl<T: Scalar> Reconstructor<T> {
    pub fn condition_number(&self) -> f64 {
        self.condition
    }

    /// Solves `S_W f = g`, rejecting solutions whose residual exceeds
    /// `tol.reconstruct · ‖g‖`.
    pub fn solve(&self, g: &DVector<T>) -> Result<DVector<T>> {
        check_dim(self.s.nrows(), g.len())?;
        let singular = FrameError::SingularOperator {
            condition: self.condition,
        };
        let x = self.lu.solve(g).ok_or(singular.clone())?;
        if (&self.s * &x - g).norm() > self.residual_tol * g.norm() {
            return Err(singular);
        }
        Ok(x)
    }
}

/// Bounds report for any (possibly non-Hermitian) frame-type operator.
pub fn bounds_of_operator<T: Scalar>(s: &DMatrix<T>, tol: &Tolerances) -> BoundsReport {
    let hermitian_residual = hilbert::hermitian_residual(s);
    let eig = hilbert::eigen_of_hermitian_part(s);
    let bounds = FrameBounds::optimal(eig.min(), eig.max());
    let form_is_real = match T::FIELD {
        Field::Real => true,
        Field::Complex => hermitian_residual <= tol.herm,
    };
    let classification = if !form_is_real {
        Classification::NotBesselForm
    } else if bounds.is_parseval(tol) {
        Classification::Parseval
    } else if bounds.is_tight(tol) {
        Classification::Tight
    } else if bounds.is_frame(tol) {
        Classification::Frame
    } else {
        Classification::BesselOnly
    };
    BoundsReport {
        bounds,
        hermitian_residual,
        form_is_real,
        classification,
    }
}
