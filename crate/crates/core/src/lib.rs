//! Finite-dimensional computations for CC′-controlled fusion frames.
//!
//! A controlled fusion frame is a weighted family of subspaces `{(W_i, v_i)}`
//! of `H = ℝⁿ` or `ℂⁿ` together with two invertible operators `C`, `C′`. Its
//! defining quadratic form is
//!
//! ```text
//! f ↦ Σ_i v_i² ⟨π_{W_i} C′ f, π_{W_i} C f⟩
//! ```
//!
//! and the associated operator is `S_W = Σ_i v_i² C* π_{W_i} C′`.
//!
//! The crate is organised bottom-up:
//!
//! * [`hilbert`]: dense linear algebra (orthonormal bases, projections,
//!   Hermitian eigenanalysis, PSD square roots, norms, pseudo-inverses).
//! * [`frames`]: classical vector frames.
//! * [`fusion`]: weighted subspace families and fusion frame bounds.
//! * [`controlled`]: the controlled operator, optimal bounds, the
//!   square-root analysis/synthesis operators and reconstruction.
//! * [`theorems`]: verifiers that compute a statement's hypothesis, its
//!   predicted bounds and the actual optimal bounds on concrete instances.
//! * [`instance`] and [`random`]: the JSON instance format and seeded
//!   instance generators.

pub mod controlled;
pub mod error;
pub mod fixtures;
pub mod frames;
pub mod fusion;
pub mod hilbert;
pub mod instance;
pub mod random;
pub mod scalar;
pub mod theorems;
pub mod tolerances;

pub use controlled::{BlockVector, BoundsReport, Classification, ControlPair, ControlledFusionFrame, Reconstructor};
pub use error::{FrameError, Result};
pub use frames::{FrameBounds, VectorFrame};
pub use fusion::WeightedSubspaceFamily;
pub use hilbert::{InvertibilityReport, Operator, SubspaceBasis};
pub use scalar::{Field, Scalar};
pub use tolerances::Tolerances;
