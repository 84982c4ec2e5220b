//! Seeded random instances.
//!
//! All randomness comes from one `u64` seed fed to ChaCha20
//! ([`rand_chacha::ChaCha20Rng::seed_from_u64`]). Gaussian samples use the
//! `rand_distr` standard normal; complex Gaussians are `(x + iy)/√2`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::controlled::{ControlPair, ControlledFusionFrame};
use crate::error::{FrameError, Result};
use crate::fusion::WeightedSubspaceFamily;
use crate::hilbert::{self, Operator, SubspaceBasis};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9, ChaCha20Rng::seed_from_u64; 20 rounds)";

pub type SeededRng = ChaCha20Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<T> {
    DVector::from_iterator(n, (0..n).map(|_| T::gaussian(rng)))
}

/// Uniform on the unit sphere of `𝔽ⁿ`.
pub fn unit_vector<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<T> {
    loop {
        let v = gaussian_vector::<T, R>(rng, n);
        let norm = v.norm();
        if norm > 1e-12 {
            return v.unscale(norm);
        }
    }
}

pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::gaussian(rng))
}

/// Random unitary (orthogonal over ℝ) from the QR factor of a Gaussian matrix.
pub fn unitary<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<T> {
    let tol = Tolerances::default();
    loop {
        let g = gaussian_matrix::<T, R>(rng, n, n);
        if let Ok(b) = hilbert::orthonormalize_columns(&g, &tol) {
            if b.rank() == n {
                return b.columns().clone();
            }
        }
    }
}

/// A `k`-dimensional subspace from an orthonormalised Gaussian `n × k` matrix.
pub fn subspace<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> SubspaceBasis<T> {
    let tol = Tolerances::default();
    loop {
        let g = gaussian_matrix::<T, R>(rng, n, k);
        if let Ok(b) = hilbert::orthonormalize_columns(&g, &tol) {
            if b.rank() == k {
                return b;
            }
        }
    }
}

/// Log-uniform in `[0.5, 2]`.
pub fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let lo = 0.5f64.ln();
    let hi = 2.0f64.ln();
    rng.random_range(lo..=hi).exp()
}

/// `Id + E` with a small Gaussian `E`, shrunk until `σ_min ≥ 0.1`.
pub fn control<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Operator<T> {
    let mut e = gaussian_matrix::<T, R>(rng, n, n).scale(0.3 / (n as f64).sqrt());
    loop {
        let c = DMatrix::identity(n, n) + &e;
        let smallest = hilbert::singular_values(&c).last().copied().unwrap_or(0.0);
        if smallest >= 0.1 {
            return Operator::new(c).expect("finite control");
        }
        e.scale_mut(0.5);
    }
}

/// Hermitian positive definite `V diag(d) V*` with `d ∈ [0.5, 2]`.
pub fn positive_control<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Operator<T> {
    let v = unitary::<T, R>(rng, n);
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..=2.0)).collect();
    let mut scaled = v.clone();
    for (j, &dj) in d.iter().enumerate() {
        scaled.column_mut(j).scale_mut(dj);
    }
    Operator::new(hilbert::hermitian_part(&(scaled * v.adjoint()))).expect("finite control")
}

/// How the control pair of a generated instance is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ControlConstraint {
    /// Independent `C`, `C′`.
    #[default]
    None,
    /// `C = C′`.
    SameControls,
    /// `C = C′ = Id`.
    IdentityControls,
    /// `C = C′` Hermitian positive definite; every `C* π C` is then Hermitian PSD.
    GatePassing,
}

impl std::str::FromStr for ControlConstraint {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "same-controls" => Ok(Self::SameControls),
            "identity-controls" => Ok(Self::IdentityControls),
            "gate-passing" => Ok(Self::GatePassing),
            _ => Err(FrameError::InvalidParams(format!("unknown constraint '{s}'"))),
        }
    }
}

pub fn control_pair<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: ControlConstraint,
    tol: &Tolerances,
) -> ControlPair<T> {
    let pair = match constraint {
        ControlConstraint::None => {
            let c = control::<T, R>(rng, n);
            let cp = control::<T, R>(rng, n);
            ControlPair::new(c, cp, tol)
        }
        ControlConstraint::SameControls => ControlPair::squared(control::<T, R>(rng, n), tol),
        ControlConstraint::IdentityControls => Ok(ControlPair::identity(n)),
        ControlConstraint::GatePassing => ControlPair::squared(positive_control::<T, R>(rng, n), tol),
    };
    pair.expect("generated controls are invertible")
}

/// `m` random subspaces with random dimensions in `1..=max_rank` and log-uniform weights.
pub fn family<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize, max_rank: usize) -> WeightedSubspaceFamily<T> {
    let max_rank = max_rank.clamp(1, n);
    let items = (0..m)
        .map(|_| {
            let k = rng.random_range(1..=max_rank);
            let b = subspace::<T, R>(rng, n, k);
            (b, weight(rng))
        })
        .collect();
    WeightedSubspaceFamily::new(items).expect("valid generated family")
}

/// A random family redrawn until its fusion lower bound exceeds `1e-3`.
pub fn spanning_family<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> WeightedSubspaceFamily<T> {
    loop {
        let m = rng.random_range(n.div_ceil(2).max(2)..=n + 2);
        let fam = family::<T, R>(rng, n, m, n);
        if fam.fusion_bounds().lower > 1e-3 {
            return fam;
        }
    }
}

const MAX_DRAWS: usize = 10_000;

/// A random controlled fusion frame, redrawn until it is a frame with a real form.
///
/// Over ℂ with independent controls the form is almost never real, so this
/// panics after a fixed number of draws rather than looping forever.
pub fn controlled_frame<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: ControlConstraint,
    tol: &Tolerances,
) -> ControlledFusionFrame<T> {
    for _ in 0..MAX_DRAWS {
        let fam = spanning_family::<T, R>(rng, n);
        let controls = control_pair::<T, R>(rng, n, constraint, tol);
        let frame = ControlledFusionFrame::new(fam, controls).expect("matching dimensions");
        let report = frame.bounds(tol);
        if report.form_is_real && report.bounds.is_frame(tol) {
            return frame;
        }
    }
    panic!("no {} frame found in {MAX_DRAWS} draws with constraint {constraint:?}", T::FIELD);
}

/// Any random controlled fusion frame candidate; not necessarily a frame.
pub fn controlled_instance<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    constraint: ControlConstraint,
    tol: &Tolerances,
) -> ControlledFusionFrame<T> {
    let m = rng.random_range(2..=n + 2);
    let fam = family::<T, R>(rng, n, m, n);
    let controls = control_pair::<T, R>(rng, n, constraint, tol);
    ControlledFusionFrame::new(fam, controls).expect("matching dimensions")
}

/// Drops the last basis vector of each subspace of rank ≥ 2 with probability `p`.
///
/// Every `Z_i ⊆ W_i`, so `C*(π_{W_i} − π_{Z_i})C` is PSD for `C′ = C`.
pub fn shrunk_subspaces<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    family: &WeightedSubspaceFamily<T>,
    p: f64,
) -> Vec<SubspaceBasis<T>> {
    let tol = Tolerances::default();
    family
        .subspaces()
        .iter()
        .map(|b| {
            if b.rank() >= 2 && rng.random_bool(p) {
                let cols = b.columns().columns(0, b.rank() - 1).into_owned();
                SubspaceBasis::from_orthonormal(cols, &tol).expect("sub-basis stays orthonormal")
            } else {
                b.clone()
            }
        })
        .collect()
}

/// `Z_i = span(Q_i + σ G_i)` for Gaussian `G_i`, same ranks as `W_i`.
pub fn perturbed_subspaces<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    family: &WeightedSubspaceFamily<T>,
    sigma: f64,
) -> Vec<SubspaceBasis<T>> {
    let tol = Tolerances::default();
    family
        .subspaces()
        .iter()
        .map(|b| loop {
            let g = gaussian_matrix::<T, R>(rng, b.ambient_dim(), b.rank());
            let moved = b.columns() + g.scale(sigma);
            if let Ok(z) = hilbert::orthonormalize_columns(&moved, &tol) {
                if z.rank() == b.rank() {
                    break z;
                }
            }
        })
        .collect()
}

/// A direction inside `W_i`'s orthogonal complement for every basis vector,
/// fixed once so that a whole rotation sweep shares it.
pub fn rotation_partners<T: Scalar, R: Rng + ?Sized>(rng: &mut R, family: &WeightedSubspaceFamily<T>) -> Vec<DMatrix<T>> {
    family
        .subspaces()
        .iter()
        .map(|b| {
            let n = b.ambient_dim();
            let k = b.rank();
            let q = b.columns();
            let g = gaussian_matrix::<T, R>(rng, n, k);
            // project out W_i, then orthonormalise
            let g = &g - q * (q.adjoint() * &g);
            let basis = hilbert::orthonormalize_columns(&g, &Tolerances::default()).expect("complement direction");
            assert_eq!(basis.rank(), k, "complement must have room for k directions");
            basis.columns().clone()
        })
        .collect()
}

/// `Z_i(θ) = span{cos θ w_j + sin θ u_j}`: every principal angle between
/// `W_i` and `Z_i(θ)` equals `θ` for `θ ∈ [0, π/2]`.
pub fn rotated_subspaces<T: Scalar>(
    family: &WeightedSubspaceFamily<T>,
    partners: &[DMatrix<T>],
    theta: f64,
) -> Vec<SubspaceBasis<T>> {
    let tol = Tolerances::default();
    family
        .subspaces()
        .iter()
        .zip(partners)
        .map(|(b, u)| {
            let cols = b.columns().scale(theta.cos()) + u.scale(theta.sin());
            SubspaceBasis::from_orthonormal(cols, &tol).expect("rotation preserves orthonormality")
        })
        .collect()
}

/// `u = p(C)*` with a random quadratic `p`; then `u* C = C u*`.
pub fn adjoint_commuting_transform<T: Scalar, R: Rng + ?Sized>(rng: &mut R, c: &Operator<T>, tol: &Tolerances) -> Operator<T> {
    let n = c.dim();
    let c = c.as_matrix();
    loop {
        let a0 = T::gaussian(rng) + T::from_real(if rng.random_bool(0.5) { 2.0 } else { -2.0 });
        let a1 = T::gaussian(rng);
        let a2 = T::gaussian(rng).scale(0.3);
        let p = DMatrix::<T>::identity(n, n) * a0 + c * a1 + (c * c) * a2;
        let u = p.adjoint();
        let report = hilbert::check_gl(&u, tol);
        if report.is_invertible && report.condition_number < 1e4 {
            return Operator::new(u).expect("finite transform");
        }
    }
}

/// A control `C = V D V*` with repeated diagonal entries and a unitary `u`
/// acting inside each eigenspace of `C`, so that `u C = C u`.
pub fn unitary_commuting_pair<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Operator<T>, Operator<T>) {
    let v = unitary::<T, R>(rng, n);
    let mut d = DMatrix::<T>::zeros(n, n);
    let mut u_block = DMatrix::<T>::zeros(n, n);
    let mut start = 0;
    while start < n {
        let size = rng.random_range(1..=(n - start).min(3));
        let value = rng.random_range(0.5..=2.0);
        for j in start..start + size {
            d[(j, j)] = T::from_real(value);
        }
        let block = unitary::<T, R>(rng, size);
        u_block.view_mut((start, start), (size, size)).copy_from(&block);
        start += size;
    }
    let c = &v * d * v.adjoint();
    let u = &v * u_block * v.adjoint();
    (
        Operator::new(hilbert::hermitian_part(&c)).expect("finite control"),
        Operator::new(u).expect("finite transform"),
    )
}

/// A permutation matrix that only permutes coordinates sharing a diagonal
/// value of `diag`, so it commutes with `diag(d)`.
pub fn orbit_permutation<R: Rng + ?Sized>(rng: &mut R, diag: &[f64]) -> DMatrix<f64> {
    let n = diag.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &x) in diag.iter().enumerate() {
        match groups.iter_mut().find(|g| diag[g[0]] == x) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    for g in &groups {
        let mut shuffled = g.clone();
        for i in (1..shuffled.len()).rev() {
            let j = rng.random_range(0..=i);
            shuffled.swap(i, j);
        }
        for (&from, &to) in g.iter().zip(&shuffled) {
            perm[from] = to;
        }
    }
    DMatrix::from_fn(n, n, |i, j| if perm[j] == i { 1.0 } else { 0.0 })
}
