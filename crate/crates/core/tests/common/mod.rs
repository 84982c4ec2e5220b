//! Seeded instance builders shared by the integration suites.
//!
//! Each builder retries until the relevant hypothesis holds, so suites can
//! count "hypothesis satisfied" instances directly.

#![allow(dead_code)]

use ccfusion::random::{self, ControlConstraint, SeededRng};
use ccfusion::theorems::{self, PerturbationParams, QDual, TransformMode};
use ccfusion::{ControlPair, ControlledFusionFrame, Operator, Scalar, SubspaceBasis, Tolerances};
use nalgebra::DMatrix;
use rand::Rng;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn dim(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

pub fn gated<T: Scalar>(rng: &mut SeededRng, n: usize) -> ControlledFusionFrame<T> {
    random::controlled_frame(rng, n, ControlConstraint::GatePassing, &tol())
}

pub fn transform_case<T: Scalar>(rng: &mut SeededRng, n: usize, mode: TransformMode) -> (ControlledFusionFrame<T>, Operator<T>) {
    let tol = tol();
    match mode {
        TransformMode::AdjointCommuting => {
            let constraint = if rng.random_bool(0.5) {
                ControlConstraint::SameControls
            } else {
                ControlConstraint::GatePassing
            };
            let frame: ControlledFusionFrame<T> = random::controlled_frame(rng, n, constraint, &tol);
            let u = random::adjoint_commuting_transform(rng, frame.controls().c(), &tol);
            (frame, u)
        }
        TransformMode::UnitaryCommuting => {
            let (c, u) = random::unitary_commuting_pair::<T, _>(rng, n);
            let family = random::spanning_family::<T, _>(rng, n);
            let controls = ControlPair::squared(c, &tol).unwrap();
            (ControlledFusionFrame::new(family, controls).unwrap(), u)
        }
    }
}

/// `C = C′ = s F^{-1/2}` and `Z` a small perturbation of `W` with the same
/// weights and controls, redrawn until `ε = ‖Id − T*_Z T_W‖ < 1`.
pub fn approximate_dual_case<T: Scalar>(rng: &mut SeededRng, n: usize) -> (ControlledFusionFrame<T>, ControlledFusionFrame<T>) {
    let tol = tol();
    loop {
        let family = random::spanning_family::<T, _>(rng, n);
        let base = theorems::canonical_parseval_controls(&family, &tol).unwrap();
        let s = rng.random_range(0.8..1.2);
        let c = Operator::new(base.c().as_matrix().scale(s)).unwrap();
        let w = ControlledFusionFrame::new(family, ControlPair::squared(c, &tol).unwrap()).unwrap();
        let sigma = rng.random_range(0.0..0.2);
        let moved = random::perturbed_subspaces(rng, w.family(), sigma);
        let z = w.with_family(w.family().with_subspaces(moved).unwrap()).unwrap();
        let report = theorems::verify_approximate_dual(&w, &z, &tol).unwrap();
        if report.hypothesis_satisfied {
            return (w, z);
        }
    }
}

/// A gated frame and a nearby family of subspaces with `ε_eff < √A`.
pub fn subspace_case<T: Scalar>(rng: &mut SeededRng, n: usize) -> (ControlledFusionFrame<T>, Vec<SubspaceBasis<T>>) {
    let tol = tol();
    loop {
        let w: ControlledFusionFrame<T> = if rng.random_bool(0.5) {
            gated(rng, n)
        } else {
            random::controlled_frame(rng, n, ControlConstraint::SameControls, &tol)
        };
        let z = if rng.random_bool(0.5) {
            let sigma = rng.random_range(0.0..0.1);
            random::perturbed_subspaces(rng, w.family(), sigma)
        } else {
            random::shrunk_subspaces(rng, w.family(), 0.3)
        };
        let report = theorems::verify_subspace_perturbation(&w, &z, None, &tol).unwrap();
        if report.hypothesis_satisfied {
            return (w, z);
        }
    }
}

pub struct LambdaCase<T: Scalar> {
    pub w: ControlledFusionFrame<T>,
    pub z: ControlledFusionFrame<T>,
    pub params: PerturbationParams,
    pub seed: u64,
}

/// `Z_i ⊆ W_i`, random `λ₁, λ₂ ∈ [0, 0.3)`, `β` fitted on the sample set.
pub fn lambda_case<T: Scalar>(rng: &mut SeededRng, n: usize, samples: usize) -> LambdaCase<T> {
    let tol = tol();
    loop {
        let w: ControlledFusionFrame<T> = gated(rng, n);
        let p = rng.random_range(0.05..0.5);
        let shrunk = random::shrunk_subspaces(rng, w.family(), p);
        let z = w.with_family(w.family().with_subspaces(shrunk).unwrap()).unwrap();
        let (l1, l2) = (rng.random_range(0.0..0.3), rng.random_range(0.0..0.3));
        let seed: u64 = rng.random();
        let beta = theorems::fit_beta(&w, &z, l1, l2, samples, seed).unwrap();
        let params = PerturbationParams::new(l1, l2, beta).unwrap();
        let report = theorems::verify_lambda_perturbation(&w, &z, &params, samples, seed, &tol).unwrap();
        if report.hypothesis_satisfied {
            return LambdaCase { w, z, params, seed };
        }
    }
}

pub fn q_dual_case<T: Scalar>(rng: &mut SeededRng, n: usize) -> (ControlledFusionFrame<T>, ControlledFusionFrame<T>, QDual<T>) {
    let w: ControlledFusionFrame<T> = gated(rng, n);
    let w_tilde: ControlledFusionFrame<T> = if rng.random_bool(0.3) { w.clone() } else { gated(rng, n) };
    let seed: u64 = rng.random();
    let q = theorems::construct_q_dual(&w, &w_tilde, seed, &tol()).unwrap();
    (w, w_tilde, q)
}

/// A family whose subspaces have rank at most `n/2`, with scalar controls,
/// and the fixed rotation partners for a sweep.
pub fn rotation_case<T: Scalar>(rng: &mut SeededRng, n: usize) -> (ControlledFusionFrame<T>, Vec<DMatrix<T>>) {
    let tol = tol();
    let m = rng.random_range(2..=n + 1);
    let family = random::family::<T, _>(rng, n, m, n / 2);
    let s = rng.random_range(0.5..2.0);
    let c = Operator::new(DMatrix::<T>::identity(n, n).scale(s)).unwrap();
    let w = ControlledFusionFrame::new(family, ControlPair::squared(c, &tol).unwrap()).unwrap();
    let partners = random::rotation_partners(rng, w.family());
    (w, partners)
}
