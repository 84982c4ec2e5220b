//! Numerical tolerances used across the crate.
//!
//! Every threshold lives in [`Tolerances`] so a caller (or the CLI's
//! `--tol name=value` flag) can tighten or relax any of them. Relative
//! tolerances are scaled by `max(1, ‖·‖)` of the quantity being tested.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// `‖Q*Q − I‖` accepted for a caller-supplied orthonormal basis (relative).
    pub orth: f64,
    /// Relative singular-value cutoff for numerical rank and pseudo-inverses.
    pub rank: f64,
    /// Relative Hermitian residual accepted by eigen and square-root routines.
    pub herm: f64,
    /// Negative eigenvalues above `-psd * max(1, λ_max)` are clipped to zero.
    pub psd: f64,
    /// `σ_min > inv * σ_max` for an operator to count as invertible.
    pub inv: f64,
    /// Relative lower-bound threshold: frame iff `A > frame * max(1, B)`.
    pub frame: f64,
    /// Tight iff `B − A ≤ tight * max(1, B)`; Parseval additionally needs `|A−1|, |B−1| ≤ tight`.
    pub tight: f64,
    /// Relative residual for commutation, unitarity and `C = C′` hypotheses.
    pub commute: f64,
    /// Absolute slack when comparing predicted and actual bounds.
    pub containment: f64,
    /// Largest accepted `‖T*_W Q T_W̃ − Id‖` for a Q-dual.
    pub qdual: f64,
    /// Quadratic forms below `-form_floor` (on unit vectors) count as negative.
    pub form_floor: f64,
    /// Relative residual `‖S x − g‖ / ‖g‖` accepted by reconstruction.
    pub reconstruct: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            orth: 1e-12,
            rank: 1e-10,
            herm: 1e-10,
            psd: 1e-9,
            inv: 1e-12,
            frame: 1e-9,
            tight: 1e-9,
            commute: 1e-9,
            containment: 1e-7,
            qdual: 1e-8,
            form_floor: 1e-12,
            reconstruct: 1e-9,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 12] = [
        "orth",
        "rank",
        "herm",
        "psd",
        "inv",
        "frame",
        "tight",
        "commute",
        "containment",
        "qdual",
        "form_floor",
        "reconstruct",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "orth" => &mut self.orth,
            "rank" => &mut self.rank,
            "herm" => &mut self.herm,
            "psd" => &mut self.psd,
            "inv" => &mut self.inv,
            "frame" => &mut self.frame,
            "tight" => &mut self.tight,
            "commute" => &mut self.commute,
            "containment" => &mut self.containment,
            "qdual" => &mut self.qdual,
            "form_floor" => &mut self.form_floor,
            "reconstruct" => &mut self.reconstruct,
            _ => return None,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(name).map(|v| *v)
    }

    /// Overrides a named tolerance. Values must be finite and nonnegative.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() || value < 0.0 {
            return Err(FrameError::InvalidParams(format!(
                "tolerance {name} must be finite and nonnegative, got {value}"
            )));
        }
        let slot = self
            .slot(name)
            .ok_or_else(|| FrameError::UnknownTolerance(name.to_string()))?;
        *slot = value;
        Ok(())
    }

    /// Parses a `name=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| FrameError::InvalidParams(format!("expected name=value, got '{spec}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| FrameError::InvalidParams(format!("bad tolerance value in '{spec}'")))?;
        self.set(name.trim(), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        Self::NAMES.iter().map(move |&n| (n, self.get(n).unwrap()))
    }
}
