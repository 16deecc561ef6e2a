//! Nonlinearities, the penalty `f_r`, and the penalized energy with its derivatives.

mod energy;
mod nonlinearity;
mod penalty;

pub use energy::{
    energy, grad_energy, hessian_parts, hypothesis_check, multiplier, pde_residual, truncated_energy, EnergyBreakdown,
    HessianParts, HypothesisFlags,
};
pub use nonlinearity::{eval_f, GrowthCertificate, NonlinearitySpec, Parity, PowerTerm, Role};
pub use penalty::{beta_cutoff, penalty, PenaltyValues};

use crate::mesh::{BoundaryMode, ModeSpace};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("penalty argument s = {0} outside [0, 1)")]
    SOutOfRange(f64),
    #[error("penalty exponent r = {0} must exceed 1")]
    InvalidPenaltyExponent(f64),
    #[error("invalid power term a = {a}, p = {p}; need a > 0 and p > 2")]
    InvalidTerm { a: f64, p: f64 },
    #[error("growth certificate fails at t = {t}: |f(t)| = {value} > {bound}")]
    CertificateViolated { t: f64, value: f64, bound: f64 },
    #[error("mass {mass} is at or above the prescribed value {mu}")]
    MassAtOrAboveMu { mass: f64, mu: f64 },
    #[error("prescribed mass must be positive, got {0}")]
    InvalidMass(f64),
    #[error("Robin mode needs a boundary nonlinearity")]
    MissingBoundaryNonlinearity,
    #[error("a boundary nonlinearity is only allowed in Robin mode")]
    UnexpectedBoundaryNonlinearity,
    #[error("nonlinearity has the wrong role for this slot")]
    WrongRole,
}

/// `2* = 2N/(N-2)`, infinite for `N ≤ 2`.
pub fn critical_exponent(dim: usize) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    }
}

/// Trace critical exponent `2(N-1)/(N-2)`, infinite for `N ≤ 2`.
pub fn boundary_critical_exponent(dim: usize) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        2.0 * (dim as f64 - 1.0) / (dim as f64 - 2.0)
    }
}

/// `2 + 4/N`, the mass-critical exponent.
pub fn mass_critical_exponent(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

/// Convergence tolerances. Fields marked relative are scaled by the quantity named.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Gradient norm, relative to `‖A u‖` (both in the lumped dual norm).
    pub grad: f64,
    /// Mass error, relative to `mu`.
    pub mass: f64,
    /// PDE residual in the `M⁻¹` norm, absolute.
    pub resid: f64,
    /// Minimum `L²` distance between distinct solutions, relative to `sqrt(mu)`.
    pub distinct: f64,
    /// Penalty value at which continuation may stop, relative to the quadratic energy.
    pub pen: f64,
    /// Stage-to-stage `L²` drift at which continuation may stop, relative to `sqrt(mu)`.
    pub drift: f64,
    /// Threshold below which a multiplier counts as zero, relative to `lambda_ref`.
    pub lambda: f64,
    /// Reference eigenvalue for `lambda`, normally the first eigenvalue of the mode.
    pub lambda_ref: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            grad: 1e-10,
            mass: 1e-8,
            resid: 1e-7,
            distinct: 1e-4,
            pen: 1e-3,
            drift: 1e-2,
            lambda: 1e-6,
            lambda_ref: 1.0,
        }
    }
}

impl Tolerances {
    pub fn with_lambda_ref(mut self, lambda1: f64) -> Self {
        self.lambda_ref = lambda1;
        self
    }

    pub fn lambda_abs(&self) -> f64 {
        self.lambda * self.lambda_ref
    }
}

/// Everything needed to evaluate `E_{r,mu}` on a discrete space.
#[derive(Debug, Clone)]
pub struct PenalizedProblem {
    space: Arc<ModeSpace>,
    f: NonlinearitySpec,
    g: Option<NonlinearitySpec>,
    mu: f64,
    r: f64,
    shift: f64,
    tol: Tolerances,
}

impl PenalizedProblem {
    pub fn new(
        space: Arc<ModeSpace>,
        f: NonlinearitySpec,
        g: Option<NonlinearitySpec>,
        mu: f64,
        r: f64,
    ) -> Result<Self, FunctionalError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(FunctionalError::InvalidMass(mu));
        }
        if !(r > 1.0 && r.is_finite()) {
            return Err(FunctionalError::InvalidPenaltyExponent(r));
        }
        if f.role() != Role::Interior || g.as_ref().is_some_and(|g| g.role() != Role::Boundary) {
            return Err(FunctionalError::WrongRole);
        }
        match (space.mode(), g.is_some()) {
            (BoundaryMode::Robin, false) => return Err(FunctionalError::MissingBoundaryNonlinearity),
            (BoundaryMode::Dirichlet | BoundaryMode::Neumann, true) => {
                return Err(FunctionalError::UnexpectedBoundaryNonlinearity)
            }
            _ => {}
        }
        Ok(Self { space, f, g, mu, r, shift: 0.0, tol: Tolerances::default() })
    }

    pub fn with_r(&self, r: f64) -> Result<Self, FunctionalError> {
        if !(r > 1.0 && r.is_finite()) {
            return Err(FunctionalError::InvalidPenaltyExponent(r));
        }
        Ok(Self { r, ..self.clone() })
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self, FunctionalError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(FunctionalError::InvalidMass(mu));
        }
        Ok(Self { mu, ..self.clone() })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Adds `s M` to the quadratic form, so the working multiplier becomes `lambda + s`.
    pub fn with_shift(mut self, s: f64) -> Self {
        self.shift = s;
        self
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn space_arc(&self) -> Arc<ModeSpace> {
        Arc::clone(&self.space)
    }

    pub fn f(&self) -> &NonlinearitySpec {
        &self.f
    }

    pub fn g(&self) -> Option<&NonlinearitySpec> {
        self.g.as_ref()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// Difference between the working multiplier and the multiplier of `-Δu = λu + f(u)`.
    pub fn total_shift(&self) -> f64 {
        self.shift + self.space.mode().intrinsic_shift()
    }

    /// `(A + shift·M) u`.
    pub fn apply_a(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.space.apply_a(u);
        if self.shift != 0.0 {
            let mu = self.space.m().mul_vec(u);
            crate::linalg::axpy(self.shift, &mu, &mut y);
        }
        y
    }

    /// Squared working norm `uᵀ(A + shift·M)u`.
    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        crate::linalg::dot(u, &self.apply_a(u))
    }

    /// Discrete dual norm `sqrt(Σ g_i² / w_i)` with the lumped weights.
    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        crate::linalg::inv_weighted_norm(g, self.space.lumped_weights())
    }

    pub fn mass_of(&self, u: &[f64]) -> f64 {
        self.space.mass_of(u)
    }
}
