//! Critical points of the penalized energy and their continuation in `r`.
//!
//! A run starts from the maximum of `E_{r0,mu}` along an eigenvector ray, follows the
//! critical point as `r` grows geometrically, and finishes with a Newton solve of the
//! constrained system `(u, lambda)` itself, which is the `r → ∞` limit. The last step is
//! what brings the mass error down to round-off; at any finite `r` the mass sits a
//! distance of order `log r / r` below `mu`.

mod continuation;
mod multiplicity;
mod newton;

pub(crate) use continuation::polish_unconstrained;
pub use continuation::{continue_in_r, seed_amplitude, ContinuationRun, ContinuationSchedule, StageRow, StopReason};
pub use multiplicity::{cluster_seeds, detect_constant, multiplicity, sign_changes};
pub use newton::{critical_point, Deflation, NewtonOptions};

use crate::functionals::{energy, multiplier, pde_residual, FunctionalError, PenalizedProblem};
use crate::linalg::LinalgError;
use crate::spectra::SpectraError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("seed mass {mass} is not below mu = {mu}")]
    SeedOutsideMassBall { mass: f64, mu: f64 },
    #[error("iteration collapsed to the trivial critical point")]
    CollapsedToZero,
    #[error("no convergence at r = {r} (residual {residual:e})")]
    NoConverge { r: f64, residual: f64 },
    #[error("found {} of {wanted} distinct solutions", found.len())]
    FoundFewer { wanted: usize, found: Vec<ContinuationRun> },
    #[error("multiplicity requires an odd nonlinearity")]
    NonOddNonlinearity,
    #[error("invalid continuation schedule: {0}")]
    InvalidSchedule(String),
    #[error("seed has length {got}, expected {expected}")]
    SeedLength { expected: usize, got: usize },
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which alternative of the mass dichotomy a limit falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionCase {
    /// The constraint is attained and `u` solves the equation with multiplier `lambda`.
    MassAttained,
    /// The mass stays below `mu` and the multiplier vanishes.
    MassDeficitLambdaZero,
    NoConverge,
}

/// A converged critical point with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    /// Values on the free degrees of freedom.
    pub u: Vec<f64>,
    pub r_final: f64,
    /// Multiplier in the working quadratic form (includes any shift).
    pub lambda: f64,
    /// Multiplier of `-Δu = lambda u + f(u)`.
    pub lambda_pde: f64,
    pub mass: f64,
    pub energy_unpenalized: f64,
    pub energy_penalized: f64,
    /// `M⁻¹`-norm of `A u - lambda M u - w∘f(u) - wb∘g(u)`.
    pub pde_residual: f64,
    /// Lumped dual norm of the residual actually driven to zero.
    pub grad_norm: f64,
    /// `(1 + ‖u‖) · grad_norm`, the quantity controlled along Cerami sequences.
    pub cerami_norm: f64,
    pub seed_id: usize,
    pub deflated_against: Vec<usize>,
    pub case: SolutionCase,
    pub iterations: usize,
}

pub(crate) fn classify(prob: &PenalizedProblem, mass: f64, lambda: f64) -> SolutionCase {
    let tol = prob.tol();
    if (mass - prob.mu()).abs() <= tol.mass * prob.mu() {
        SolutionCase::MassAttained
    } else if lambda.abs() <= tol.lambda_abs() {
        SolutionCase::MassDeficitLambdaZero
    } else {
        SolutionCase::NoConverge
    }
}

/// Fills in every diagnostic for `u` with the given working multiplier.
pub(crate) fn make_record(
    prob: &PenalizedProblem,
    u: Vec<f64>,
    lambda: f64,
    seed_id: usize,
    iterations: usize,
) -> Result<CriticalPointRecord, SolverError> {
    let e = energy(prob, &u);
    let resid = pde_residual(prob, &u, lambda);
    let grad_norm = prob.dual_norm(&resid);
    let pde = prob.space().inverse_mass_norm(&resid)?;
    let norm = prob.norm_sq(&u).max(0.0).sqrt();
    Ok(CriticalPointRecord {
        r_final: prob.r(),
        lambda,
        lambda_pde: lambda - prob.total_shift(),
        mass: e.mass,
        energy_unpenalized: e.total_unpenalized,
        energy_penalized: e.total_penalized,
        pde_residual: pde,
        grad_norm,
        cerami_norm: (1.0 + norm) * grad_norm,
        seed_id,
        deflated_against: Vec::new(),
        case: classify(prob, e.mass, lambda),
        iterations,
        u,
    })
}

/// Record at a critical point of `E_{r,mu}`, whose multiplier is `(2/mu) f_r'(mass/mu)`.
pub(crate) fn penalized_record(
    prob: &PenalizedProblem,
    u: Vec<f64>,
    seed_id: usize,
    iterations: usize,
) -> Result<CriticalPointRecord, SolverError> {
    let lambda = multiplier(prob, prob.mass_of(&u))?;
    make_record(prob, u, lambda, seed_id, iterations)
}
