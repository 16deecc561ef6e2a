use crate::functionals::PenalizedProblem;
use crate::mesh::BoundaryMode;
use crate::solver::{detect_constant, CriticalPointRecord};
use crate::spectra::Spectrum;
use serde::{Deserialize, Serialize};

/// Absolute slack on the multiplier interval and the energy bound.
const SLACK: f64 = 1e-6;

/// Outcome of checking one record; `pass` is the conjunction of the individual checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub mass_error: f64,
    pub mass_ok: bool,
    pub pde_residual: f64,
    pub residual_ok: bool,
    pub lambda_pde: f64,
    /// Admissible interval for `lambda_pde`; the upper end is infinite in Neumann mode.
    pub lambda_range: (f64, f64),
    pub lambda_ok: bool,
    /// Energy of `-Δu = λu + f(u)` in the mode's working norm, without any user shift.
    pub energy: f64,
    pub energy_bound: f64,
    pub energy_ok: bool,
    /// Neumann only: whether `u` is a constant function.
    pub constant: Option<bool>,
    pub pass: bool,
}

/// Checks a record against mass, residual, multiplier range and energy bound.
///
/// The reference eigenvalue is that of the eigenvector the run was seeded from
/// (`rec.seed_id`), so mountain-pass records are checked against `λ₁` and fountain
/// records against their own `λ_j`. Dirichlet and Robin records need
/// `lambda_pde ∈ [0, λ_j]`; Neumann records need `lambda_pde ≥ -1`.
pub fn verify_solution(rec: &CriticalPointRecord, prob: &PenalizedProblem, spectrum: &Spectrum) -> Verdict {
    let tol = prob.tol();
    let mu = prob.mu();
    let mode = prob.space().mode();
    let k = rec.seed_id.clamp(1, spectrum.len());
    let lambda_ref = spectrum.lambda(k);
    let intrinsic = mode.intrinsic_shift();

    let mass_error = (rec.mass - mu).abs();
    let mass_ok = mass_error <= tol.mass * mu;
    let residual_ok = rec.pde_residual <= tol.resid;
    let lambda_range = match mode {
        BoundaryMode::Neumann => (-1.0, f64::INFINITY),
        _ => (0.0, lambda_ref - intrinsic),
    };
    let lambda_ok = rec.lambda_pde >= lambda_range.0 - SLACK && rec.lambda_pde <= lambda_range.1 + SLACK;
    let energy = rec.energy_unpenalized - 0.5 * prob.shift() * rec.mass;
    let energy_bound = 0.5 * mu * lambda_ref;
    let energy_ok = energy <= energy_bound + SLACK;
    let constant = (mode == BoundaryMode::Neumann).then(|| detect_constant(&rec.u));
    Verdict {
        mass_error,
        mass_ok,
        pde_residual: rec.pde_residual,
        residual_ok,
        lambda_pde: rec.lambda_pde,
        lambda_range,
        lambda_ok,
        energy,
        energy_bound,
        energy_ok,
        constant,
        pass: mass_ok && residual_ok && lambda_ok && energy_ok,
    }
}
