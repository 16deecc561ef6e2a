use super::thresholds::{threshold_mu_star, MuStarInput};
use super::CertificateError;
use crate::functionals::{energy, mass_critical_exponent, NonlinearitySpec, PenalizedProblem};
use crate::linalg::{add, scaled, sub};
use crate::mesh::{BoundaryMode, ModeSpace};
use crate::solver::polish_unconstrained;
use crate::spectra::Spectrum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Smallest mass a nontrivial zero-multiplier critical point with `E ≤ M` can have.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionBound {
    pub value: f64,
    /// `true` on the `p ≤ 2 + 4/N` branch, where the bound is explicit. Above it the
    /// bound depends on the a-priori radius and is reported as a diagnostic only.
    pub certified: bool,
    /// A-priori radius `R = sqrt(2qM/(q-2))` used on the supercritical branch.
    pub radius: Option<f64>,
}

/// Mass below which `H¹₀` critical points of `E` with `E ≤ M` cannot exist.
///
/// On the subcritical branch this is `((λ₁-K₂)/(K_p C))^{2/(p-2)} λ₁^{-N/2}`; above it,
/// `((λ₁-K₂)/(λ₁ K_p C R^{βp-2}))^{2/((1-β)p)}`.
#[allow(clippy::too_many_arguments)]
pub fn exclusion_bound(
    k2: f64,
    kp: f64,
    p: f64,
    q: f64,
    lambda1: f64,
    dim: usize,
    c: f64,
    m: f64,
) -> Result<ExclusionBound, CertificateError> {
    let inp = MuStarInput { k2, kp, p, q, lambda1, dim, m, c };
    let sub_value = threshold_mu_star(&inp)?;
    if p <= mass_critical_exponent(dim) {
        return Ok(ExclusionBound { value: sub_value, certified: true, radius: None });
    }
    let beta = dim as f64 * (0.5 - 1.0 / p);
    let r = (2.0 * q * m / (q - 2.0)).sqrt();
    let value = ((lambda1 - k2) / (lambda1 * kp * c * r.powf(beta * p - 2.0))).powf(2.0 / ((1.0 - beta) * p));
    Ok(ExclusionBound { value, certified: false, radius: Some(r) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mu0Solution {
    pub mass: f64,
    pub energy: f64,
    /// Index of the eigenvector the Newton start was built from.
    pub start_k: usize,
    #[serde(skip)]
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mu0Report {
    pub bound: ExclusionBound,
    pub energy_level: f64,
    /// Distinct nontrivial solutions of `-Δu = f(u)` found, up to sign.
    pub solutions: Vec<Mu0Solution>,
    /// Smallest mass among the solutions with `E ≤ M`.
    pub min_mass: Option<f64>,
    /// No solution with `E ≤ M` has mass at or below the bound.
    pub consistent: bool,
}

/// Multi-start Newton search for solutions of the zero-multiplier equation, compared
/// against the exclusion bound.
///
/// Starts are eigenvectors scaled so that `f(t)/t` matches their eigenvalue, at several
/// multiples of that amplitude; they are solved in parallel and deduplicated up to sign.
pub fn threshold_mu0_scan(
    space: Arc<ModeSpace>,
    f: &NonlinearitySpec,
    spectrum: &Spectrum,
    m: f64,
    c: f64,
) -> Result<Mu0Report, CertificateError> {
    if space.mode() != BoundaryMode::Dirichlet {
        return Err(CertificateError::ModeUnsupported(space.mode()));
    }
    let cert = f.certificate();
    let dim = space.dim();
    let lambda1 = spectrum.lambda(1);
    if f.is_zero() {
        return Err(CertificateError::NoSolutionsFound);
    }
    let bound = exclusion_bound(cert.k2, cert.kp, cert.p, cert.q, lambda1, dim, c, m)?;
    let prob = PenalizedProblem::new(space.clone(), f.clone(), None, 1e300, 2.0)
        .map_err(|e| CertificateError::HypothesisViolated(e.to_string()))?;

    let mut starts = Vec::new();
    for k in 1..=spectrum.len().min(4) {
        let phi = spectrum.vector(k);
        let peak = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let Some(t) = amplitude_for(f, spectrum.lambda(k)) else { continue };
        for factor in [0.5, 1.0, 1.5, 2.0, 3.0] {
            starts.push((k, scaled(factor * t / peak, phi)));
        }
    }
    if starts.is_empty() {
        return Err(CertificateError::NoSolutionsFound);
    }
    let results: Vec<Option<Mu0Solution>> = starts
        .par_iter()
        .map(|(k, s)| {
            let (u, _) = polish_unconstrained(&prob, s)?;
            let mass = prob.mass_of(&u);
            let scale = prob.dual_norm(&prob.apply_a(&u));
            let res = prob.dual_norm(&crate::functionals::pde_residual(&prob, &u, 0.0));
            if !(mass > 1e-12) || !(res <= 1e-9 * scale) {
                return None;
            }
            let e = energy(&prob, &u);
            Some(Mu0Solution { mass, energy: 0.5 * prob.norm_sq(&u) - e.psi, start_k: *k, u })
        })
        .collect();

    let mut solutions: Vec<Mu0Solution> = Vec::new();
    for sol in results.into_iter().flatten() {
        let dup = solutions.iter().any(|s| {
            let d = prob.mass_of(&sub(&s.u, &sol.u)).min(prob.mass_of(&add(&s.u, &sol.u)));
            d.sqrt() <= 1e-6 * sol.mass.sqrt()
        });
        if !dup {
            solutions.push(sol);
        }
    }
    if solutions.is_empty() {
        return Err(CertificateError::NoSolutionsFound);
    }
    let min_mass = solutions
        .iter()
        .filter(|s| s.energy <= m)
        .map(|s| s.mass)
        .fold(None, |a: Option<f64>, v| Some(a.map_or(v, |a| a.min(v))));
    let consistent = min_mass.is_none_or(|mm| !(mm <= bound.value));
    Ok(Mu0Report { bound, energy_level: m, solutions, min_mass, consistent })
}

/// Amplitude `t > 0` with `f(t)/t = lambda`, if `f(t)/t` reaches `lambda`.
fn amplitude_for(f: &NonlinearitySpec, lambda: f64) -> Option<f64> {
    let g = |t: f64| f.f(t) / t - lambda;
    let (mut lo, mut hi) = (1e-8, 1e8);
    if g(lo) >= 0.0 || g(hi) <= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Role;
    use crate::mesh::{assemble, build_domain, DomainKind};
    use crate::spectra::solve_eigs;

    fn setup(n: usize) -> (Arc<ModeSpace>, Spectrum) {
        let d = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        let space = Arc::new(ModeSpace::new(&assemble(&d, n).unwrap(), BoundaryMode::Dirichlet));
        let s = solve_eigs(&space, 4).unwrap();
        (space, s)
    }

    #[test]
    fn zero_nonlinearity_has_no_solutions() {
        let (space, s) = setup(32);
        let r = threshold_mu0_scan(space, &NonlinearitySpec::zero(Role::Interior), &s, 1.0, 0.5);
        assert!(matches!(r, Err(CertificateError::NoSolutionsFound)));
    }

    #[test]
    fn cubic_solutions_exceed_bound() {
        let (space, s) = setup(128);
        let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap();
        let rep = threshold_mu0_scan(space, &f, &s, 1e6, 0.55).unwrap();
        assert!(rep.bound.certified);
        assert!(rep.consistent);
        assert!(rep.min_mass.unwrap() > rep.bound.value);
        // Sign structures 0..3 from the first four eigenvectors.
        assert!(rep.solutions.len() >= 4);
    }

    #[test]
    fn tiny_energy_level_is_trivially_consistent() {
        let (space, s) = setup(64);
        let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap();
        let rep = threshold_mu0_scan(space, &f, &s, 1e-12, 0.55).unwrap();
        assert_eq!(rep.min_mass, None);
        assert!(rep.consistent);
    }

    #[test]
    fn supercritical_bound_is_diagnostic() {
        let b = exclusion_bound(0.0, 1.0, 8.0, 8.0, 10.0, 1, 0.5, 5.0).unwrap();
        assert!(!b.certified && b.radius.is_some() && b.value > 0.0);
    }
}
