use super::{
    beta_cutoff, boundary_critical_exponent, critical_exponent, penalty, FunctionalError, NonlinearitySpec, Parity,
    PenalizedProblem,
};
use crate::linalg::{axpy, dot};
use crate::mesh::BoundaryMode;
use serde::{Deserialize, Serialize};

/// Parts of `E_{r,mu}(u) = ½‖u‖² - Ψ(u) - f_r(mass/mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub quad: f64,
    pub psi: f64,
    /// Penalty value; `+∞` once the mass reaches `mu`.
    pub pen: f64,
    /// `quad - psi - pen`, or `+∞` as a sentinel when the mass reaches `mu`.
    pub total_penalized: f64,
    /// `quad - psi`.
    pub total_unpenalized: f64,
    pub mass: f64,
    pub at_or_above_mu: bool,
}

/// Lumped quadrature of `∫F(u) + ∫_∂Ω G(u)`.
fn psi(prob: &PenalizedProblem, u: &[f64]) -> f64 {
    let s = prob.space();
    let f = prob.f();
    let mut total: f64 = u.iter().zip(s.lumped_weights()).map(|(&t, &w)| w * f.primitive(t)).sum();
    if let Some(g) = prob.g() {
        total += u
            .iter()
            .zip(s.lumped_boundary_weights())
            .filter(|(_, &w)| w != 0.0)
            .map(|(&t, &w)| w * g.primitive(t))
            .sum::<f64>();
    }
    total
}

/// Gradient of `Ψ`: `w ∘ f(u) + wb ∘ g(u)`.
fn psi_gradient(prob: &PenalizedProblem, u: &[f64]) -> Vec<f64> {
    let s = prob.space();
    let mut out: Vec<f64> = u.iter().zip(s.lumped_weights()).map(|(&t, &w)| w * prob.f().f(t)).collect();
    if let Some(g) = prob.g() {
        for ((o, &t), &w) in out.iter_mut().zip(u).zip(s.lumped_boundary_weights()) {
            if w != 0.0 {
                *o += w * g.f(t);
            }
        }
    }
    out
}

pub fn energy(prob: &PenalizedProblem, u: &[f64]) -> EnergyBreakdown {
    let quad = 0.5 * prob.norm_sq(u);
    let psi = psi(prob, u);
    let mass = prob.mass_of(u);
    let s = mass / prob.mu();
    let (pen, total_penalized, at_or_above_mu) = match penalty(s, prob.r()) {
        Ok(v) => (v.f, quad - psi - v.f, false),
        Err(_) => (f64::INFINITY, f64::INFINITY, true),
    };
    EnergyBreakdown { quad, psi, pen, total_penalized, total_unpenalized: quad - psi, mass, at_or_above_mu }
}

/// `(2/mu) f_r'(mass/mu)`, the multiplier carried by a critical point of `E_{r,mu}`.
pub fn multiplier(prob: &PenalizedProblem, mass: f64) -> Result<f64, FunctionalError> {
    let v =
        penalty(mass / prob.mu(), prob.r()).map_err(|_| FunctionalError::MassAtOrAboveMu { mass, mu: prob.mu() })?;
    Ok(2.0 / prob.mu() * v.df)
}

/// `∇E_{r,mu}(u) = A u - w∘f(u) - wb∘g(u) - (2/mu) f_r'(s) M u`, exactly consistent with
/// [`energy`].
pub fn grad_energy(prob: &PenalizedProblem, u: &[f64]) -> Result<Vec<f64>, FunctionalError> {
    let mu_vec = prob.space().m().mul_vec(u);
    let mass = dot(u, &mu_vec);
    let lam = multiplier(prob, mass)?;
    let mut g = prob.apply_a(u);
    axpy(-1.0, &psi_gradient(prob, u), &mut g);
    axpy(-lam, &mu_vec, &mut g);
    Ok(g)
}

/// `A u - lambda M u - w∘f(u) - wb∘g(u)` for a given multiplier.
pub fn pde_residual(prob: &PenalizedProblem, u: &[f64], lambda: f64) -> Vec<f64> {
    let mut g = prob.apply_a(u);
    axpy(-1.0, &psi_gradient(prob, u), &mut g);
    axpy(-lambda, &prob.space().m().mul_vec(u), &mut g);
    g
}

/// Hessian of `E_{r,mu}` split as `A + shift·M - lambda M - diag(d) - c (Mu)(Mu)ᵀ`.
#[derive(Debug, Clone)]
pub struct HessianParts {
    pub lambda: f64,
    pub diag: Vec<f64>,
    pub rank_one: f64,
    pub mu_vec: Vec<f64>,
}

pub fn hessian_parts(prob: &PenalizedProblem, u: &[f64]) -> Result<HessianParts, FunctionalError> {
    let s = prob.space();
    let mu_vec = s.m().mul_vec(u);
    let mass = dot(u, &mu_vec);
    let v =
        penalty(mass / prob.mu(), prob.r()).map_err(|_| FunctionalError::MassAtOrAboveMu { mass, mu: prob.mu() })?;
    let mut diag: Vec<f64> = u.iter().zip(s.lumped_weights()).map(|(&t, &w)| w * prob.f().derivative(t)).collect();
    if let Some(g) = prob.g() {
        for ((d, &t), &w) in diag.iter_mut().zip(u).zip(s.lumped_boundary_weights()) {
            if w != 0.0 {
                *d += w * g.derivative(t);
            }
        }
    }
    let mu = prob.mu();
    Ok(HessianParts { lambda: 2.0 / mu * v.df, diag, rank_one: 4.0 / (mu * mu) * v.d2f, mu_vec })
}

/// `J_{r,mu}(u) = β(E_{r,mu}(u))` inside the mass ball and `-1` outside.
pub fn truncated_energy(prob: &PenalizedProblem, u: &[f64]) -> f64 {
    let e = energy(prob, u);
    if e.at_or_above_mu {
        -1.0
    } else {
        beta_cutoff(e.total_penalized)
    }
}

/// Which structural hypotheses hold for the given data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// Linear growth constant below the mode's spectral bound.
    pub f1: bool,
    /// `f(t)t ≥ 0` and `f(t)/|t|` non-decreasing.
    pub f2: bool,
    /// Superquadratic primitive: `F(t)/t² → ∞` as `|t| → ∞`.
    pub f3: bool,
    /// Ambrosetti–Rabinowitz with `q > 2`.
    pub f4: bool,
    pub g1: Option<bool>,
    pub g2: Option<bool>,
    /// `p < 2*`.
    pub f_subcritical: bool,
    /// `l < 2^⋆` for the boundary exponent.
    pub g_subcritical: Option<bool>,
    pub k2: f64,
    pub kp: f64,
    pub p: f64,
    pub q: f64,
}

fn sample_points() -> impl Iterator<Item = f64> {
    (-400..=400).map(|k| 10f64.powf(k as f64 / 100.0))
}

fn monotone_quotient(f: &NonlinearitySpec) -> bool {
    let ok_side = |sign: f64| {
        let mut prev = 0.0f64;
        sample_points().all(|t| {
            let v = f.f(sign * t) * sign / t;
            let ok = v >= 0.0 && v >= prev * (1.0 - 1e-12);
            prev = v;
            ok
        })
    };
    ok_side(1.0) && ok_side(-1.0)
}

fn ar_holds(f: &NonlinearitySpec) -> bool {
    let q = f.min_exponent();
    q > 2.0 && sample_points().all(|t| [t, -t].iter().all(|&x| f.f(x) * x >= q * f.primitive(x) * (1.0 - 1e-12)))
}

/// Checks (f1)–(f4), (g1)–(g2) and the exponent ranges.
///
/// `lambda1` is the first eigenvalue of the mode's pencil (`λ₁`, `λ̂₁` or `1` for shifted
/// Neumann). In Robin mode (f1) and (g1) use a quarter of the spectral bound, and (g1)
/// needs `lambda_tilde`.
pub fn hypothesis_check(
    f: &NonlinearitySpec,
    g: Option<&NonlinearitySpec>,
    lambda1: f64,
    lambda_tilde: Option<f64>,
    mode: BoundaryMode,
    dim: usize,
) -> HypothesisFlags {
    let c = f.certificate();
    let f1 = match mode {
        BoundaryMode::Robin => c.k2 < lambda1 / 4.0,
        _ => c.k2 < lambda1,
    };
    let f3 = !f.is_zero() && f.parity() == Parity::Odd && c.p > 2.0;
    let g_flags = g.map(|g| {
        let cg = g.certificate();
        let g1 = lambda_tilde.is_some_and(|lt| cg.k2 < lt / 4.0) && cg.p < boundary_critical_exponent(dim);
        (g1, ar_holds(g), cg.p < boundary_critical_exponent(dim))
    });
    HypothesisFlags {
        f1,
        f2: monotone_quotient(f),
        f3,
        f4: ar_holds(f),
        g1: g_flags.map(|x| x.0),
        g2: g_flags.map(|x| x.1),
        f_subcritical: c.p < critical_exponent(dim),
        g_subcritical: g_flags.map(|x| x.2),
        k2: c.k2,
        kp: c.kp,
        p: c.p,
        q: c.q,
    }
}
