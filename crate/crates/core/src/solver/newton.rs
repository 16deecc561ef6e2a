use super::{penalized_record, CriticalPointRecord, SolverError};
use crate::functionals::{grad_energy, hessian_parts, HessianParts, PenalizedProblem};
use crate::linalg::{axpy, dot, BandMatrix, BandedLu, LinalgError};

/// Multiplicative deflation `Π (1 + mu/‖u - v‖²_M)(1 + mu/‖u + v‖²_M)` over known
/// solutions `v`. Distances are measured relative to `mu` so the factor does not
/// depend on the mass scale.
#[derive(Debug, Clone, Default)]
pub struct Deflation {
    pub targets: Vec<Vec<f64>>,
}

impl Deflation {
    /// `(log m(u), ∇ log m(u))`.
    fn log_factor(&self, prob: &PenalizedProblem, u: &[f64]) -> (f64, Vec<f64>) {
        let mut log_m = 0.0;
        let mut grad = vec![0.0; u.len()];
        let mu = prob.mu();
        for t in &self.targets {
            for sign in [-1.0, 1.0] {
                let diff: Vec<f64> = u.iter().zip(t).map(|(a, b)| a + sign * b).collect();
                let mdiff = prob.space().m().mul_vec(&diff);
                let d2 = dot(&diff, &mdiff) / mu;
                log_m += (1.0 + 1.0 / d2).ln();
                // d/du log(1 + 1/d2) = -∇d2 / (d2 (d2 + 1)), ∇d2 = 2 M diff / mu.
                axpy(-2.0 / (mu * d2 * (d2 + 1.0)), &mdiff, &mut grad);
            }
        }
        (log_m, grad)
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub budget: usize,
    pub deflation: Option<Deflation>,
    pub seed_id: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { budget: 100, deflation: None, seed_id: 1 }
    }
}

/// Factored `H = H0 - c v vᵀ` with `H0` banded; solves use Sherman–Morrison.
pub(crate) struct HessianSolver {
    lu: BandedLu,
    v: Vec<f64>,
    c: f64,
    y: Vec<f64>,
    denom: f64,
}

impl HessianSolver {
    pub(crate) fn new(prob: &PenalizedProblem, parts: &HessianParts) -> Result<Self, LinalgError> {
        let lu = banded_operator(prob, parts.lambda, &parts.diag).factor()?;
        let y = lu.solve(&parts.mu_vec);
        let denom = 1.0 - parts.rank_one * dot(&parts.mu_vec, &y);
        if denom == 0.0 || !denom.is_finite() {
            return Err(LinalgError::Singular(usize::MAX));
        }
        Ok(Self { lu, v: parts.mu_vec.clone(), c: parts.rank_one, y, denom })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.lu.solve(b);
        if self.c != 0.0 {
            let coef = self.c * dot(&self.v, &x) / self.denom;
            axpy(coef, &self.y, &mut x);
        }
        x
    }
}

/// `A + (shift - lambda) M - diag(d)` in band storage.
pub(crate) fn banded_operator(prob: &PenalizedProblem, lambda: f64, diag: &[f64]) -> BandMatrix {
    let s = prob.space();
    let mut band = BandMatrix::zeros(s.len(), s.bandwidth());
    band.add_csr(1.0, s.a());
    band.add_csr(prob.shift() - lambda, s.m());
    band.add_diagonal(&diag.iter().map(|d| -d).collect::<Vec<_>>());
    band
}

fn hessian_apply(prob: &PenalizedProblem, parts: &HessianParts, x: &[f64]) -> Vec<f64> {
    let mut y = prob.apply_a(x);
    axpy(-parts.lambda, &prob.space().m().mul_vec(x), &mut y);
    for ((yi, di), xi) in y.iter_mut().zip(&parts.diag).zip(x) {
        *yi -= di * xi;
    }
    axpy(-parts.rank_one * dot(&parts.mu_vec, x), &parts.mu_vec, &mut y);
    y
}

struct Eval {
    grad: Vec<f64>,
    res: f64,
    scale: f64,
    merit: f64,
    log_defl: Vec<f64>,
}

fn evaluate(prob: &PenalizedProblem, u: &[f64], defl: Option<&Deflation>) -> Option<Eval> {
    if prob.mass_of(u) >= prob.mu() {
        return None;
    }
    let grad = grad_energy(prob, u).ok()?;
    let res = prob.dual_norm(&grad);
    let scale = prob.dual_norm(&prob.apply_a(u));
    let (log_m, log_defl) = match defl {
        Some(d) if !d.targets.is_empty() => d.log_factor(prob, u),
        _ => (0.0, Vec::new()),
    };
    let merit = res * log_m.exp();
    merit.is_finite().then_some(Eval { grad, res, scale, merit, log_defl })
}

/// Damped Newton iteration for `∇E_{r,mu} = 0` from `seed`.
///
/// Steps are accepted by backtracking on the dual norm of the (optionally deflated)
/// gradient and are never allowed to reach the mass wall. When the Newton direction
/// fails to decrease the residual the step falls back to steepest descent on
/// `½‖∇E‖²`. Near the wall the penalty's curvature limits attainable accuracy, so a
/// stagnated iterate is still accepted when its relative residual is below `1e-7`.
pub fn critical_point(
    prob: &PenalizedProblem,
    seed: &[f64],
    opts: &NewtonOptions,
) -> Result<CriticalPointRecord, SolverError> {
    let n = prob.space().len();
    if seed.len() != n {
        return Err(SolverError::SeedLength { expected: n, got: seed.len() });
    }
    let mass = prob.mass_of(seed);
    if mass >= prob.mu() {
        return Err(SolverError::SeedOutsideMassBall { mass, mu: prob.mu() });
    }
    let defl = opts.deflation.as_ref();
    let mut u = seed.to_vec();
    let mut cur = evaluate(prob, &u, defl).ok_or(SolverError::NoConverge { r: prob.r(), residual: f64::NAN })?;
    let tol = prob.tol().grad;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..opts.budget {
        iterations = it;
        if cur.res <= tol * cur.scale {
            converged = true;
            break;
        }
        let parts = hessian_parts(prob, &u)?;
        let mut trial = None;
        if let Ok(h) = HessianSolver::new(prob, &parts) {
            let mut d = h.solve(&cur.grad);
            d.iter_mut().for_each(|v| *v = -*v);
            if !cur.log_defl.is_empty() {
                let tau = 1.0 / (1.0 - dot(&cur.log_defl, &d));
                if tau.is_finite() && tau > 0.0 {
                    d.iter_mut().for_each(|v| *v *= tau);
                }
            }
            trial = line_search(prob, &u, &d, cur.merit, defl);
        }
        if trial.is_none() {
            let wg: Vec<f64> = cur.grad.iter().zip(prob.space().lumped_weights()).map(|(g, w)| g / w).collect();
            let mut d = hessian_apply(prob, &parts, &wg);
            let dn = prob.dual_norm(&d).max(f64::MIN_POSITIVE);
            let un = prob.mass_of(&u).sqrt();
            d.iter_mut().for_each(|v| *v *= -0.1 * un / dn);
            trial = line_search(prob, &u, &d, cur.merit, defl);
        }
        match trial {
            Some((next, ev)) => {
                u = next;
                cur = ev;
            }
            None => break,
        }
    }
    if prob.mass_of(&u).sqrt() <= 1e-8 * prob.mu().sqrt() {
        return Err(SolverError::CollapsedToZero);
    }
    if !converged && !(cur.res <= 1e-7 * cur.scale) {
        return Err(SolverError::NoConverge { r: prob.r(), residual: cur.res / cur.scale });
    }
    penalized_record(prob, u, opts.seed_id, iterations)
}

fn line_search(
    prob: &PenalizedProblem,
    u: &[f64],
    d: &[f64],
    merit: f64,
    defl: Option<&Deflation>,
) -> Option<(Vec<f64>, Eval)> {
    let mut alpha = 1.0;
    for _ in 0..40 {
        let trial: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        if let Some(ev) = evaluate(prob, &trial, defl) {
            if ev.merit <= (1.0 - 1e-4 * alpha) * merit {
                return Some((trial, ev));
            }
        }
        alpha *= 0.5;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{NonlinearitySpec, Role};
    use crate::mesh::{assemble, build_domain, BoundaryMode, DomainKind, ModeSpace};
    use std::sync::Arc;

    fn dirichlet_problem(mu: f64, r: f64) -> PenalizedProblem {
        let d = build_domain(DomainKind::Interval { a: 0.0, b: 1.0 }, None).unwrap();
        let space = Arc::new(ModeSpace::new(&assemble(&d, 64).unwrap(), BoundaryMode::Dirichlet));
        PenalizedProblem::new(space, NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap(), None, mu, r).unwrap()
    }

    fn sine(p: &PenalizedProblem, k: f64, amp: f64) -> Vec<f64> {
        let n = p.space().len() + 1;
        (1..n).map(|i| amp * (k * std::f64::consts::PI * i as f64 / n as f64).sin()).collect()
    }

    #[test]
    fn converges_to_positive_critical_point() {
        let p = dirichlet_problem(0.05, 2.0);
        let seed = sine(&p, 1.0, 0.2);
        let rec = critical_point(&p, &seed, &NewtonOptions::default()).unwrap();
        assert!(rec.grad_norm <= 1e-9 * (1.0 + rec.lambda));
        assert!(rec.u.iter().all(|v| *v > 0.0));
        assert!(rec.mass < p.mu());
        // Penalized multiplier identity.
        let s = rec.mass / p.mu();
        let pv = crate::functionals::penalty(s, 2.0).unwrap();
        assert!((rec.lambda - 2.0 / p.mu() * pv.df).abs() <= 1e-12 * rec.lambda);
    }

    #[test]
    fn seed_outside_ball_is_rejected() {
        let p = dirichlet_problem(0.05, 2.0);
        let seed = sine(&p, 1.0, 1.0);
        assert!(matches!(
            critical_point(&p, &seed, &NewtonOptions::default()),
            Err(SolverError::SeedOutsideMassBall { .. })
        ));
    }

    #[test]
    fn tiny_seed_collapses() {
        let p = dirichlet_problem(0.05, 2.0);
        let seed = sine(&p, 1.0, 1e-6);
        assert!(matches!(critical_point(&p, &seed, &NewtonOptions::default()), Err(SolverError::CollapsedToZero)));
    }

    #[test]
    fn deflation_factor_gradient() {
        let p = dirichlet_problem(0.05, 2.0);
        let t = sine(&p, 1.0, 0.1);
        let defl = Deflation { targets: vec![t] };
        let u = sine(&p, 2.0, 0.05);
        let d = sine(&p, 3.0, 0.01);
        let (_, g) = defl.log_factor(&p, &u);
        let e = 1e-6;
        let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + e * b).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - e * b).collect();
        let fd = (defl.log_factor(&p, &up).0 - defl.log_factor(&p, &um).0) / (2.0 * e);
        assert!((fd - dot(&g, &d)).abs() < 1e-6 * (1.0 + fd.abs()));
    }
}
