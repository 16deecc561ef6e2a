use super::newton::{banded_operator, critical_point, Deflation, NewtonOptions};
use super::{classify, make_record, CriticalPointRecord, SolutionCase, SolverError};
use crate::functionals::{energy, pde_residual, penalty, PenalizedProblem};
use crate::linalg::{axpy, dot, scaled, sub};
use serde::{Deserialize, Serialize};

/// Geometric schedule `r_{n+1} = growth · r_n`, capped at `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationSchedule {
    pub r0: f64,
    pub growth: f64,
    pub r_max: f64,
    pub newton_budget: usize,
    /// Start each stage from the previous solution (rescaled to the new `r`).
    pub warm_start: bool,
}

impl Default for ContinuationSchedule {
    fn default() -> Self {
        Self { r0: 2.0, growth: 2.0, r_max: 16384.0, newton_budget: 100, warm_start: true }
    }
}

impl ContinuationSchedule {
    fn validate(&self) -> Result<(), SolverError> {
        if !(self.r0 > 1.0) || !(self.growth > 1.0) || !(self.r_max >= self.r0) || self.newton_budget == 0 {
            return Err(SolverError::InvalidSchedule(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Diagnostics of one continuation stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub r: f64,
    pub energy_penalized: f64,
    pub energy_unpenalized: f64,
    pub mass: f64,
    pub lambda: f64,
    pub grad_norm: f64,
    pub penalty: f64,
    /// `L²` distance to the previous stage's solution.
    pub drift: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Penalty and drift fell below their tolerances.
    Criteria,
    /// `r_max` was reached first.
    RMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRun {
    pub record: CriticalPointRecord,
    pub stages: Vec<StageRow>,
    pub stop: StopReason,
    #[serde(skip)]
    pub(crate) stage_solutions: Vec<Vec<f64>>,
}

/// Maximizer of `t ↦ E_{r,mu}(t d)` on `(0, t_hi)` by golden-section search.
pub fn seed_amplitude(prob: &PenalizedProblem, direction: &[f64], t_hi: f64) -> f64 {
    let phi = |t: f64| {
        let e = energy(prob, &scaled(t, direction));
        if e.at_or_above_mu {
            f64::NEG_INFINITY
        } else {
            e.total_penalized
        }
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, t_hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..200 {
        if (b - a) <= 1e-12 * t_hi {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d);
        }
    }
    0.5 * (a + b)
}

/// Rescales `u` so that the multiplier at exponent `r_next` matches `lambda`.
fn predict(prob: &PenalizedProblem, u: &[f64], lambda: f64, r_next: f64) -> Vec<f64> {
    let mu = prob.mu();
    let s = prob.mass_of(u) / mu;
    let target = 0.5 * mu * lambda;
    let df = |x: f64| penalty(x, r_next).map(|v| v.df).unwrap_or(f64::INFINITY);
    if !(lambda > 0.0) || !(s > 0.0) || df(1.0 - 1e-15) < target {
        return u.to_vec();
    }
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if df(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    scaled((lo / s).sqrt(), u)
}

/// Newton on the constrained system `A u - lambda M u - N(u) = 0`, `uᵀMu = mu`.
///
/// Block elimination with the banded factor of `A - lambda M - N'(u)`; the bordered
/// system is nonsingular even when that block is close to singular.
fn polish_constrained(prob: &PenalizedProblem, u0: &[f64], lambda0: f64) -> Option<(Vec<f64>, f64, usize)> {
    let mu = prob.mu();
    let merit = |u: &[f64], lam: f64| {
        let f1 = pde_residual(prob, u, lam);
        let scale = prob.dual_norm(&prob.apply_a(u)).max(f64::MIN_POSITIVE);
        prob.dual_norm(&f1) / scale + (prob.mass_of(u) - mu).abs() / mu
    };
    let mut u = u0.to_vec();
    let mut lam = lambda0;
    let mut phi = merit(&u, lam);
    let mut its = 0;
    for it in 0..60 {
        its = it;
        if phi <= 1e-15 {
            break;
        }
        let f1 = pde_residual(prob, &u, lam);
        let mu_vec = prob.space().m().mul_vec(&u);
        let f2 = 0.5 * (dot(&u, &mu_vec) - mu);
        let diag = nonlinear_diag(prob, &u);
        let lu = banded_operator(prob, lam, &diag).factor().ok()?;
        let x1 = lu.solve(&scaled(-1.0, &f1));
        let x2 = lu.solve(&mu_vec);
        let den = dot(&mu_vec, &x2);
        if den == 0.0 || !den.is_finite() {
            return None;
        }
        let dlam = (-f2 - dot(&mu_vec, &x1)) / den;
        let mut du = x1;
        axpy(dlam, &x2, &mut du);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
            let tl = lam + alpha * dlam;
            let tp = merit(&trial, tl);
            if tp < phi * (1.0 - 1e-4 * alpha) {
                u = trial;
                lam = tl;
                phi = tp;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((u, lam, its))
}

/// Newton on `A u - N(u) = 0`, the zero-multiplier alternative.
pub(crate) fn polish_unconstrained(prob: &PenalizedProblem, u0: &[f64]) -> Option<(Vec<f64>, usize)> {
    let merit = |u: &[f64]| {
        let scale = prob.dual_norm(&prob.apply_a(u)).max(f64::MIN_POSITIVE);
        prob.dual_norm(&pde_residual(prob, u, 0.0)) / scale
    };
    let mut u = u0.to_vec();
    let mut phi = merit(&u);
    let mut its = 0;
    for it in 0..60 {
        its = it;
        if phi <= 1e-15 {
            break;
        }
        let f = pde_residual(prob, &u, 0.0);
        let lu = banded_operator(prob, 0.0, &nonlinear_diag(prob, &u)).factor().ok()?;
        let du = lu.solve(&scaled(-1.0, &f));
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
            let tp = merit(&trial);
            if tp < phi * (1.0 - 1e-4 * alpha) {
                u = trial;
                phi = tp;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Some((u, its))
}

fn nonlinear_diag(prob: &PenalizedProblem, u: &[f64]) -> Vec<f64> {
    let s = prob.space();
    let mut d: Vec<f64> = u.iter().zip(s.lumped_weights()).map(|(&t, &w)| w * prob.f().derivative(t)).collect();
    if let Some(g) = prob.g() {
        for ((di, &t), &w) in d.iter_mut().zip(u).zip(s.lumped_boundary_weights()) {
            if w != 0.0 {
                *di += w * g.derivative(t);
            }
        }
    }
    d
}

/// Follows the critical point seeded along `direction` (an eigenvector) as `r` grows,
/// then solves the limit problem and classifies the result.
pub fn continue_in_r(
    prob: &PenalizedProblem,
    schedule: &ContinuationSchedule,
    direction: &[f64],
    seed_id: usize,
) -> Result<ContinuationRun, SolverError> {
    let t_hi = (prob.mu() / prob.mass_of(direction)).sqrt() * (1.0 - 1e-9);
    run(prob, schedule, direction, t_hi, seed_id, &[])
}

pub(crate) fn run(
    prob: &PenalizedProblem,
    schedule: &ContinuationSchedule,
    direction: &[f64],
    t_hi: f64,
    seed_id: usize,
    previous: &[&ContinuationRun],
) -> Result<ContinuationRun, SolverError> {
    schedule.validate()?;
    let mu = prob.mu();
    let mut r = schedule.r0;
    let mut pr = prob.with_r(r)?;
    let mut u = scaled(seed_amplitude(&pr, direction, t_hi), direction);
    let mut stages: Vec<StageRow> = Vec::new();
    let mut solutions: Vec<Vec<f64>> = Vec::new();
    let mut last: Option<CriticalPointRecord> = None;
    let mut stop = StopReason::RMax;
    loop {
        let stage = stages.len();
        let deflation = (!previous.is_empty()).then(|| Deflation {
            targets: previous
                .iter()
                .map(|p| match (p.stages.get(stage), p.stage_solutions.get(stage)) {
                    (Some(row), Some(sol)) if row.r == r => sol.clone(),
                    _ => p.record.u.clone(),
                })
                .collect(),
        });
        let opts = NewtonOptions { budget: schedule.newton_budget, deflation, seed_id };
        let rec = match critical_point(&pr, &u, &opts) {
            Ok(rec) => rec,
            Err(e) => {
                // Retry with a smaller step in r before giving up.
                let Some(prev) = last.as_ref() else { return Err(e) };
                let r_prev = prev.r_final;
                if r / r_prev < 1.01 {
                    return Err(e);
                }
                r = (r * r_prev).sqrt();
                pr = prob.with_r(r)?;
                u = predict(&pr, &prev.u, prev.lambda, r);
                continue;
            }
        };
        let drift = solutions.last().map_or(f64::INFINITY, |prev| prob.mass_of(&sub(&rec.u, prev)).sqrt());
        let e = energy(&pr, &rec.u);
        stages.push(StageRow {
            r,
            energy_penalized: e.total_penalized,
            energy_unpenalized: e.total_unpenalized,
            mass: rec.mass,
            lambda: rec.lambda,
            grad_norm: rec.grad_norm,
            penalty: e.pen,
            drift,
            iterations: rec.iterations,
        });
        log::debug!("stage r={r} mass/mu={} lambda={} pen={} drift={drift}", rec.mass / mu, rec.lambda, e.pen);
        solutions.push(rec.u.clone());
        let tol = prob.tol();
        let done = e.pen <= tol.pen * e.quad.abs() && drift <= tol.drift * mu.sqrt();
        last = Some(rec);
        if done {
            stop = StopReason::Criteria;
            break;
        }
        if r >= schedule.r_max {
            break;
        }
        let prev = last.as_ref().unwrap();
        let r_next = (r * schedule.growth).min(schedule.r_max);
        pr = prob.with_r(r_next)?;
        u = if schedule.warm_start {
            predict(&pr, &prev.u, prev.lambda, r_next)
        } else {
            let t_hi_next = t_hi.min((mu / prob.mass_of(direction)).sqrt() * (1.0 - 1e-9));
            scaled(seed_amplitude(&pr, direction, t_hi_next), direction)
        };
        r = r_next;
    }
    let last = last.expect("at least one stage");
    let final_prob = prob.with_r(r)?;
    let s_last = last.mass / mu;
    let deficit = last.lambda.abs() <= prob.tol().lambda_abs() && s_last < 0.99;
    let polished = if deficit {
        polish_unconstrained(&final_prob, &last.u).map(|(u, its)| (u, 0.0, its))
    } else {
        polish_constrained(&final_prob, &last.u, last.lambda)
    };
    let Some((u, lam, its)) = polished else {
        return Err(SolverError::NoConverge { r, residual: last.grad_norm });
    };
    let mut record = make_record(&final_prob, u, lam, seed_id, last.iterations + its)?;
    record.energy_penalized = last.energy_penalized;
    record.case = classify(&final_prob, record.mass, record.lambda);
    let ok = match record.case {
        SolutionCase::NoConverge => false,
        _ => record.grad_norm <= 1e-8 * prob.dual_norm(&prob.apply_a(&record.u)).max(f64::MIN_POSITIVE),
    };
    if !ok {
        return Err(SolverError::NoConverge { r, residual: record.grad_norm });
    }
    Ok(ContinuationRun { record, stages, stop, stage_solutions: solutions })
}
