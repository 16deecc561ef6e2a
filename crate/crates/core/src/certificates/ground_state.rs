use super::thresholds::{shift_printed, threshold_mu_star_shifted};
use super::CertificateError;
use crate::functionals::{critical_exponent, PenalizedProblem};
use crate::solver::CriticalPointRecord;
use serde::{Deserialize, Serialize};

/// Ground-state diagnostics over a set of records at the same mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    /// Index of the lowest-energy record with `lambda_pde ≥ 0`.
    pub candidate: Option<usize>,
    /// No record has a non-negative multiplier.
    pub s_plus_empty: bool,
    /// Per record: `⟨E'(u), u⟩ ≥ -tol`.
    pub in_n_plus: Vec<bool>,
    /// `Nλ₁(q-2*)/(2*(q-2))`, the bound obtained inside the multiplier estimate (`N ≥ 3`).
    pub lemma_lower_bound: Option<f64>,
    /// `2λ₁(q-2*)/(2*(q-2-4/N))`, the lower end of the stated multiplier interval (`N ≥ 3`).
    pub multiplier_lower_bound: Option<f64>,
    /// Per record: `lambda_pde ≥ multiplier_lower_bound - tol`, checked only when
    /// `E(u) ≤ mu λ₁/2`.
    pub multiplier_checks: Vec<Option<bool>>,
    /// The shift exactly as printed; negative for `q < 2*`.
    pub shift_printed: Option<f64>,
    /// Magnitude of the printed shift, the value used in `mu*_s`.
    pub shift: Option<f64>,
    pub mu_star_s: Option<f64>,
}

/// Identifies the ground-state candidate and checks the multiplier bounds.
///
/// `lambda1` is the first Dirichlet eigenvalue and `c` an interpolation constant for
/// `mu*_s` (omitted if `None`).
pub fn ground_state_report(
    records: &[CriticalPointRecord],
    prob: &PenalizedProblem,
    lambda1: f64,
    c: Option<f64>,
) -> Result<GroundStateReport, CertificateError> {
    if records.is_empty() {
        return Err(CertificateError::EmptyRecordSet);
    }
    let tol = 1e-8;
    let space = prob.space();
    let f = prob.f();
    let cert = f.certificate();
    let dim = space.dim();
    let mu = prob.mu();

    let candidate = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.lambda_pde >= -tol)
        .min_by(|a, b| a.1.energy_unpenalized.total_cmp(&b.1.energy_unpenalized))
        .map(|(i, _)| i);

    let in_n_plus = records
        .iter()
        .map(|r| {
            let grad_sq = space.a().quad_form(&r.u);
            let fu: f64 = r.u.iter().zip(space.lumped_weights()).map(|(&t, &w)| w * f.f(t) * t).sum();
            grad_sq - fu >= -tol * grad_sq.max(1.0)
        })
        .collect();

    let q = cert.q;
    let (lemma_lower_bound, printed) = if dim >= 3 {
        let two_star = critical_exponent(dim);
        let lemma = dim as f64 * lambda1 * (q - two_star) / (two_star * (q - 2.0));
        (Some(lemma), shift_printed(lambda1, q, dim).ok())
    } else {
        (None, None)
    };
    let multiplier_checks = records
        .iter()
        .map(|r| {
            let bound = printed?;
            (r.energy_unpenalized <= 0.5 * mu * lambda1 + tol).then_some(r.lambda_pde >= bound - tol)
        })
        .collect();
    let shift = printed.map(f64::abs);
    let mu_star_s = match (shift, c) {
        (Some(s), Some(c)) => threshold_mu_star_shifted(cert.k2, cert.kp, cert.p, q, lambda1, s, dim, c).ok(),
        _ => None,
    };
    Ok(GroundStateReport {
        candidate,
        s_plus_empty: candidate.is_none(),
        in_n_plus,
        lemma_lower_bound,
        multiplier_lower_bound: printed,
        multiplier_checks,
        shift_printed: printed,
        shift,
        mu_star_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{NonlinearitySpec, Role};
    use crate::mesh::{assemble, build_domain, BoundaryMode, DomainKind, ModeSpace};
    use crate::solver::make_record;
    use std::sync::Arc;

    fn cube() -> PenalizedProblem {
        let d = build_domain(DomainKind::Box { lo: [0.0; 3], hi: [1.0; 3] }, None).unwrap();
        let space = Arc::new(ModeSpace::new(&assemble(&d, 4).unwrap(), BoundaryMode::Dirichlet));
        let f = NonlinearitySpec::single(1.0, 4.0, Role::Interior).unwrap();
        PenalizedProblem::new(space, f, None, 1.0, 2.0).unwrap()
    }

    fn record(p: &PenalizedProblem, lambda_pde: f64, energy: f64) -> CriticalPointRecord {
        let mut r = make_record(p, vec![0.0; p.space().len()], 0.0, 1, 0).unwrap();
        r.lambda_pde = lambda_pde;
        r.energy_unpenalized = energy;
        r
    }

    #[test]
    fn quartic_in_three_dimensions() {
        let p = cube();
        let l1 = 3.0;
        let rep = ground_state_report(&[record(&p, 0.5, 0.1)], &p, l1, Some(1.0)).unwrap();
        // 2λ₁(4-6)/(6(4-2-4/3)) = -λ₁.
        assert!((rep.shift_printed.unwrap() + l1).abs() < 1e-12);
        assert!((rep.shift.unwrap() - l1).abs() < 1e-12);
        assert_eq!(rep.candidate, Some(0));
        assert_eq!(rep.multiplier_checks, vec![Some(true)]);
        assert!(rep.mu_star_s.unwrap() > 0.0);
    }

    #[test]
    fn empty_s_plus_is_flagged() {
        let p = cube();
        let rep = ground_state_report(&[record(&p, -0.5, 0.1), record(&p, -0.1, 0.2)], &p, 3.0, None).unwrap();
        assert!(rep.s_plus_empty && rep.candidate.is_none());
    }

    #[test]
    fn picks_lowest_energy_with_nonnegative_multiplier() {
        let p = cube();
        let recs = [record(&p, 1.0, 0.3), record(&p, -1.0, 0.05), record(&p, 0.2, 0.1)];
        assert_eq!(ground_state_report(&recs, &p, 3.0, None).unwrap().candidate, Some(2));
        assert!(matches!(ground_state_report(&[], &p, 3.0, None), Err(CertificateError::EmptyRecordSet)));
    }
}
