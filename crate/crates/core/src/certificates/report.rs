use super::gn::{GnEstimate, GnKind};
use super::mu0::exclusion_bound;
use super::thresholds::{
    required_lambda1, shift_printed, threshold_mu_doublestar, threshold_mu_star_shifted, threshold_mu_star_theorem,
    Lambda1Variant, MuDoubleStarInput,
};
use super::CertificateError;
use crate::functionals::{mass_critical_exponent, GrowthCertificate, HypothesisFlags};
use crate::mesh::BoundaryMode;
use serde::{Deserialize, Serialize};

/// One reported constant. `anchor` says which formula or branch produced it; `basis` is
/// `"exact"` for closed forms of exact inputs and `"estimate-based"` when an estimated
/// interpolation constant entered. A constant that does not apply has `value: None`
/// and the reason in `note`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedConstant {
    pub name: String,
    pub value: Option<f64>,
    pub anchor: String,
    pub basis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TaggedConstant {
    pub fn new(name: &str, anchor: &str, estimate_based: bool, value: Result<f64, CertificateError>) -> Self {
        let (value, note) = match value {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            name: name.into(),
            value,
            anchor: anchor.into(),
            basis: if estimate_based { "estimate-based" } else { "exact" }.into(),
            note,
        }
    }
}

/// Everything the report is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    pub dim: usize,
    pub mode: BoundaryMode,
    /// First eigenvalue of the Dirichlet Laplacian, when known.
    pub lambda1: Option<f64>,
    /// First eigenvalue of the Robin form `K + B`.
    pub lambda_hat: Option<f64>,
    /// Numerical trace eigenvalue (the printed value is 1).
    pub lambda_tilde: Option<f64>,
    pub f: GrowthCertificate,
    pub g: Option<GrowthCertificate>,
    pub gn: Vec<GnEstimate>,
    pub mu: Option<f64>,
    pub flags: Option<HypothesisFlags>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub constants: Vec<TaggedConstant>,
    pub gn: Vec<GnEstimate>,
    pub flags: Option<HypothesisFlags>,
}

impl CertificateReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|c| c.name == name).and_then(|c| c.value)
    }
}

fn missing(what: &str) -> CertificateError {
    CertificateError::HypothesisViolated(format!("{what} not available"))
}

/// Computes every threshold that applies to the inputs.
pub fn certificate_report(inp: &ReportInputs) -> CertificateReport {
    let gn = |kind: GnKind, p: f64| {
        inp.gn
            .iter()
            .find(|e| e.kind == kind && e.p == p)
            .map(|e| e.constant)
            .ok_or_else(|| missing(&format!("{kind:?} constant for p = {p}")))
    };
    let f = inp.f;
    let dim = inp.dim;
    let sub = f.p <= mass_critical_exponent(dim);
    let l1 = || inp.lambda1.ok_or_else(|| missing("lambda1"));
    let mut out = Vec::new();

    if let Some(l) = inp.lambda1 {
        out.push(TaggedConstant::new("lambda1", "first Dirichlet eigenvalue", false, Ok(l)));
    }
    if let Some(l) = inp.lambda_hat {
        out.push(TaggedConstant::new("lambda_hat", "first eigenvalue of the Robin form", false, Ok(l)));
    }
    if let Some(l) = inp.lambda_tilde {
        out.push(TaggedConstant::new("lambda_tilde", "trace eigenvalue, computed", false, Ok(l)));
        out.push(TaggedConstant::new("lambda_tilde_printed", "trace eigenvalue, stated value", false, Ok(1.0)));
    }

    match inp.mode {
        BoundaryMode::Dirichlet => {
            let c = || gn(GnKind::Dirichlet, f.p);
            let anchor =
                if sub { "mu_star: subcritical branch" } else { "mu_star: supercritical branch, M = lambda1/2" };
            let mu_star = (|| threshold_mu_star_theorem(f.k2, f.kp, f.p, f.q, l1()?, dim, c()?))();
            out.push(TaggedConstant::new("mu_star", anchor, true, mu_star));

            let mu0 = (|| {
                let l = l1()?;
                let b = exclusion_bound(f.k2, f.kp, f.p, f.q, l, dim, c()?, l / 2.0)?;
                if b.certified {
                    Ok(b.value)
                } else {
                    Err(CertificateError::HypothesisViolated(format!(
                        "supercritical: bound {} depends on the a-priori radius {} and is diagnostic only",
                        b.value,
                        b.radius.unwrap_or(f64::NAN)
                    )))
                }
            })();
            out.push(TaggedConstant::new("mu0_bound", "zero-multiplier exclusion bound, M = lambda1/2", true, mu0));

            let lambda_star = (|| {
                let mu = inp.mu.ok_or_else(|| missing("mu"))?;
                if f.k2 != 0.0 {
                    return Err(CertificateError::HypothesisViolated("single-power bound needs K2 = 0".into()));
                }
                required_lambda1(mu, f.p, f.q, dim, c()?, Lambda1Variant::SinglePower { kp: f.kp })
            })();
            out.push(TaggedConstant::new(
                "lambda_star",
                "required first eigenvalue, single-power bound",
                true,
                lambda_star,
            ));

            if dim >= 3 {
                let printed = || shift_printed(l1()?, f.q, dim);
                let mus = (|| threshold_mu_star_shifted(f.k2, f.kp, f.p, f.q, l1()?, printed()?.abs(), dim, c()?))();
                out.push(TaggedConstant::new(
                    "multiplier_lower_bound",
                    "ground-state multiplier interval, lower end",
                    false,
                    printed(),
                ));
                out.push(TaggedConstant::new("shift_printed", "shift as stated", false, printed()));
                out.push(TaggedConstant::new("shift", "magnitude of the stated shift", false, printed().map(f64::abs)));
                out.push(TaggedConstant::new("mu_star_s", "shifted-norm threshold", true, mus));
            }
        }
        BoundaryMode::Neumann => {
            let mu_star =
                gn(GnKind::Neumann, f.p).and_then(|c| threshold_mu_star_theorem(f.k2, f.kp, f.p, f.q, 1.0, dim, c));
            out.push(TaggedConstant::new(
                "mu_star",
                "mu_star in the shifted Neumann norm (lambda1 = 1)",
                true,
                mu_star,
            ));
        }
        BoundaryMode::Robin => {
            let g = inp.g.unwrap_or(GrowthCertificate { k2: 0.0, kp: 0.0, p: 2.0, q: f64::INFINITY });
            let value = (|| {
                let lhat = inp.lambda_hat.ok_or_else(|| missing("lambda_hat"))?;
                let ltilde = inp.lambda_tilde.ok_or_else(|| missing("lambda_tilde"))?;
                let c = gn(GnKind::RobinInterior, f.p)?;
                let c_trace = if g.kp > 0.0 { gn(GnKind::RobinTrace, g.p)? } else { 0.0 };
                threshold_mu_doublestar(&MuDoubleStarInput {
                    k2: f.k2,
                    kp: f.kp,
                    p: f.p,
                    k2g: g.k2,
                    kl: g.kp,
                    l: g.p,
                    lambda_hat: lhat,
                    lambda_tilde: ltilde,
                    q: f.q.min(g.q),
                    m: lhat / 2.0,
                    c,
                    c_trace,
                })
            })();
            out.push(TaggedConstant::new("mu_doublestar", "Robin threshold, M = lambda_hat/2", true, value));
        }
    }
    CertificateReport { constants: out, gn: inp.gn.clone(), flags: inp.flags }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(kind: GnKind, p: f64, c: f64) -> GnEstimate {
        GnEstimate {
            kind,
            p,
            beta: 0.0,
            constant: c,
            bound: "LOWER_BOUND".into(),
            elements_per_axis: 0,
            starts: 0,
            maximizer: vec![],
        }
    }

    #[test]
    fn dirichlet_quartic_interval() {
        let pi2 = std::f64::consts::PI.powi(2);
        let inp = ReportInputs {
            dim: 1,
            mode: BoundaryMode::Dirichlet,
            lambda1: Some(pi2),
            lambda_hat: None,
            lambda_tilde: None,
            f: GrowthCertificate { k2: 0.0, kp: 1.0, p: 4.0, q: 4.0 },
            g: None,
            gn: vec![est(GnKind::Dirichlet, 4.0, 0.5)],
            mu: Some(0.05),
            flags: None,
        };
        let r = certificate_report(&inp);
        let pi = std::f64::consts::PI;
        assert!((r.get("mu_star").unwrap() - pi / 0.5).abs() < 1e-12);
        assert_eq!(r.get("mu0_bound"), r.get("mu_star"));
        // p = 4 is not supercritical in one dimension.
        assert!(r.get("lambda_star").is_none());
        let anchor = &r.constants.iter().find(|c| c.name == "mu_star").unwrap().anchor;
        assert_eq!(anchor, "mu_star: subcritical branch");
    }

    #[test]
    fn robin_threshold_present() {
        let inp = ReportInputs {
            dim: 1,
            mode: BoundaryMode::Robin,
            lambda1: None,
            lambda_hat: Some(1.5),
            lambda_tilde: Some(1.0),
            f: GrowthCertificate { k2: 0.0, kp: 1.0, p: 4.0, q: 4.0 },
            g: Some(GrowthCertificate { k2: 0.0, kp: 1.0, p: 3.0, q: 3.0 }),
            gn: vec![est(GnKind::RobinInterior, 4.0, 1.0), est(GnKind::RobinTrace, 3.0, 1.0)],
            mu: None,
            flags: None,
        };
        assert!(certificate_report(&inp).get("mu_doublestar").unwrap() > 0.0);
    }
}
