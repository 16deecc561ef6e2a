use super::CertificateError;
use crate::functionals::{energy, PenalizedProblem};
use crate::mesh::{BoundaryMode, Discretization};
use crate::solver::CriticalPointRecord;

/// `|(N-2)/(2N) ∫|∇u|² + 1/(2N) ∮ |∇u|² (x-x0)·n - (λ/2) mass - Ψ(u)|` for a Dirichlet record.
///
/// On the boundary `u = 0`, so `|∇u|` is the normal derivative, recovered as `u_1/h` from
/// the first interior node along the normal. Because `Δu = 0` on the boundary the
/// recovery is second-order accurate. The face integral uses trapezoidal weights; corner
/// nodes contribute nothing. `x0` defaults to the domain's star center.
pub fn pohozaev_residual(
    rec: &CriticalPointRecord,
    prob: &PenalizedProblem,
    disc: &Discretization,
    x0: Option<&[f64]>,
) -> Result<f64, CertificateError> {
    let space = prob.space();
    if space.mode() != BoundaryMode::Dirichlet {
        return Err(CertificateError::ModeUnsupported(space.mode()));
    }
    let dim = disc.dim();
    if dim < 2 {
        return Err(CertificateError::HypothesisViolated(format!("needs N >= 2, got N = {dim}")));
    }
    let dom = disc.domain();
    let x0 = x0.unwrap_or(dom.star_center());
    if x0.len() != dim || (0..dim).any(|d| !(dom.lower()[d] < x0[d] && x0[d] < dom.upper()[d])) {
        return Err(CertificateError::HypothesisViolated(format!("center {x0:?} is not inside the domain")));
    }
    let u = &rec.u;
    let full = space.expand(u);
    let n = disc.elements_per_axis();
    let h = disc.h();
    let trapezoid = |i: usize, hd: f64| if i == 0 || i == n { 0.5 * hd } else { hd };

    let mut flux = 0.0;
    for node in 0..disc.num_nodes() {
        if !disc.is_boundary_node(node) {
            continue;
        }
        let idx = disc.node_multi_index(node);
        for d in 0..dim {
            let (dist, inward) = match idx[d] {
                0 => (x0[d] - dom.lower()[d], 1),
                i if i == n => (dom.upper()[d] - x0[d], n - 1),
                _ => continue,
            };
            let weight: f64 = (0..dim).filter(|&e| e != d).map(|e| trapezoid(idx[e], h[e])).product();
            let mut nb = idx;
            nb[d] = inward;
            let dn = full[disc.node_index(nb)] / h[d];
            flux += weight * dist * dn * dn;
        }
    }
    let nf = dim as f64;
    let grad_sq = space.a().quad_form(u);
    let psi = energy(prob, u).psi;
    let lhs = (nf - 2.0) / (2.0 * nf) * grad_sq + flux / (2.0 * nf);
    Ok((lhs - 0.5 * rec.lambda_pde * rec.mass - psi).abs())
}
