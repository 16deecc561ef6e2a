use super::CertificateError;
use crate::functionals::{boundary_critical_exponent, critical_exponent};
use crate::linalg::{dot, BandMatrix};
use crate::mesh::{boundary_quadrature, element_quadrature, BoundaryMode, CellRule, Discretization, ModeSpace};
use crate::spectra::solve_eigs;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const RANDOM_STARTS: usize = 20;
const MAX_ITERS: usize = 3000;

/// Which interpolation inequality is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GnKind {
    /// `‖u‖_p^p ≤ C ‖u‖₂^{(1-β)p} ‖∇u‖₂^{βp}` on `H¹₀`.
    Dirichlet,
    /// Same with `‖∇u‖₂` replaced by the full `H¹` norm, on `H¹`.
    Neumann,
    /// `‖u‖_p^p ≤ C ‖u‖^p` with `‖u‖² = ‖∇u‖₂² + ‖u‖²_{L²(∂Ω)}`.
    RobinInterior,
    /// `‖u‖^l_{L^l(∂Ω)} ≤ C ‖u‖^l` in the same norm.
    RobinTrace,
}

impl GnKind {
    fn mode(self) -> BoundaryMode {
        match self {
            GnKind::Dirichlet => BoundaryMode::Dirichlet,
            GnKind::Neumann => BoundaryMode::Neumann,
            GnKind::RobinInterior | GnKind::RobinTrace => BoundaryMode::Robin,
        }
    }

    /// Powers `(a, b)` of `‖u‖₂²` and `‖u‖²` in the denominator.
    fn powers(self, p: f64, beta: f64) -> (f64, f64) {
        match self {
            GnKind::Dirichlet | GnKind::Neumann => ((1.0 - beta) * p / 2.0, beta * p / 2.0),
            GnKind::RobinInterior | GnKind::RobinTrace => (0.0, p / 2.0),
        }
    }
}

/// Discrete supremum of an interpolation ratio; always a lower bound of the constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnEstimate {
    pub kind: GnKind,
    pub p: f64,
    /// `N(1/2 - 1/p)`.
    pub beta: f64,
    pub constant: f64,
    /// Always `"LOWER_BOUND"`.
    pub bound: String,
    pub elements_per_axis: usize,
    pub starts: usize,
    /// Best maximizer found, on the free degrees of freedom.
    #[serde(skip)]
    pub maximizer: Vec<f64>,
}

struct Ratio {
    space: ModeSpace,
    rules: Vec<CellRule>,
    p: f64,
    a_pow: f64,
    b_pow: f64,
}

impl Ratio {
    fn log_value(&self, u: &[f64]) -> f64 {
        let full = self.space.expand(u);
        let p = self.p;
        let num: f64 = self.rules.iter().map(|r| r.integrate(&full, |t| t.abs().powf(p))).sum();
        let m = self.space.m().quad_form(u);
        let a = self.space.a().quad_form(u);
        num.ln() - self.a_pow * m.ln() - self.b_pow * a.ln()
    }

    fn log_gradient(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let full = self.space.expand(u);
        let p = self.p;
        let num: f64 = self.rules.iter().map(|r| r.integrate(&full, |t| t.abs().powf(p))).sum();
        let mut gfull = vec![0.0; full.len()];
        for r in &self.rules {
            let g = r.integrate_gradient(&full, |t| p * t.abs().powf(p - 1.0) * t.signum());
            gfull.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        let mu = self.space.m().mul_vec(u);
        let au = self.space.apply_a(u);
        let (m, a) = (dot(u, &mu), dot(u, &au));
        let gnum = self.space.restrict(&gfull);
        let grad =
            (0..u.len()).map(|i| gnum[i] / num - 2.0 * self.a_pow * mu[i] / m - 2.0 * self.b_pow * au[i] / a).collect();
        (num.ln() - self.a_pow * m.ln() - self.b_pow * a.ln(), grad)
    }
}

/// Value of the interpolation ratio at `u` (free degrees of freedom of the kind's mode).
pub fn gn_ratio(disc: &Discretization, p: f64, kind: GnKind, u: &[f64]) -> Result<f64, CertificateError> {
    Ok(ratio(disc, p, kind)?.log_value(u).exp())
}

fn ratio(disc: &Discretization, p: f64, kind: GnKind) -> Result<Ratio, CertificateError> {
    let dim = disc.dim();
    let hi = match kind {
        GnKind::RobinTrace => boundary_critical_exponent(dim),
        _ => critical_exponent(dim),
    };
    if !(p >= 2.0 && p < hi) {
        return Err(CertificateError::ExponentOutOfRange { p, lo: 2.0, hi });
    }
    let beta = dim as f64 * (0.5 - 1.0 / p);
    let (a_pow, b_pow) = kind.powers(p, beta);
    let rules = match kind {
        GnKind::RobinTrace => boundary_quadrature(disc),
        _ => vec![element_quadrature(disc)],
    };
    Ok(Ratio { space: ModeSpace::new(disc, kind.mode()), rules, p, a_pow, b_pow })
}

/// Maximizes the discrete ratio by preconditioned gradient ascent on its logarithm from
/// the first eigenfunction and 20 random Gaussian bumps.
pub fn estimate_gn_constant(
    disc: &Discretization,
    p: f64,
    kind: GnKind,
    seed: u64,
) -> Result<GnEstimate, CertificateError> {
    let ratio = ratio(disc, p, kind)?;
    let space = &ratio.space;
    let beta = disc.dim() as f64 * (0.5 - 1.0 / p);
    let mut band = BandMatrix::zeros(space.len(), space.bandwidth());
    band.add_csr(1.0, space.a());
    band.add_csr(1.0, space.m());
    let precond = band.factor()?;

    let mut starts = vec![solve_eigs(space, 1)?.vector(1).to_vec()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = disc.domain();
    for _ in 0..RANDOM_STARTS {
        let center: Vec<f64> = (0..disc.dim()).map(|d| rng.gen_range(dom.lower()[d]..dom.upper()[d])).collect();
        let width: Vec<f64> = (0..disc.dim()).map(|d| dom.extent(d) * rng.gen_range(0.02..0.3)).collect();
        let u: Vec<f64> = space
            .free_nodes()
            .iter()
            .map(|&i| {
                let x = disc.node_coords(i);
                let e: f64 = (0..disc.dim()).map(|d| ((x[d] - center[d]) / width[d]).powi(2)).sum();
                (-0.5 * e).exp() + 1e-3
            })
            .collect();
        starts.push(u);
    }

    let mut best = (f64::NEG_INFINITY, Vec::new());
    for start in &starts {
        let (val, u) = ascend(&ratio, &precond, start);
        if val > best.0 {
            best = (val, u);
        }
    }
    Ok(GnEstimate {
        kind,
        p,
        beta,
        constant: best.0.exp(),
        bound: "LOWER_BOUND".into(),
        elements_per_axis: disc.elements_per_axis(),
        starts: starts.len(),
        maximizer: best.1,
    })
}

fn ascend(ratio: &Ratio, precond: &crate::linalg::BandedLu, start: &[f64]) -> (f64, Vec<f64>) {
    let normalize = |u: &mut Vec<f64>| {
        let s = ratio.space.m().quad_form(u).sqrt();
        u.iter_mut().for_each(|v| *v /= s);
    };
    let mut u = start.to_vec();
    normalize(&mut u);
    let (mut val, mut grad) = ratio.log_gradient(&u);
    let mut step = 0.1;
    let mut stall = 0;
    for _ in 0..MAX_ITERS {
        let d = precond.solve(&grad);
        let dn = ratio.space.a().quad_form(&d) + ratio.space.m().quad_form(&d);
        let un = ratio.space.a().quad_form(&u) + ratio.space.m().quad_form(&u);
        if !(dn > 0.0) {
            break;
        }
        let scale = (un / dn).sqrt();
        let mut accepted = false;
        while step > 1e-12 {
            let mut trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + step * scale * b).collect();
            normalize(&mut trial);
            let tv = ratio.log_value(&trial);
            if tv > val {
                stall = if tv - val < 1e-14 * val.abs().max(1.0) { stall + 1 } else { 0 };
                u = trial;
                (val, grad) = ratio.log_gradient(&u);
                step = (step * 1.5).min(1.0);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || stall >= 10 {
            break;
        }
    }
    (val, u)
}
