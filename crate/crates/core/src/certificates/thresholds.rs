use super::CertificateError;
use crate::functionals::{critical_exponent, mass_critical_exponent};
use serde::{Deserialize, Serialize};

/// Inputs of the non-existence threshold `mu*` on `H¹₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuStarInput {
    pub k2: f64,
    pub kp: f64,
    pub p: f64,
    pub q: f64,
    pub lambda1: f64,
    pub dim: usize,
    /// Energy level `M` bounding the critical points to be excluded.
    pub m: f64,
    /// Interpolation constant `C_{p,N}`.
    pub c: f64,
}

fn check_exponent(p: f64, lo: f64, hi: f64) -> Result<(), CertificateError> {
    if p > lo && p < hi {
        Ok(())
    } else {
        Err(CertificateError::ExponentOutOfRange { p, lo, hi })
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), CertificateError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CertificateError::HypothesisViolated(format!("{name} = {v} must be positive")))
    }
}

/// `mu*` for a general energy level `M`.
///
/// For `p ≤ 2 + 4/N`: `((λ₁ - K₂)/(K_p C))^{2/(p-2)} λ₁^{-N/2}`.
/// For `p > 2 + 4/N`: `((λ₁ - K₂)/(K_p C λ₁))^{2/(p-2)} (2qM/(q-2))^{2/(p-2) - N/2}`.
pub fn threshold_mu_star(inp: &MuStarInput) -> Result<f64, CertificateError> {
    let MuStarInput { k2, kp, p, q, lambda1, dim, m, c } = *inp;
    check_exponent(p, 2.0, critical_exponent(dim))?;
    check_positive("lambda1", lambda1)?;
    check_positive("Kp", kp)?;
    check_positive("C", c)?;
    check_positive("M", m)?;
    if !(q > 2.0) {
        return Err(CertificateError::HypothesisViolated(format!("q = {q} must exceed 2")));
    }
    if !(k2 >= 0.0 && k2 < lambda1) {
        return Err(CertificateError::HypothesisViolated(format!(
            "need 0 <= K2 < lambda1, got K2 = {k2}, lambda1 = {lambda1}"
        )));
    }
    let n = dim as f64;
    let e = 2.0 / (p - 2.0);
    if p <= mass_critical_exponent(dim) {
        Ok(((lambda1 - k2) / (kp * c)).powf(e) * lambda1.powf(-n / 2.0))
    } else {
        Ok(((lambda1 - k2) / (kp * c * lambda1)).powf(e) * (2.0 * q * m / (q - 2.0)).powf(e - n / 2.0))
    }
}

/// `mu*` at the mountain-pass level bound `M = λ₁/2`.
pub fn threshold_mu_star_theorem(
    k2: f64,
    kp: f64,
    p: f64,
    q: f64,
    lambda1: f64,
    dim: usize,
    c: f64,
) -> Result<f64, CertificateError> {
    threshold_mu_star(&MuStarInput { k2, kp, p, q, lambda1, dim, m: lambda1 / 2.0, c })
}

/// Inputs of the Robin threshold `mu**`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuDoubleStarInput {
    pub k2: f64,
    pub kp: f64,
    pub p: f64,
    pub k2g: f64,
    /// Boundary growth constant; `0` when there is no superlinear boundary term.
    pub kl: f64,
    pub l: f64,
    pub lambda_hat: f64,
    pub lambda_tilde: f64,
    pub q: f64,
    pub m: f64,
    /// Interior Sobolev constant `C_{p,Ω}`.
    pub c: f64,
    /// Trace constant `C'_{l,Ω}`.
    pub c_trace: f64,
}

/// Largest `mu` with
/// `K_p C (2qM/(q-2))^{p-2} mu^{p-2} + K_l C' (2qM/(q-2))^{l-2} mu^{l-2} < 1 - K₂/λ̂ - K₂^g/λ̃`,
/// by bisection to relative accuracy `1e-12`. The left side is increasing in `mu`.
pub fn threshold_mu_doublestar(inp: &MuDoubleStarInput) -> Result<f64, CertificateError> {
    let MuDoubleStarInput { k2, kp, p, k2g, kl, l, lambda_hat, lambda_tilde, q, m, c, c_trace } = *inp;
    check_positive("lambda_hat", lambda_hat)?;
    check_positive("lambda_tilde", lambda_tilde)?;
    check_positive("Kp", kp)?;
    check_positive("C", c)?;
    check_positive("M", m)?;
    if !(p > 2.0) || (kl > 0.0 && !(l > 2.0)) {
        return Err(CertificateError::ExponentOutOfRange {
            p: if p > 2.0 { l } else { p },
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }
    if !(q > 2.0) {
        return Err(CertificateError::HypothesisViolated(format!("q = {q} must exceed 2")));
    }
    if !(k2 >= 0.0 && k2 < lambda_hat / 4.0) {
        return Err(CertificateError::HypothesisViolated(format!("need 0 <= K2 < lambda_hat/4, got K2 = {k2}")));
    }
    if !(k2g >= 0.0 && k2g < lambda_tilde / 4.0) {
        return Err(CertificateError::HypothesisViolated(format!("need 0 <= K2g < lambda_tilde/4, got K2g = {k2g}")));
    }
    if !(kl >= 0.0) {
        return Err(CertificateError::HypothesisViolated(format!("Kl = {kl} must be non-negative")));
    }
    let rhs = 1.0 - k2 / lambda_hat - k2g / lambda_tilde;
    let base = 2.0 * q * m / (q - 2.0);
    let lhs = |mu: f64| {
        let mut v = kp * c * (base * mu).powf(p - 2.0);
        if kl > 0.0 {
            v += kl * c_trace * (base * mu).powf(l - 2.0);
        }
        v
    };
    let mut hi = 1.0;
    while lhs(hi) < rhs {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// How the growth of `f` is bounded when solving for `λ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum Lambda1Variant {
    /// `K₂ = 0`; the single power bound `|f(t)| ≤ K_p |t|^{p-1}`.
    SinglePower { kp: f64 },
    /// `|f(t)| ≤ a(|t|^{p'-1} + |t|^{p-1})` with `2 + 4/N < p' < p`.
    TwoPower { a: f64, p_low: f64 },
}

/// Largest first eigenvalue `λ*` for which the existence threshold still admits `mu`.
///
/// The single-power variant is the closed form
/// `((q-2)/q) mu^{2(p-2)/(4+2N-Np)} (K_p C)^{4/(4+2N-Np)}`. The two-power variant takes
/// `K₂ = λ/2`, `K_p = a + a(λ/(2a))^{(p'-p)/(p'-2)}` and finds where `mu*(λ)` drops to `mu`:
/// a logarithmic scan from below followed by bisection.
pub fn required_lambda1(
    mu: f64,
    p: f64,
    q: f64,
    dim: usize,
    c: f64,
    variant: Lambda1Variant,
) -> Result<f64, CertificateError> {
    let crit = mass_critical_exponent(dim);
    check_exponent(p, crit, critical_exponent(dim))?;
    check_positive("mu", mu)?;
    check_positive("C", c)?;
    if !(q > 2.0) {
        return Err(CertificateError::HypothesisViolated(format!("q = {q} must exceed 2")));
    }
    let n = dim as f64;
    match variant {
        Lambda1Variant::SinglePower { kp } => {
            check_positive("Kp", kp)?;
            let den = 4.0 + 2.0 * n - n * p;
            Ok((q - 2.0) / q * mu.powf(2.0 * (p - 2.0) / den) * (kp * c).powf(4.0 / den))
        }
        Lambda1Variant::TwoPower { a, p_low } => {
            check_positive("a", a)?;
            check_exponent(p_low, crit, p)?;
            let mu_star = |lam: f64| {
                let kp = a + a * (lam / (2.0 * a)).powf((p_low - p) / (p_low - 2.0));
                threshold_mu_star_theorem(lam / 2.0, kp, p, q, lam, dim, c).unwrap_or(0.0)
            };
            let grid: Vec<f64> = (0..=480).map(|k| 10f64.powf(-12.0 + k as f64 * 0.05)).collect();
            if mu_star(grid[0]) < mu {
                return Err(CertificateError::HypothesisViolated(format!(
                    "mu = {mu} exceeds mu* even at lambda1 = 1e-12"
                )));
            }
            let Some(k) = grid.iter().position(|&lam| mu_star(lam) < mu) else {
                return Ok(f64::INFINITY);
            };
            let (mut lo, mut hi) = (grid[k - 1], grid[k]);
            while hi - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + hi);
                if mu_star(mid) >= mu {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        }
    }
}

/// The shift `2λ₁(q - 2*)/(2*(q - 2 - 4/N))` exactly as printed; negative whenever
/// `2 + 4/N < q < 2*`.
pub fn shift_printed(lambda1: f64, q: f64, dim: usize) -> Result<f64, CertificateError> {
    if dim < 3 {
        return Err(CertificateError::HypothesisViolated(format!("needs N >= 3, got N = {dim}")));
    }
    let crit = mass_critical_exponent(dim);
    if q == crit {
        return Err(CertificateError::ExponentOutOfRange { p: q, lo: crit, hi: critical_exponent(dim) });
    }
    let two_star = critical_exponent(dim);
    Ok(2.0 * lambda1 * (q - two_star) / (two_star * (q - crit)))
}

/// `mu*_s = ((λ₁+s-K₂)/(K_p C))^{2/(p-2)} (q/(q-2))^{2/(p-2)-N/2} (λ₁+s)^{-N/2}`.
#[allow(clippy::too_many_arguments)]
pub fn threshold_mu_star_shifted(
    k2: f64,
    kp: f64,
    p: f64,
    q: f64,
    lambda1: f64,
    s: f64,
    dim: usize,
    c: f64,
) -> Result<f64, CertificateError> {
    check_exponent(p, 2.0, critical_exponent(dim))?;
    check_positive("Kp", kp)?;
    check_positive("C", c)?;
    check_positive("lambda1 + s", lambda1 + s)?;
    if !(q > 2.0) {
        return Err(CertificateError::HypothesisViolated(format!("q = {q} must exceed 2")));
    }
    if !(k2 >= 0.0 && k2 < lambda1 + s) {
        return Err(CertificateError::HypothesisViolated(format!("need 0 <= K2 < lambda1 + s, got K2 = {k2}")));
    }
    let n = dim as f64;
    let e = 2.0 / (p - 2.0);
    let ls = lambda1 + s;
    Ok(((ls - k2) / (kp * c)).powf(e) * (q / (q - 2.0)).powf(e - n / 2.0) * ls.powf(-n / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(p: f64, dim: usize) -> MuStarInput {
        MuStarInput { k2: 0.0, kp: 1.0, p, q: 4.0, lambda1: 1.0, dim, m: 0.5, c: 1.0 }
    }

    #[test]
    fn mu_star_unit_case() {
        assert!((threshold_mu_star(&unit(3.0, 1)).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn mu_star_quartic_interval() {
        let pi2 = std::f64::consts::PI.powi(2);
        let c = 0.55;
        let v = threshold_mu_star_theorem(0.0, 1.0, 4.0, 4.0, pi2, 1, c).unwrap();
        assert!((v - std::f64::consts::PI / c).abs() <= 1e-12 * v);
    }

    #[test]
    fn mu_star_branches_agree_with_theorem_specialization() {
        // With M = λ₁/2 the supercritical branch reduces to (q/(q-2))^{2/(p-2)-N/2}.
        let (k2, kp, p, q, l1, c) = (0.3, 2.0, 5.0, 4.5, 3.0, 0.7);
        let v = threshold_mu_star_theorem(k2, kp, p, q, l1, 3, c).unwrap();
        let e = 2.0 / (p - 2.0);
        let expect = ((l1 - k2) / (kp * c)).powf(e) * (q / (q - 2.0)).powf(e - 1.5) * l1.powf(-1.5);
        assert!((v - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn mu_star_hypotheses() {
        let mut i = unit(3.0, 1);
        i.k2 = 1.0;
        assert!(matches!(threshold_mu_star(&i), Err(CertificateError::HypothesisViolated(_))));
        assert!(matches!(threshold_mu_star(&unit(6.0, 3)), Err(CertificateError::ExponentOutOfRange { .. })));
    }

    #[test]
    fn mu_star_monotonicity_grid() {
        for &p in &[2.5, 3.0, 4.0, 5.0] {
            for k in 1..20 {
                let l = 0.5 * k as f64;
                let mut a = unit(p, 1);
                a.lambda1 = l;
                let mut b = a;
                b.lambda1 = l * 1.1;
                assert!(threshold_mu_star(&b).unwrap() > threshold_mu_star(&a).unwrap());
                let mut c = a;
                c.kp = 1.3;
                assert!(threshold_mu_star(&c).unwrap() < threshold_mu_star(&a).unwrap());
            }
        }
    }

    fn dstar_unit() -> MuDoubleStarInput {
        MuDoubleStarInput {
            k2: 0.0,
            kp: 1.0,
            p: 4.0,
            k2g: 0.0,
            kl: 1.0,
            l: 4.0,
            lambda_hat: 1.0,
            lambda_tilde: 1.0,
            q: 4.0,
            m: 0.25,
            c: 1.0,
            c_trace: 1.0,
        }
    }

    #[test]
    fn mu_doublestar_symmetric_case() {
        let v = threshold_mu_doublestar(&dstar_unit()).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn mu_doublestar_single_term_closed_form() {
        let mut i = dstar_unit();
        i.kl = 0.0;
        i.k2 = 0.2;
        i.lambda_hat = 2.0;
        i.p = 3.5;
        i.m = 0.7;
        i.c = 1.7;
        let v = threshold_mu_doublestar(&i).unwrap();
        let expect = ((1.0 - 0.1) / 1.7f64).powf(1.0 / 1.5) * (i.q - 2.0) / (2.0 * i.q * i.m);
        assert!((v - expect).abs() <= 1e-11 * expect);
    }

    #[test]
    fn mu_doublestar_hypothesis() {
        let mut i = dstar_unit();
        i.k2 = 0.5;
        assert!(matches!(threshold_mu_doublestar(&i), Err(CertificateError::HypothesisViolated(_))));
    }

    #[test]
    fn lambda_star_single_power() {
        let v = required_lambda1(1.0, 5.0, 4.0, 3, 1.0, Lambda1Variant::SinglePower { kp: 1.0 }).unwrap();
        assert!((v - 0.5).abs() <= 1e-12);
        assert!(matches!(
            required_lambda1(1.0, 2.0 + 4.0 / 3.0, 4.0, 3, 1.0, Lambda1Variant::SinglePower { kp: 1.0 }),
            Err(CertificateError::ExponentOutOfRange { .. })
        ));
    }

    #[test]
    fn lambda_star_decreases_in_mu() {
        let mut prev = f64::INFINITY;
        for k in 0..10 {
            let mu = 0.1 * 2f64.powi(k);
            let v = required_lambda1(mu, 5.0, 4.0, 3, 1.0, Lambda1Variant::SinglePower { kp: 1.0 }).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn lambda_star_two_power_is_consistent() {
        let (mu, p, q, c) = (0.5, 5.5, 4.0, 0.8);
        let lam = required_lambda1(mu, p, q, 3, c, Lambda1Variant::TwoPower { a: 1.0, p_low: 4.0 }).unwrap();
        assert!(lam.is_finite() && lam > 0.0);
        let kp = |l: f64| 1.0 + (l / 2.0f64).powf((4.0 - p) / 2.0);
        let at = |l: f64| threshold_mu_star_theorem(l / 2.0, kp(l), p, q, l, 3, c).unwrap();
        assert!(at(lam) >= mu && at(lam * (1.0 + 1e-9)) < mu);
    }

    #[test]
    fn shift_formula_and_sign() {
        // N = 3, q = 4: 2λ(4-6)/(6(4-2-4/3)) = -λ.
        assert!((shift_printed(2.0, 4.0, 3).unwrap() + 2.0).abs() < 1e-12);
        assert!(shift_printed(1.0, 4.0, 2).is_err());
    }

    #[test]
    fn shifted_threshold_reduces_to_theorem_at_zero_shift() {
        let a = threshold_mu_star_shifted(0.0, 1.0, 5.0, 4.0, 3.0, 0.0, 3, 1.0).unwrap();
        let b = threshold_mu_star_theorem(0.0, 1.0, 5.0, 4.0, 3.0, 3, 1.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * b);
    }
}
