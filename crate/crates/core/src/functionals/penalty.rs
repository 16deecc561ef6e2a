use super::FunctionalError;

/// Penalty `f_r(s) = s^r / (1 - s)` and the derived quantities used by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyValues {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    /// `h_r(s) = f_r'(s) s - f_r(s)`; its derivative is `f_r''(s) s`.
    pub h: f64,
}

/// Evaluates the penalty at `s ∈ [0, 1)` for an exponent `r > 1`.
///
/// At `s = 0` the second derivative follows the closed form, so it is `2` for `r = 2`,
/// `0` for `r > 2` and infinite for `1 < r < 2`.
pub fn penalty(s: f64, r: f64) -> Result<PenaltyValues, FunctionalError> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(FunctionalError::InvalidPenaltyExponent(r));
    }
    if !(0.0..1.0).contains(&s) {
        return Err(FunctionalError::SOutOfRange(s));
    }
    let om = 1.0 - s;
    let sr = s.powf(r);
    let sr1 = s.powf(r - 1.0);
    let sr2 = s.powf(r - 2.0);
    let f = sr / om;
    let df = r * sr1 / om + sr / (om * om);
    let d2f = r * (r - 1.0) * sr2 / om + 2.0 * r * sr1 / (om * om) + 2.0 * sr / (om * om * om);
    Ok(PenaltyValues { f, df, d2f, h: df * s - f })
}

/// `C²` monotone cutoff: identity on `[0, ∞)`, `-1` on `(-∞, -1]`, and the quintic
/// Hermite interpolant in between.
pub fn beta_cutoff(t: f64) -> f64 {
    if t >= 0.0 {
        t
    } else if t <= -1.0 {
        -1.0
    } else {
        let x = t + 1.0;
        let x3 = x * x * x;
        -1.0 + x3 * (6.0 - 8.0 * x + 3.0 * x * x)
    }
}
