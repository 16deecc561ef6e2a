use super::FunctionalError;
use serde::{Deserialize, Serialize};

/// One term `a |t|^{p-2} t` of a power-sum nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub a: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `f(-t) = -f(t)`.
    Odd,
    /// Only the positive part acts: `a (t⁺)^{p-1}`. Not odd.
    PositivePart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Interior,
    Boundary,
}

/// Constants with `|f(t)| ≤ k2 |t| + kp |t|^{p-1}`, together with the largest
/// exponent `p` and the Ambrosetti–Rabinowitz exponent `q` (`f(t) t ≥ q F(t)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub k2: f64,
    pub kp: f64,
    pub p: f64,
    pub q: f64,
}

/// A finite sum of power terms with a growth certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    terms: Vec<PowerTerm>,
    parity: Parity,
    role: Role,
    certificate: GrowthCertificate,
}

impl NonlinearitySpec {
    /// Builds an odd power sum. An empty term list is the zero nonlinearity.
    ///
    /// The default certificate puts every term below the top exponent into the linear
    /// part (`|t|^{p_i-1} ≤ |t| + |t|^{p-1}`), so it is valid but not sharp when several
    /// exponents are present, and exact for a single power.
    pub fn new(terms: Vec<PowerTerm>, role: Role) -> Result<Self, FunctionalError> {
        for t in &terms {
            if !(t.a > 0.0 && t.a.is_finite()) || !(t.p > 2.0 && t.p.is_finite()) {
                return Err(FunctionalError::InvalidTerm { a: t.a, p: t.p });
            }
        }
        let p = terms.iter().map(|t| t.p).fold(2.0, f64::max);
        let q = terms.iter().map(|t| t.p).fold(f64::INFINITY, f64::min);
        let q = if q.is_finite() { q } else { 2.0 };
        let k2 = terms.iter().filter(|t| t.p < p).map(|t| t.a).sum();
        let kp = terms.iter().map(|t| t.a).sum();
        let spec = Self { terms, parity: Parity::Odd, role, certificate: GrowthCertificate { k2, kp, p, q } };
        spec.check_certificate(&spec.certificate)?;
        Ok(spec)
    }

    pub fn single(a: f64, p: f64, role: Role) -> Result<Self, FunctionalError> {
        Self::new(vec![PowerTerm { a, p }], role)
    }

    pub fn zero(role: Role) -> Self {
        Self::new(Vec::new(), role).expect("empty sum is valid")
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    /// Replaces the growth constants, after checking them on a dense sample of `t`.
    pub fn with_certificate(mut self, k2: f64, kp: f64) -> Result<Self, FunctionalError> {
        let cert = GrowthCertificate { k2, kp, ..self.certificate };
        self.check_certificate(&cert)?;
        self.certificate = cert;
        Ok(self)
    }

    fn check_certificate(&self, c: &GrowthCertificate) -> Result<(), FunctionalError> {
        for k in -600..=600 {
            let t = 10f64.powf(k as f64 / 100.0);
            let bound = c.k2 * t + c.kp * t.powf(c.p - 1.0);
            let v = self.f(t).abs().max(self.f(-t).abs());
            if v > bound * (1.0 + 1e-12) + 1e-300 {
                return Err(FunctionalError::CertificateViolated { t, value: v, bound });
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_odd(&self) -> bool {
        self.parity == Parity::Odd
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn certificate(&self) -> GrowthCertificate {
        self.certificate
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent (2 for the zero nonlinearity).
    pub fn max_exponent(&self) -> f64 {
        self.certificate.p
    }

    /// Smallest exponent, which is the Ambrosetti–Rabinowitz constant `q`.
    pub fn min_exponent(&self) -> f64 {
        self.certificate.q
    }

    #[inline]
    fn active(&self, t: f64) -> bool {
        self.parity == Parity::Odd || t > 0.0
    }

    #[inline]
    pub fn f(&self, t: f64) -> f64 {
        if !self.active(t) {
            return 0.0;
        }
        let at = t.abs();
        self.terms.iter().map(|s| s.a * at.powf(s.p - 2.0) * t).sum()
    }

    /// Primitive `F(t) = ∫_0^t f`.
    #[inline]
    pub fn primitive(&self, t: f64) -> f64 {
        if !self.active(t) {
            return 0.0;
        }
        let at = t.abs();
        self.terms.iter().map(|s| s.a * at.powf(s.p) / s.p).sum()
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        if !self.active(t) {
            return 0.0;
        }
        let at = t.abs();
        self.terms.iter().map(|s| s.a * (s.p - 1.0) * at.powf(s.p - 2.0)).sum()
    }
}

/// `(f(t), F(t))`.
pub fn eval_f(spec: &NonlinearitySpec, t: f64) -> (f64, f64) {
    (spec.f(t), spec.primitive(t))
}
