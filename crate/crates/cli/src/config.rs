//! Run configuration read from a TOML file. Unknown keys anywhere are errors.

use anyhow::{anyhow, bail, Context, Result};
use normcrit::certificates::{Lambda1Variant, MuDoubleStarInput, MuStarInput};
use normcrit::functionals::{Parity, PowerTerm, Role};
use normcrit::scan::MuGrid;
use normcrit::solver::ContinuationSchedule;
use normcrit::{BoundaryMode, DomainKind, NonlinearitySpec, Tolerances};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<DomainBlock>,
    #[serde(default)]
    pub mesh: MeshBlock,
    pub boundary: Option<BoundaryMode>,
    pub f: Option<NonlinearityBlock>,
    pub g: Option<NonlinearityBlock>,
    pub mu: Option<f64>,
    #[serde(rename = "mu-scan")]
    pub mu_scan: Option<MuGrid>,
    #[serde(default)]
    pub schedule: ContinuationSchedule,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub eigs: EigsBlock,
    pub multiplicity: Option<MultiplicityBlock>,
    #[serde(default)]
    pub certificate: CertificateBlock,
    pub thresholds: Option<ThresholdsBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainBlock {
    Interval { a: f64, b: f64, star_center: Option<[f64; 1]> },
    Rectangle { ax: f64, bx: f64, ay: f64, by: f64, star_center: Option<[f64; 2]> },
    Box { lo: [f64; 3], hi: [f64; 3], star_center: Option<[f64; 3]> },
}

impl DomainBlock {
    pub fn kind(&self) -> DomainKind {
        match *self {
            Self::Interval { a, b, .. } => DomainKind::Interval { a, b },
            Self::Rectangle { ax, bx, ay, by, .. } => DomainKind::Rectangle { ax, bx, ay, by },
            Self::Box { lo, hi, .. } => DomainKind::Box { lo, hi },
        }
    }

    pub fn star_center(&self) -> Option<Vec<f64>> {
        match self {
            Self::Interval { star_center, .. } => star_center.map(|c| c.to_vec()),
            Self::Rectangle { star_center, .. } => star_center.map(|c| c.to_vec()),
            Self::Box { star_center, .. } => star_center.map(|c| c.to_vec()),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshBlock {
    /// Elements per axis.
    pub n: usize,
}

impl Default for MeshBlock {
    fn default() -> Self {
        Self { n: 128 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityBlock {
    pub terms: Vec<PowerTerm>,
    #[serde(default = "odd")]
    pub parity: Parity,
    /// Optional replacement growth constants `(K₂, K_p)`; checked before use.
    pub k2: Option<f64>,
    pub kp: Option<f64>,
}

fn odd() -> Parity {
    Parity::Odd
}

impl NonlinearityBlock {
    pub fn build(&self, role: Role) -> Result<NonlinearitySpec> {
        let mut spec = NonlinearitySpec::new(self.terms.clone(), role)?.with_parity(self.parity);
        match (self.k2, self.kp) {
            (None, None) => {}
            (Some(k2), Some(kp)) => spec = spec.with_certificate(k2, kp)?,
            _ => bail!("k2 and kp must be given together"),
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigsBlock {
    pub count: usize,
}

impl Default for EigsBlock {
    fn default() -> Self {
        Self { count: 6 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplicityBlock {
    /// Number of solution pairs wanted.
    pub m: usize,
    /// Ratio `k` in the radius `ξ = sqrt((k-1)/k · mu λ_j)`.
    #[serde(default = "two")]
    pub k_tune: f64,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateBlock {
    /// Elements per axis for the interpolation-constant estimate; defaults to the mesh.
    pub gn_n: Option<usize>,
    /// Skip the estimate and use these constants instead.
    pub c: Option<f64>,
    pub c_trace: Option<f64>,
    /// Skip the certificate entirely.
    #[serde(default)]
    pub skip: bool,
}

/// Explicit threshold inputs, bypassing the discretization.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsBlock {
    pub mu_star: Option<MuStarInput>,
    pub mu_doublestar: Option<MuDoubleStarInput>,
    pub lambda_star: Option<LambdaStarBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaStarBlock {
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub dim: usize,
    pub c: f64,
    pub variant: Lambda1Variant,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.is_some() && self.mu_scan.is_some() {
            bail!("mu and mu-scan are mutually exclusive");
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0 && mu.is_finite()) {
                bail!("mu = {mu} must be positive and finite");
            }
        }
        if let Some(grid) = &self.mu_scan {
            grid.validate()?;
        }
        if let Some(d) = &self.domain {
            normcrit::mesh::build_domain(d.kind(), d.star_center())?;
        }
        if let Some(f) = &self.f {
            f.build(Role::Interior)?;
        }
        if let Some(g) = &self.g {
            g.build(Role::Boundary)?;
        }
        match (self.boundary, self.g.is_some()) {
            (Some(BoundaryMode::Robin), false) => bail!("robin mode needs a [g] block"),
            (Some(BoundaryMode::Dirichlet | BoundaryMode::Neumann), true) => bail!("[g] is only used in robin mode"),
            _ => {}
        }
        if self.mesh.n < normcrit::mesh::MIN_ELEMENTS_PER_AXIS {
            bail!("mesh.n = {} is below {}", self.mesh.n, normcrit::mesh::MIN_ELEMENTS_PER_AXIS);
        }
        if self.eigs.count == 0 {
            bail!("eigs.count must be positive");
        }
        if let Some(m) = &self.multiplicity {
            if m.m == 0 || m.k_tune.is_nan() || m.k_tune <= 1.0 {
                bail!("multiplicity needs m >= 1 and k_tune > 1");
            }
        }
        Ok(())
    }

    pub fn require_mu(&self) -> Result<f64> {
        self.mu.ok_or_else(|| anyhow!("this subcommand needs mu"))
    }

    pub fn require_problem(&self) -> Result<(DomainBlock, BoundaryMode, &NonlinearityBlock)> {
        match (&self.domain, self.boundary, &self.f) {
            (Some(d), Some(b), Some(f)) => Ok((*d, b, f)),
            _ => bail!("this subcommand needs [domain], boundary and [f]"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBIC: &str = r#"
boundary = "dirichlet"
mu = 0.05
[domain]
kind = "interval"
a = 0.0
b = 1.0
[f]
terms = [{ a = 1.0, p = 4.0 }]
"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::parse(CUBIC).unwrap();
        assert_eq!(c.mesh.n, 128);
        assert_eq!(c.schedule, ContinuationSchedule::default());
        assert_eq!(c.require_mu().unwrap(), 0.05);
        assert!(matches!(c.domain, Some(DomainBlock::Interval { a, b, .. }) if a == 0.0 && b == 1.0));
    }

    #[test]
    fn rejects_mu_and_scan_together() {
        let text = format!("{CUBIC}\n[mu-scan]\nfrom = 0.01\nto = 0.1\nsteps = 3\n");
        assert!(RunConfig::parse(&text).unwrap_err().to_string().contains("mutually exclusive"));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse(&format!("{CUBIC}\n[tolerances]\nmas = 1e-9\n")).is_err());
        assert!(RunConfig::parse(&CUBIC.replace("b = 1.0", "b = 1.0\nc = 2.0")).is_err());
        assert!(RunConfig::parse(&format!("colour = 1\n{CUBIC}")).is_err());
    }

    #[test]
    fn rejects_empty_scan_and_bad_blocks() {
        let no_mu = CUBIC.replace("mu = 0.05", "");
        assert!(RunConfig::parse(&format!("{no_mu}\n[mu-scan]\nfrom = 0.01\nto = 0.1\nsteps = 0\n")).is_err());
        assert!(RunConfig::parse(&CUBIC.replace("p = 4.0", "p = 1.5")).is_err());
        assert!(RunConfig::parse(&CUBIC.replace("dirichlet", "robin")).is_err());
    }

    #[test]
    fn explicit_threshold_inputs() {
        let text = r#"
[thresholds.mu_star]
k2 = 0.0
kp = 1.0
p = 3.0
q = 4.0
lambda1 = 1.0
dim = 1
m = 0.5
c = 1.0
[thresholds.lambda_star]
mu = 1.0
p = 3.0
q = 4.0
dim = 1
c = 1.0
variant = { variant = "single_power", kp = 1.0 }
"#;
        let c = RunConfig::parse(text).unwrap();
        let t = c.thresholds.unwrap();
        assert_eq!(t.mu_star.unwrap().p, 3.0);
        assert!(matches!(t.lambda_star.unwrap().variant, Lambda1Variant::SinglePower { kp } if kp == 1.0));
    }
}
